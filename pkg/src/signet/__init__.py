"""Fraud detection on signed graphs via spectral coordinates.

Pipeline: build a signed graph (file, co-edit log, or generator), project the
nodes into the top-k spectral space of the adjacency matrix, assemble per-node
features from their own and their neighbors' coordinates, and classify with a
deep autoencoder or CNN (against k-NN / SVM baselines).  ``harness`` ties it
together; the ``signet`` CLI exposes it from the shell.
"""

from .graph import (ConflictingSignError, EdgeListError, EditRecord,
                    GeneratorConfig, GraphBuildError, SignedGraph,
                    build_coedit_graph, generate_planted_graph, load_edge_list,
                    load_edit_log, load_labels, save_edge_list, save_labels)
from .spectral import (EigenConvergenceError, SpectralEmbedding, eigen_top_k,
                       normalize_coordinates, reconstruction_residual,
                       save_embedding)
from .features import (FeatureInput, adjacency_dataset, build_adjacency_input,
                       build_matrix_input, build_vector_input, matrix_dataset,
                       neighbor_mean, signed_neighbors_at, vector_dataset)
from .nn import (GradientError, TrainConfig, TrainingDivergedError,
                 cross_entropy, grad_check, load_checkpoint, save_checkpoint,
                 train_epochs)
from .dae import AutoencoderStack, fine_tune, load_dae, pretrain, save_dae
from .cnn import (ConvFilterBank, adjacency_bank, adjacency_mode_forward,
                  average_pool, convolve, load_cnn, save_cnn)
from .baselines import (KnnModel, SvmConvergenceWarning, SvmModel,
                        kkt_violation, knn_predict, knn_predict_many,
                        rbf_kernel, svm_decision, svm_predict, svm_train)
from .harness import (ALGORITHMS, INPUT_MODES, CellResult, ExperimentConfig,
                      ExperimentReport, accuracy, child_seed, run_experiment,
                      stratified_split)

__version__ = "0.1.0"

__all__ = [
    "AutoencoderStack", "CellResult", "ConflictingSignError", "ConvFilterBank",
    "EdgeListError", "EditRecord", "EigenConvergenceError", "ExperimentConfig",
    "ExperimentReport", "FeatureInput", "GeneratorConfig", "GradientError",
    "GraphBuildError", "KnnModel", "SignedGraph", "SpectralEmbedding",
    "SvmConvergenceWarning", "SvmModel", "TrainConfig", "TrainingDivergedError",
    "ALGORITHMS", "INPUT_MODES", "accuracy", "adjacency_bank",
    "adjacency_dataset", "adjacency_mode_forward", "average_pool",
    "build_adjacency_input", "build_coedit_graph", "build_matrix_input",
    "build_vector_input", "child_seed", "convolve", "cross_entropy",
    "eigen_top_k", "fine_tune", "generate_planted_graph", "grad_check",
    "kkt_violation", "knn_predict", "knn_predict_many", "load_checkpoint",
    "load_cnn", "load_dae", "load_edge_list", "load_edit_log", "load_labels",
    "matrix_dataset", "neighbor_mean", "normalize_coordinates", "pretrain",
    "rbf_kernel", "reconstruction_residual", "run_experiment", "save_checkpoint",
    "save_cnn", "save_dae", "save_edge_list", "save_embedding", "save_labels",
    "signed_neighbors_at", "stratified_split", "svm_decision", "svm_predict",
    "svm_train", "train_epochs", "vector_dataset",
]
