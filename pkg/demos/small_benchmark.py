"""
A desk-scale benchmark grid: four classifiers, two split ratios
===============================================================

The experiment harness runs algorithms x input modes x label ratios x
spectral dimensions over repeated runs, pairing every comparison on the
same graphs and the same splits. This scaled-down grid finishes in under
a minute; the full benchmark in the test suite uses 2000-node graphs and
ten runs.
"""

from signet.graph import GeneratorConfig
from signet.harness import ExperimentConfig, run_experiment
from signet.nn import TrainConfig

config = ExperimentConfig(
    algorithms=("dae", "cnn", "knn", "svm"),
    ratios=(10.0, 20.0),
    ks=(10,),
    runs=3,
    n_benign=150,
    n_fraud=150,
    generator=GeneratorConfig(block_pos_prob=0.1, cross_neg_prob=0.01,
                              fraud_degree=10),
    train=TrainConfig(epochs=60, batch_size=8, validation_fraction=0.0),
    master_seed=0,
)

report = run_experiment(config)
print(report.to_table())

# every number above is a mean over 3 graphs; the seeding scheme hashes
# (master seed, run, consumer), so re-running reproduces the CSV bytes
again = run_experiment(config)
print(f"byte-identical on rerun: {report.to_csv() == again.to_csv()}")
