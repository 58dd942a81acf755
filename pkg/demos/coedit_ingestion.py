"""
From an edit log to a signed graph
==================================

Editor communities can be read as a signed graph: two users who usually
fall in the same revert category on the pages they both touched get a
positive edge, users who usually disagree get a negative one. This script
walks the ingestion rules on a synthetic log; a real log in
``user<TAB>page<TAB>reverted`` form goes through ``load_edit_log`` the
same way.
"""

from signet.graph import EditRecord, build_coedit_graph, save_edge_list

R = EditRecord
log = [
    # alice and bob co-edit two articles, both uncontested -> positive edge
    R("alice", "Graphs", False), R("bob", "Graphs", False),
    R("alice", "Spectra", False), R("bob", "Spectra", False),
    # carol is reverted on both shared pages -> disagrees with alice and bob
    R("carol", "Graphs", True), R("carol", "Spectra", True),
    # dave matches eve once and differs once: a tie adds no edge
    R("dave", "Numerics", False), R("eve", "Numerics", False),
    R("dave", "Solvers", True), R("eve", "Solvers", False),
    # one reverted edit anywhere on a page flips the whole user-page pair
    R("carol", "Graphs", False),
    # meta pages never count
    R("alice", "User talk:Bob", True), R("bob", "User talk:Bob", True),
    # a user with only meta edits ends up isolated and is dropped
    R("mallory", "Wikipedia:Sandbox", True),
]

graph = build_coedit_graph(log)
names = graph.node_names
print(f"{graph.n} users with co-edit edges "
      f"({graph.pos_edge_count}+ / {graph.neg_edge_count}-):")
for u, v, sign in graph.edges():
    mark = "+" if sign > 0 else "-"
    print(f"  {names[u]:6s} {mark} {names[v]}")

# dave/eve tied 1-1, so they survive only through... nothing: no edge, and
# with no other relations both are dropped as isolated
print(f"\nkept users: {names}")
print("mallory (meta-only) and the tied dave/eve pair fall out")

# the graph exports like any other; labels would come from a separate file
save_edge_list(graph, "/tmp/coedit_edges.tsv")
print("\nedge list written to /tmp/coedit_edges.tsv")
