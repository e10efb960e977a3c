"""Link prediction toolkit.

Graph heuristics, walk-sum truncation experiments, enclosing-subgraph
extraction with structural labels, a small graph neural network classifier,
and a seeded experiment pipeline, all exposed through one CLI.
"""

__version__ = "0.1.0"

from .errors import InputError, LinkpredError, NumericalError
from .graph import (Graph, DistanceMap, NodeIdMap, bfs_distances,
                    induce_subgraph, gen_synthetic, load_edge_list,
                    save_edge_list)
from .heuristics import HeuristicConfig, ScoreTable, local_score, katz_exact, \
    rooted_pagerank, simrank, score_table, ensemble_fit_predict
from .subgraphs import EnclosingSubgraph, drnl_hash, drnl_label, \
    extract_enclosing, build_node_info
from .pipeline import LinkSet, SplitSpec, auc, average_precision, \
    split_links, select_h, run_experiment

__all__ = [
    "InputError", "LinkpredError", "NumericalError",
    "Graph", "DistanceMap", "NodeIdMap", "bfs_distances", "induce_subgraph",
    "gen_synthetic", "load_edge_list", "save_edge_list",
    "HeuristicConfig", "ScoreTable", "local_score", "katz_exact",
    "rooted_pagerank", "simrank", "score_table", "ensemble_fit_predict",
    "EnclosingSubgraph", "drnl_hash", "drnl_label", "extract_enclosing",
    "build_node_info",
    "LinkSet", "SplitSpec", "auc", "average_precision", "split_links",
    "select_h", "run_experiment",
]
