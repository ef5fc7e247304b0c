"""Cops chasing a gambler on a graph: strategies, exact capture times, simulation."""

from .engine import (
    CaptureStats,
    ExactValue,
    capture_probs,
    evaluate,
    exact_expected_time,
    expected_capture_time,
    monte_carlo,
    round_evasion_bound_check,
    simulate,
)
from .gamblers import GamblerModel, adversarial_suite, make_changing, make_static, sample
from .graph import Graph, RootedTree, build_graph, diameter, generate, is_connected, spanning_tree
from .sectors import SectorDecomposition, decompose, peel_sector
from .strategies import CopSchedule, changing_two_part, dfs_patrol, diameter_chase, top_k_sit

__version__ = "0.1.0"
