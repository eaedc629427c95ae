"""Upper bounds on the vertex bisection width of random regular graphs.

Three routes to the same quantity: a greedy partitioner on concrete
graphs, a Monte Carlo simulation of the matching-exposure process, and a
fluid-limit ODE integration of that process.
"""

from .dem import DemRunResult, DemState, init_state, run_dem
from .graph import (
    Bisection,
    RegularGraph,
    ball_layers,
    ball_sizes,
    bisection_of,
    brute_force_bw,
    brute_force_vbw,
    gen_regular,
    load_edge_list,
    save_edge_list,
    vertex_width,
)
from .greedy import GreedyConfig, GreedyTrace, alpha_of, run_alg1
from .pairing import PairingState, SimTrace, run_alg2, run_alg3

__version__ = "0.1.0"

__all__ = [
    "Bisection",
    "DemRunResult",
    "DemState",
    "GreedyConfig",
    "GreedyTrace",
    "PairingState",
    "RegularGraph",
    "SimTrace",
    "alpha_of",
    "ball_layers",
    "ball_sizes",
    "bisection_of",
    "brute_force_bw",
    "brute_force_vbw",
    "gen_regular",
    "init_state",
    "load_edge_list",
    "run_alg1",
    "run_alg2",
    "run_alg3",
    "run_dem",
    "save_edge_list",
    "vertex_width",
    "__version__",
]
