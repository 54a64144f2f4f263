"""One-way passage planning for multi-robot warehouse grids."""
from .bnb import Solution, brute_force_optimum, solve
from .grid import GridMap, Instance, Task, fig1_grid, generate_instance, paper_grid, regular_grid
from .heuristic import heuristic_warmstart
from .pipeline import plan_instance
from .projection import project_paths
from .topo import extract_topo, prepare
from .validate import optimality_ratio, validate_plan

__all__ = [
    "GridMap", "Instance", "Task", "Solution", "brute_force_optimum", "extract_topo", "fig1_grid",
    "generate_instance", "heuristic_warmstart", "optimality_ratio", "paper_grid", "plan_instance",
    "prepare", "project_paths", "regular_grid", "solve", "validate_plan",
]
__version__ = "0.1.0"
