"""Minimum-time gate synthesis on SU(2) by dynamic programming.

Solve the discounted HJB equation for steering any SU(2) element to the
identity with bounded I_x / I_z controls, read optimal feedback off the
value field, and compile the resulting paths into X/Z rotation gates.
"""
from .dynamics import coordinate_velocity, make_control_set
from .oracle import dijkstra_min_time
from .solver import (
    SolverConfig,
    ValueField,
    build_grid,
    kruskov_inverse,
    load_field,
    save_field,
    slice_export,
    solve,
    value_iteration_sweep,
)
from .su2 import compose, exp_map, group_distance, log_map
from .synthesis import (
    GateSequence,
    Trajectory,
    bounds_report,
    compile_gates,
    optimal_control,
    reverse_to_forward,
    trace_trajectory,
)

__version__ = "0.1.0"
