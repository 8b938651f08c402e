"""Flow, cycle-elimination and partition formulations, with MPS export."""
from .cycle import (CycleModel, build_cycle_minmax, cycle_vector, extract_forest_from_cycle, separate_cycle,
                    separation_digraph, violated_by_scan)
from .flow import (FlowModel, build_flow_maxmin, build_flow_minmax, extract_forest_from_flow, flow_vector,
                   forest_lower_bound)
from .mps import export_mps, format_lp_text, format_mps, import_mps, parse_mps, write_lp_text
from .partition import RmpModel, RmpSolution, build_rmp, forest_from_rmp, pad_forest, respects, solve_rmp_integer
