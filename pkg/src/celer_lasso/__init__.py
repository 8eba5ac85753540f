"""Lasso solvers with dual extrapolation, Gap Safe screening and working sets."""
from .celer import (CelerConfig, GrowthPolicy, PathSpec, build_working_set, celer_solve,
                    lasso_path, next_ws_size)
from .dataset import (DesignMatrix, LassoProblem, PreprocessReport, dump_svmlight, load_csv,
                      load_svmlight, parse_svmlight, preprocess, synthesize)
from .extrapolation import (ResidualHistory, accel_dual_point, extrapolate_residual,
                            push_residual, select_best_dual)
from .objective import (DualPoint, dual_value, duality_gap, equicorrelation, lambda_max,
                        primal_value, rescale_residual, soft_threshold, support)
from .screening import ScreeningMask, feature_scores, gap_safe_screen
from .solvers import (SolverConfig, SolverResult, TraceRecord, cd_epoch, ista_epoch,
                      power_iteration_norm, solve_inner, var_check)

__version__ = "0.1.0"
