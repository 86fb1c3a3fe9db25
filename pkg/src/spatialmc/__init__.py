"""Low-rank and spatial matrix completion for multivariate spatial data."""

from .design import (DesignMatrix, DesignRecipe, build_design_matrix, choose_knots,
                     evaluate_design, tps_basis)
from .errors import InvalidInputError, RankUnreachableError, SolverFailureError, SpatialMCError
from .linalg import (ColumnSpaceProjector, SvdFactors, center_columns, column_space_projector,
                     frobenius_norm, nuclear_norm, soft_threshold_singular_values, svd)
from .lrmc import CompletionFit, SolverSettings, lrmc_closed_form, lrmc_objective, lrmc_solve
from .masking import fill_combine, mask_from_nan, project_observed, project_unobserved
from .simulate import (ScenarioConfig, SimulatedDataset, apply_mcar, gen_dataset,
                       gen_gaussian_field, grid_coords, load_config, load_preset, preset_names,
                       save_config)
from .smc import (SmcFit, extract_pc_scores, predict_new_locations, select_lambda_for_rank,
                  smc_closed_form, smc_objective, smc_solve)

__version__ = "0.1.0"
