"""Grid-sampled physics-informed neural networks with finite-difference
losses, dimensional-analysis loss weighting, and built-in reference solvers
for three benchmarks: heat conduction, convection-diffusion, and the
lid-driven cavity."""

from .diffengine import LossGradient, fd_gradient_check, loss_and_gradient, loss_value
from .estimator import PinnSolver, check_points, default_architecture
from .fdm import (
    CavityConfig,
    FdmSolution,
    solve_cavity_projection,
    solve_conduction_gs,
    solve_convdiff_direct,
    solve_convdiff_gs,
)
from .grid import (
    Field,
    Grid,
    GridError,
    boundary_normal_derivative,
    gradient_central,
    laplacian_cds,
    make_grid,
    mse,
    read_field_csv,
    write_field_csv,
)
from .harness import (
    ExperimentConfig,
    FdmCache,
    ReportRow,
    compute_reference,
    evaluate_mse,
    pressure_gradient_post,
    run_sweep,
)
from .network import (
    Architecture,
    MlpParams,
    forward_batch,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .optimizer import AdamState, TrainConfig, TrainHistory, adam_step, lr_at, train
from .problems import (
    BoundarySpec,
    ProblemSpec,
    WeightVector,
    cavity_components,
    compute_weights,
    conduction_components,
    convdiff_components,
    make_boundary,
    make_objective,
    total_loss,
)

__version__ = "0.1.0"
