from .channels import CHANNEL_SHAPES, ChannelTable, LossRates, channel_table, channel_weights
from .kernel import BACKEND
from .qfi import QfiEstimate, ensemble_qfi, fd_step, qfi_dense, qfi_lowrank, richardson_check, simulate_qfi
from .sim import (
    NumberDistribution,
    ProtocolSpec,
    StageParams,
    TrajectoryEnsemble,
    auto_rotation,
    coherent_state,
    initial_ensemble,
    number_sectors,
    prepare,
    ramsey,
    rotate,
    rotation_x,
    run_trajectories,
)
from .optimize import OptimizationMode, OptimizedProtocol, optimize_protocol
