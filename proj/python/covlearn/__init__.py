"""Factor-graph state estimation with learned noise covariances."""

from covlearn._core import (
    Bounds,
    Dataset,
    DatasetSpec,
    EvalResult,
    FactorGraph,
    NavTrajectory,
    Rmse,
    SE2Pose,
    SolveResult,
    SolverOptions,
    TrainConfig,
    TrainIterationRecord,
    TrainProblem,
    TrainReport,
    ZeroOrderMethod,
    ZeroOrderOptions,
    build_graph,
    compose,
    dead_reckoning_init,
    eigen_spread,
    evaluate_dataset,
    exp,
    frank_wolfe_step,
    fw_direction,
    inverse,
    log,
    make_dataset,
    make_train_problem,
    ominus,
    oplus,
    rmse,
    solve,
    standard_spec,
    total_error,
    tracking_loss,
    train,
    train_zero_order,
    training_objective,
    wrap_angle,
)

__all__ = [
    "Bounds",
    "Dataset",
    "DatasetSpec",
    "EvalResult",
    "FactorGraph",
    "NavTrajectory",
    "Rmse",
    "SE2Pose",
    "SolveResult",
    "SolverOptions",
    "TrainConfig",
    "TrainIterationRecord",
    "TrainProblem",
    "TrainReport",
    "ZeroOrderMethod",
    "ZeroOrderOptions",
    "build_graph",
    "compose",
    "dead_reckoning_init",
    "eigen_spread",
    "evaluate_dataset",
    "exp",
    "frank_wolfe_step",
    "fw_direction",
    "inverse",
    "log",
    "make_dataset",
    "make_train_problem",
    "ominus",
    "oplus",
    "rmse",
    "solve",
    "standard_spec",
    "total_error",
    "tracking_loss",
    "train",
    "train_zero_order",
    "training_objective",
    "wrap_angle",
]

__version__ = "0.1.0"
