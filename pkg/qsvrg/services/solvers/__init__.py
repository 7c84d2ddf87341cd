# qsvrg/services/solvers/__init__.py

from .base import RunTrace, SolverBase, effective_passes, geometric_checkpoints
from .lsvrg import LSVRGSolver, lsvrg_uniform
from .qsvrg import (
    QSVRGSolver,
    auto_schedule_for_budget,
    qsvrg,
    qsvrg_auto_schedule,
    qsvrg_final,
    qsvrg_replicates,
    theoretical_schedule,
)
from .sag import SAGSolver, sag_nonuniform
from .sgd import AveragedSGDSolver, sgd_nonuniform_averaged, sgd_uniform_averaged
from .svrg import SVRGSolver, svrg_nonuniform

__all__ = [
    "RunTrace",
    "SolverBase",
    "effective_passes",
    "geometric_checkpoints",
    "QSVRGSolver",
    "qsvrg",
    "qsvrg_final",
    "qsvrg_replicates",
    "qsvrg_auto_schedule",
    "auto_schedule_for_budget",
    "theoretical_schedule",
    "AveragedSGDSolver",
    "sgd_uniform_averaged",
    "sgd_nonuniform_averaged",
    "SAGSolver",
    "sag_nonuniform",
    "SVRGSolver",
    "svrg_nonuniform",
    "LSVRGSolver",
    "lsvrg_uniform",
]
