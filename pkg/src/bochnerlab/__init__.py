"""Step-function laboratory for convergence modes in Bochner spaces."""

from ._backend import BACKEND
from .config import ResolutionError, configure
from .convergence import (LatticeReport, LatticeViolation, ReportConfig,
                          TestG, lattice_report)
from .dyadic import DyadicPartition, DyadicSet
from .functionals import (PettisCapError, PettisResult, ky_fan,
                          pettis_norm_exact, pettis_norm_interval)
from .oscillation import (CriterionVerdict, Status, b0_check, b1_check,
                          b2_check, sequential_bocce_check,
                          sequential_pettis_bocce_check)
from .seqspace import Functional, SeqVec, SpaceKind
from .stepfn import FunctionSequence, StepFunction
from .tightbite import biting_decompose, tightness_search

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ResolutionError", "configure",
    "LatticeReport", "LatticeViolation", "ReportConfig", "TestG",
    "lattice_report", "DyadicPartition", "DyadicSet",
    "PettisCapError", "PettisResult", "ky_fan", "pettis_norm_exact",
    "pettis_norm_interval", "CriterionVerdict", "Status", "b0_check",
    "b1_check", "b2_check", "sequential_bocce_check",
    "sequential_pettis_bocce_check", "Functional", "SeqVec", "SpaceKind",
    "FunctionSequence", "StepFunction", "biting_decompose",
    "tightness_search",
]
