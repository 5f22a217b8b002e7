"""Online changepoint detection from the reconstruction error of windowed Hankel DMD."""

from .baseline import EwmaBaselineParams, ewma_detect
from .detector import HyperParams, single_cp
from .dmd import dmd, dmd_operator_full
from .embedding import hankelize, unroll
from .errors import CpdmdError, DataError, NumericalError
from .metrics import MarginSpec, arl0, arl1, covering, prf1
from .pipeline import ChangepointReport, detect_all
from .selection import GridSpec, select_hyperparams
from .synth import generate, null_scenario, scenario_catalog

__all__ = [
    "ChangepointReport", "CpdmdError", "DataError", "EwmaBaselineParams", "GridSpec",
    "HyperParams", "MarginSpec", "NumericalError", "arl0", "arl1", "covering", "detect_all",
    "dmd", "dmd_operator_full", "ewma_detect", "generate", "hankelize", "null_scenario",
    "prf1", "scenario_catalog", "select_hyperparams", "single_cp", "unroll",
]

__version__ = "0.1.0"
