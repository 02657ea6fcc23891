"""Online multi-task regression with recursive least squares and sparse kernel recursions."""
from . import kernels
from .contenders import Mogd, StlEnsemble, stl_wrap
from .errors import (
    CapacityError,
    GridSearchError,
    InvalidInputError,
    NumericalBreakdownError,
    OmtlError,
    ParseError,
    SingularMatrixError,
    UndefinedCorrelationError,
)
from .feature_maps import ElmMap, ar_embed, difference, undifference
from .mt_oslssvr import KernelDictionary, MtKernel, MtOslssvr, lssvr_batch_oracle, mt_kernel_eval
from .mt_wrls import MtWrls, mt_batch_oracle
from .task_graph import TaskGraph, build_interaction_matrix, invert_interaction_matrix, spearman_similarity
from .wrls import WrlsState, wrls_batch_oracle, wrls_init

__version__ = "0.1.0"
