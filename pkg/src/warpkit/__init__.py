"""warpkit: uncertainty-aware soft dynamic time warping.

The core distance reweights pairwise costs by learned per-cell variances and
adds a log-variance penalty aggregated along the soft-selected warping path.
On top of it sit Frechet-mean barycenters, nearest-centroid / k-NN
classification, locality-constrained dictionary coding, and sequence
forecasting under a warping loss.
"""

__version__ = "0.1.0"

from .alignment import (
    BandInfeasibleError,
    PathCapacityError,
    PlanShape,
    delannoy,
    dtw_hard,
    enumerate_paths,
    path_cost,
    path_indicator,
)
from .barycenter import Barycenter, BarycenterConfig, frechet_mean, interpolate_pair
from .classify import CentroidModel, KnnConfig, eval_split, fit_centroids, predict_centroid, predict_knn
from .coding import Dictionary, code_similarity, dict_update, fit_dictionary, lcsa_code
from .data import Dataset, load_ucr, save_ucr, split, synth
from .forecast import ForecastModel, eval_forecaster, train_forecaster
from .numerics import grad_check, softmin_exp, softmin_lse, softsel
from .sigma import (
    SIGMA_MAX,
    SIGMA_MIN,
    SigmaNetParams,
    combine_sigma,
    free_sigma_grid,
    sigmanet_forward,
)
from .softdtw import sdtw_backward, sdtw_forward, sdtw_value, soft_alignment
from .udtw import (
    UdtwGrads,
    UdtwResult,
    free_sigma_mle,
    similarity_loss,
    udtw_eval,
    udtw_eval_brute,
    udtw_grad,
    udtw_pair,
    weighted_cost,
)

__all__ = [
    "BandInfeasibleError",
    "PathCapacityError",
    "PlanShape",
    "delannoy",
    "dtw_hard",
    "enumerate_paths",
    "path_cost",
    "path_indicator",
    "Barycenter",
    "BarycenterConfig",
    "frechet_mean",
    "interpolate_pair",
    "CentroidModel",
    "KnnConfig",
    "eval_split",
    "fit_centroids",
    "predict_centroid",
    "predict_knn",
    "Dictionary",
    "code_similarity",
    "dict_update",
    "fit_dictionary",
    "lcsa_code",
    "Dataset",
    "load_ucr",
    "save_ucr",
    "split",
    "synth",
    "ForecastModel",
    "eval_forecaster",
    "train_forecaster",
    "grad_check",
    "softmin_exp",
    "softmin_lse",
    "softsel",
    "SIGMA_MAX",
    "SIGMA_MIN",
    "SigmaNetParams",
    "combine_sigma",
    "free_sigma_grid",
    "sigmanet_forward",
    "sdtw_backward",
    "sdtw_forward",
    "sdtw_value",
    "soft_alignment",
    "UdtwGrads",
    "UdtwResult",
    "free_sigma_mle",
    "similarity_loss",
    "udtw_eval",
    "udtw_eval_brute",
    "udtw_grad",
    "udtw_pair",
    "weighted_cost",
]
