"""ALS matrix-factorization recommender system."""

from .engine import AlsRecommender, Hyperparams, ModelParams
from .sparse import CsrMatrix

__all__ = ["AlsRecommender", "Hyperparams", "ModelParams", "CsrMatrix"]

__version__ = "0.1.0"
