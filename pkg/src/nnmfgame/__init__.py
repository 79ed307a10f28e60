"""Game-theoretic non-negative matrix factorization, NNMF baselines and EigenGame PCA."""

__version__ = "0.1.0"

from .core import (ArgumentError, DivergedError, ShapeError, clamp_nonneg, make_rng,  # noqa: E402
                   matmul, rand_uniform, read_mat, reconstruction_error, relative_error,
                   write_mat)
from .datagen import SyntheticDataset, make_synthetic, smooth_rows  # noqa: E402
from .baselines import Factorization, FitTrace, mu_fit, nals_fit, pg_fit  # noqa: E402
from .game import GameConfig, game_fit  # noqa: E402
from .eigengame import eigengame_fit, exact_pca, project_rows  # noqa: E402
