from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import logsumexp

from src.core import get_settings
from src.core.exceptions import EnumerationLimitError, InvalidParameterError
from src.logs import debug_logger, log_function, run_logger
from src.models.measure import ProbabilityMeasure, TabulatedLogWeights
from src.models.spin_glass import SkModel, SpinConfiguration, spins_matrix

settings = get_settings()


class SkOracle:
    """Log-weight oracle decoding 0-based state indices into spin configurations"""

    def __init__(self, model: SkModel):
        self.model = model

    @property
    def n_states(self) -> int:
        return self.model.n_states

    def log_weight(self, index: int) -> float:
        return float(self.log_weights(np.array([index]))[0])

    def log_weights(self, indices: np.ndarray) -> np.ndarray:
        return SpinGlassService.energies(self.model, spins_matrix(self.model.N, indices))


class SpinGlassService:
    """Sherrington-Kirkpatrick target: couplings, log-weights, exact enumeration"""

    @staticmethod
    def sample_couplings(N: int, seed: int) -> np.ndarray:
        """IID standard normal upper triangle (with diagonal) mirrored to the lower one"""
        if N < 1:
            raise InvalidParameterError(f"spin count must be positive, got {N}")
        draws = np.random.default_rng(seed).standard_normal((N, N))
        upper = np.triu(draws)
        return upper + np.triu(draws, 1).T

    @staticmethod
    def build_model(N: int, beta: float, seed: int) -> SkModel:
        debug_logger.debug(f"SK model: N={N}, beta={beta}, seed={seed}")
        return SkModel(SpinGlassService.sample_couplings(N, seed), beta)

    @staticmethod
    def energies(model: SkModel, spins: np.ndarray) -> np.ndarray:
        """-(beta / sqrt N) s^T J s for each row of spins, all ordered pairs j, k"""
        spins = np.atleast_2d(np.asarray(spins, dtype=float))
        quadratic = np.einsum("ij,jk,ik->i", spins, model.couplings, spins)
        return -(model.beta / np.sqrt(model.N)) * quadratic

    @staticmethod
    def log_weight(model: SkModel, configuration: SpinConfiguration) -> float:
        if configuration.N != model.N:
            raise InvalidParameterError(f"configuration has {configuration.N} spins, model {model.N}")
        return float(SpinGlassService.energies(model, configuration.as_array())[0])

    @staticmethod
    def _check_enumerable(model: SkModel, limit: int) -> None:
        if model.N > limit:
            raise EnumerationLimitError(
                f"exact enumeration of {model.N} spins exceeds the limit of {limit}",
                {"spins": model.N, "limit": limit},
            )

    @staticmethod
    def log_weight_table(model: SkModel) -> np.ndarray:
        SpinGlassService._check_enumerable(model, settings.MAX_ENUMERATED_SPINS)
        states = np.arange(model.n_states)
        return SpinGlassService.energies(model, spins_matrix(model.N, states))

    @staticmethod
    def tabulated_oracle(model: SkModel) -> TabulatedLogWeights:
        return TabulatedLogWeights(SpinGlassService.log_weight_table(model))

    @staticmethod
    @log_function()
    def exact_distribution(model: SkModel) -> ProbabilityMeasure:
        """Normalized weights over all 2^N configurations (index order)"""
        table = SpinGlassService.log_weight_table(model)
        weights = np.exp(table - logsumexp(table))
        return ProbabilityMeasure(weights / weights.sum())

    @staticmethod
    def save_couplings(path: Union[str, Path], couplings: np.ndarray) -> Path:
        path = Path(path)
        np.savetxt(path, np.atleast_2d(couplings), fmt="%.17g")
        run_logger.info(f"Couplings saved to {path}")
        return path

    @staticmethod
    def load_couplings(path: Union[str, Path]) -> np.ndarray:
        couplings = np.loadtxt(Path(path), ndmin=2)
        if couplings.shape[0] != couplings.shape[1]:
            raise InvalidParameterError(f"coupling file {path} is not square: {couplings.shape}")
        if not np.array_equal(couplings, couplings.T):
            raise InvalidParameterError(f"coupling file {path} is not symmetric")
        return couplings
