"""Channel generation: Rayleigh fading with path loss and log-normal shadowing."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np


class ConfigError(ValueError):
    """A configuration value violates its invariant."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    K: int = 3
    M: int = 8
    M_min: int = 3
    snr_db: float = 10.0
    inr_db: float = 10.0
    p_t_dbw: float = 1.0
    rho: float = 2.0
    l_db: float = 10.0
    sigma_s_db: float = 3.0
    distance: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("K", f"must be an integer >= 1, got {self.K}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M", f"must be an integer >= 1, got {self.M}")
        if int(self.M_min) != self.M_min or not 1 <= self.M_min <= self.M:
            raise ConfigError("M_min", f"must satisfy 1 <= M_min <= M (M={self.M}), got {self.M_min}")
        if not self.sigma_s_db >= 0:
            raise ConfigError("sigma_s_db", f"must be >= 0, got {self.sigma_s_db}")
        if not self.distance > 0:
            raise ConfigError("distance", f"must be > 0, got {self.distance}")
        if not self.noise_variance > 0:
            raise ConfigError("noise_variance", f"must be > 0, got {self.noise_variance}")
        for name in ("snr_db", "inr_db", "p_t_dbw", "l_db", "rho"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if not 2.0 <= self.rho <= 5.0:
            warnings.warn(f"path-loss exponent rho={self.rho} outside the usual [2, 5]", stacklevel=3)

    @property
    def p_t(self) -> float:
        """Total relay power in linear units."""
        return db_to_linear(self.p_t_dbw)

    def replace(self, **changes) -> "NetworkConfig":
        return NetworkConfig(**{**asdict(self), **changes})

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def source_powers(cfg: NetworkConfig) -> np.ndarray:
    """Per-source transmit powers: desired at SNR, each interferer at INR."""
    p = np.full(cfg.K, cfg.noise_variance * db_to_linear(cfg.inr_db))
    p[0] = cfg.noise_variance * db_to_linear(cfg.snr_db)
    return p


@dataclass(frozen=True)
class ChannelRealization:
    f: np.ndarray   # (M, K) source -> relay
    g: np.ndarray   # (M,)  relay -> destination
    gamma: float
    beta: float
    f0: np.ndarray
    g0: np.ndarray

    @property
    def M(self) -> int:
        return self.g.shape[0]

    @property
    def K(self) -> int:
        return self.f.shape[1]

    @classmethod
    def from_small_scale(cls, f0, g0, gamma: float = 1.0, beta: float = 1.0):
        f0 = np.asarray(f0, dtype=complex)
        g0 = np.asarray(g0, dtype=complex)
        if f0.ndim == 1:
            f0 = f0[:, None]
        if f0.shape[0] != g0.shape[0]:
            raise ValueError(f"f has {f0.shape[0]} relays but g has {g0.shape[0]}")
        scale = gamma * beta
        return cls(scale * f0, scale * g0, gamma, beta, f0, g0)


def path_loss(l_db: float, d: float, rho: float) -> float:
    """Distance-based amplitude attenuation ``sqrt(L) / sqrt(d**rho)``, L in dB."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return float(np.sqrt(db_to_linear(l_db)) / np.sqrt(d ** rho))


def shadowing_draw(sigma_s_db: float, rng: np.random.Generator) -> float:
    """Log-normal shadowing gain ``10**(sigma_s * n / 10)`` with n ~ N(0, 1)."""
    if sigma_s_db < 0:
        raise ValueError(f"shadowing spread must be >= 0, got {sigma_s_db}")
    return float(10.0 ** (sigma_s_db * rng.standard_normal() / 10.0))


def complex_gaussian(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples CN(0, variance)."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def draw_channels(cfg: NetworkConfig, rng: np.random.Generator) -> ChannelRealization:
    f0 = complex_gaussian(rng, (cfg.M, cfg.K))
    g0 = complex_gaussian(rng, cfg.M)
    gamma = path_loss(cfg.l_db, cfg.distance, cfg.rho)
    beta = shadowing_draw(cfg.sigma_s_db, rng)
    return ChannelRealization.from_small_scale(f0, g0, gamma, beta)
