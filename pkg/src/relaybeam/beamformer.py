"""Closed-form maximum-SINR relay weights for a given relay selection.

Covariances are built from the per-relay effective channel of each source,
``conj(alpha * f_k * g)``. With that convention ``w^H R_k w`` equals the power
that source k actually delivers through ``z = sum_m g_m w_m x_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, complex_gaussian
from .linalg import (
    CholeskyFactor,
    EigenPair,
    RankOne,
    cholesky,
    dominant_eigenpair,
)

RELAY_NOISE_MODELS = ("independent", "coherent")


@dataclass(frozen=True)
class CovarianceModel:
    """How the second-order statistics fed to the solver are obtained.

    ``exact`` conditions on the known instantaneous channels, giving rank-one
    signal covariances. ``estimated`` averages ``n_snapshots`` noisy snapshots
    of each effective channel vector.

    ``relay_noise`` selects the relay-noise covariance ``Q``: ``independent``
    uses ``sigma^2 diag(|g|^2)`` (noise drawn separately at every relay, as in
    the simulated transmission), ``coherent`` uses ``sigma^2 g g^H``.
    """

    kind: str = "exact"
    n_snapshots: int = 0
    relay_noise: str = "independent"

    def __post_init__(self):
        if self.kind not in ("exact", "estimated"):
            raise ValueError(f"unknown covariance mode {self.kind!r}")
        if self.kind == "estimated" and self.n_snapshots < 1:
            raise ValueError(f"n_snapshots must be >= 1, got {self.n_snapshots}")
        if self.relay_noise not in RELAY_NOISE_MODELS:
            raise ValueError(f"relay_noise must be one of {RELAY_NOISE_MODELS}")

    @classmethod
    def parse(cls, text: str, relay_noise: str = "independent") -> "CovarianceModel":
        """Parse ``exact`` or ``estimated:N``."""
        text = str(text).strip()
        if text == "exact":
            return cls("exact", 0, relay_noise)
        head, _, n = text.partition(":")
        if head == "estimated" and n:
            return cls("estimated", int(n), relay_noise)
        raise ValueError(f"mode must be 'exact' or 'estimated:N', got {text!r}")

    @property
    def estimated(self) -> bool:
        return self.kind == "estimated"

    def __str__(self):
        return "exact" if self.kind == "exact" else f"estimated:{self.n_snapshots}"


EXACT = CovarianceModel()


@dataclass(frozen=True)
class CovarianceSet:
    r1: np.ndarray
    rk: tuple
    q: np.ndarray
    d: np.ndarray
    # sqrt(P_1) * conj(alpha * f_1 * g) when r1 is known to be its outer product
    r1_vector: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def restrict(self, idx) -> "CovarianceSet":
        """Principal sub-block on the relay indices ``idx``."""
        ix = np.ix_(idx, idx)
        return CovarianceSet(
            self.r1[ix],
            tuple(r[ix] for r in self.rk),
            self.q[ix],
            self.d[idx],
            None if self.r1_vector is None else self.r1_vector[idx],
        )


@dataclass(frozen=True)
class BeamformingSolution:
    w_tilde: np.ndarray
    sinr: float
    mask: np.ndarray
    solver_calls: int = 1
    eigen: EigenPair | None = field(default=None, repr=False, compare=False)


def as_mask(mask, M: int | None = None) -> np.ndarray:
    a = np.asarray(mask)
    if a.ndim != 1 or (M is not None and a.shape[0] != M):
        raise ValueError(f"mask must be a length-{M} vector, got shape {a.shape}")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("mask entries must be 0 or 1")
    return a.astype(np.int8)


def _kernels(ch: ChannelRealization, idx, p) -> list[np.ndarray]:
    """Scaled effective channels sqrt(P_k) * conj(f_k * g) on the support."""
    fg = ch.f[idx, :] * ch.g[idx, None]
    return [np.sqrt(p[k]) * np.conj(fg[:, k]) for k in range(ch.K)]


def _tx_power_diag(ch: ChannelRealization, idx, p, sigma_n2: float) -> np.ndarray:
    return (np.abs(ch.f[idx, :]) ** 2) @ np.asarray(p, dtype=float) + sigma_n2


def _support_covariances(ch, idx, p, sigma_n2, model, rng=None) -> CovarianceSet:
    kern = _kernels(ch, idx, p)
    noise_kern = np.sqrt(sigma_n2) * np.conj(ch.g[idx])
    d = _tx_power_diag(ch, idx, p, sigma_n2)

    if not model.estimated:
        covs = [np.outer(v, v.conj()) for v in kern]
        if model.relay_noise == "coherent":
            q = np.outer(noise_kern, noise_kern.conj())
        else:
            q = np.diag(np.abs(noise_kern) ** 2).astype(complex)
        return CovarianceSet(covs[0], tuple(covs[1:]), q, d, kern[0])

    if rng is None:
        raise ValueError("estimated covariances need a random stream")
    n = model.n_snapshots
    s = len(idx)
    perturb_var = sigma_n2 / n

    def sample_cov(v):
        x = v[None, :] + complex_gaussian(rng, (n, s), perturb_var)
        return (x.T @ x.conj()) / n

    covs = [sample_cov(v) for v in kern]
    if model.relay_noise == "coherent":
        q = sample_cov(noise_kern)
    else:
        x = noise_kern[None, :] + complex_gaussian(rng, (n, s), perturb_var)
        q = np.diag(np.mean(np.abs(x) ** 2, axis=0)).astype(complex)
    return CovarianceSet(covs[0], tuple(covs[1:]), q, d, None)


def _scatter(cov: CovarianceSet, idx, M: int, sigma_n2: float) -> CovarianceSet:
    def full(a):
        out = np.zeros((M, M), dtype=complex)
        out[np.ix_(idx, idx)] = a
        return out

    d = np.full(M, float(sigma_n2))
    d[idx] = cov.d
    vec = None
    if cov.r1_vector is not None:
        vec = np.zeros(M, dtype=complex)
        vec[idx] = cov.r1_vector
    return CovarianceSet(full(cov.r1), tuple(full(r) for r in cov.rk), full(cov.q), d, vec)


def exact_covariances(ch, mask, p, sigma_n2, relay_noise: str = "independent") -> CovarianceSet:
    """Covariances conditioned on the known channels (rank-one signal terms)."""
    mask = as_mask(mask, ch.M)
    idx = np.flatnonzero(mask)
    model = CovarianceModel("exact", 0, relay_noise)
    return _scatter(_support_covariances(ch, idx, p, sigma_n2, model), idx, ch.M, sigma_n2)


def estimated_covariances(
    ch, mask, p, sigma_n2, n_snapshots: int, rng, relay_noise: str = "independent"
) -> CovarianceSet:
    """Sample covariances from ``n_snapshots`` noisy copies of each masked vector.

    Each snapshot adds CN(0, sigma_n2 / n_snapshots) to every active entry, so
    the estimate is biased by ``(sigma_n2 / n) I`` on the support and exact
    zeros elsewhere.
    """
    if n_snapshots < 1:
        raise ValueError(f"n_snapshots must be >= 1, got {n_snapshots}")
    mask = as_mask(mask, ch.M)
    idx = np.flatnonzero(mask)
    model = CovarianceModel("estimated", n_snapshots, relay_noise)
    cov = _support_covariances(ch, idx, p, sigma_n2, model, rng)
    return _scatter(cov, idx, ch.M, sigma_n2)


def build_e(cov: CovarianceSet, p_t: float, sigma_n2: float):
    """Split ``E = A^{-1} B`` into the Cholesky factor of ``A`` and ``B``.

    ``A = sigma^2 I + P_T D^{-1/2} (Q + sum R_k) D^{-1/2}`` and
    ``B = D^{-1/2} R_1 D^{-1/2}``. ``B`` comes back as a :class:`RankOne` when
    the desired-signal covariance is known to be an outer product.
    """
    if np.any(cov.d <= 0):
        raise ValueError("D must have a positive diagonal")
    s = 1.0 / np.sqrt(cov.d)
    interference = cov.q + sum(cov.rk, np.zeros_like(cov.q))
    a = p_t * (s[:, None] * interference * s[None, :])
    a = 0.5 * (a + a.conj().T)
    a[np.diag_indices_from(a)] += sigma_n2
    factor: CholeskyFactor = cholesky(a)
    if cov.r1_vector is not None:
        b = RankOne(s * cov.r1_vector)
    else:
        b = s[:, None] * cov.r1 * s[None, :]
        b = 0.5 * (b + b.conj().T)
    return factor, b


def msinr_solve(
    ch: ChannelRealization,
    mask,
    p,
    p_t: float,
    sigma_n2: float,
    model: CovarianceModel = EXACT,
    rng: np.random.Generator | None = None,
) -> BeamformingSolution:
    """Maximum-SINR weights on the selected relays under total power ``p_t``.

    Returns ``w = sqrt(P_T) D^{-1/2} v`` where ``v`` is the unit principal
    eigenvector of ``E`` (largest entry real positive) and the design SINR
    ``P_T * lambda_max(E)``. Deselected relays get exactly zero weight.
    In estimated mode ``rng`` supplies the snapshot noise.
    """
    mask = as_mask(mask, ch.M)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("at least one relay must be selected")
    cov = _support_covariances(ch, idx, p, sigma_n2, model, rng)
    factor, b = build_e(cov, p_t, sigma_n2)
    pair = dominant_eigenpair(factor, b)
    w = np.zeros(ch.M, dtype=complex)
    w[idx] = np.sqrt(p_t) * pair.vector / np.sqrt(cov.d)
    return BeamformingSolution(w, p_t * pair.value, mask, 1, pair)


def transmit_power(ch, w_tilde, p, sigma_n2, mask) -> float:
    """Total relay transmit power ``w^H D w``."""
    mask = as_mask(mask, ch.M)
    idx = np.flatnonzero(mask)
    d = _tx_power_diag(ch, idx, p, sigma_n2)
    return float(np.sum(d * np.abs(np.asarray(w_tilde)[idx]) ** 2))


def signal_terms(ch, w_tilde, p):
    """Per-source complex amplitudes ``sqrt(P_k) sum_m w_m g_m f_mk`` at the destination."""
    return np.sqrt(np.asarray(p, dtype=float)) * ((np.asarray(w_tilde) * ch.g) @ ch.f)


def evaluate_sinr(
    ch, w_tilde, p, sigma_n2, mask, relay_noise: str = "independent"
) -> float:
    """SINR of given weights on the true channels, summed term by term.

    Desired power over destination noise plus interferer powers plus the
    relay noise carried through the weights. Weights on deselected relays
    must be exactly zero.
    """
    mask = as_mask(mask, ch.M)
    w = np.asarray(w_tilde, dtype=complex)
    if w.shape != (ch.M,):
        raise ValueError(f"weights must have length {ch.M}")
    if np.any(w[mask == 0] != 0):
        raise ValueError("nonzero weight on a deselected relay")
    amp = signal_terms(ch, w, p)
    wg = w * ch.g
    if relay_noise == "coherent":
        relay = sigma_n2 * abs(np.sum(wg)) ** 2
    else:
        relay = sigma_n2 * float(np.sum(np.abs(wg) ** 2))
    interference = float(np.sum(np.abs(amp[1:]) ** 2))
    return float(abs(amp[0]) ** 2 / (sigma_n2 + interference + relay))
