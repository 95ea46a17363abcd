"""Orthogonal separators with buffers over a finite set of unit vectors.

One draw projects every vector onto a shared Gaussian direction g and slices
the projection line at t, t - eps', t - 2 eps':

    X = {g_u >= t}     Y = {t - eps' < g_u < t}     Z = {t - 2 eps' < g_u <= t - eps'}

with eps' = eps / (e (t + 1/t)).  Boundary convention (fixed once so draws are
reproducible): g_u = t lands in X, g_u = t - eps' lands in Z.

calibrate() picks the smallest threshold t whose exact joint-tail condition

    Phi_bar(t / sqrt(1 - R^2/4)) <= Phi_bar(t) / m

holds; that inequality is precisely what bounds the probability of two
R-separated vectors landing in X together, so no loose tail constants enter.
The measured variants rerun a one-buffer draw and reject it outright (empty
sets) unless min over u in X of mu(X minus Ball(u, R)) <= delta mu(U), which
makes their separation property hold on every returned draw by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import gaussian_tail, gaussian_tail_inv, log_gaussian_tail
from .rng import RandomStream

__all__ = [
    "SeparatorParams",
    "SeparatorSample",
    "CalibrationError",
    "calibrate",
    "practical_params",
    "sample_one_buffer",
    "sample_measured",
    "sample_two_buffers",
    "project",
    "classify",
]

T_MAX = 40.0


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SeparatorParams:
    """Threshold geometry of one separator family."""

    epsilon: float
    m: float
    r: float
    t: float
    alpha: float            # Phi_bar(t); may underflow for extreme t, see log_alpha
    log_alpha: float
    eps_prime: float        # buffer width eps / (e (t + 1/t))
    distortion_budget: float  # nominal (1/eps) log m scale, diagnostic only
    calibrated: bool        # True when the joint-tail certificate holds at (t, m, r)

    def certificate_margin(self) -> float:
        """log Phi_bar(t) - log m - log Phi_bar(rho t); >= 0 iff the certificate holds."""
        rho = 1.0 / math.sqrt(1.0 - self.r * self.r / 4.0)
        return log_gaussian_tail(self.t) - math.log(self.m) - log_gaussian_tail(rho * self.t)


def _params_at(t: float, epsilon: float, m: float, r: float, calibrated: bool) -> SeparatorParams:
    eps_prime = epsilon / (math.e * (t + 1.0 / t))
    if eps_prime >= t:
        raise CalibrationError(f"buffer width {eps_prime} >= threshold {t}")
    return SeparatorParams(
        epsilon=float(epsilon), m=float(m), r=float(r), t=float(t),
        alpha=gaussian_tail(t), log_alpha=log_gaussian_tail(t),
        eps_prime=eps_prime,
        distortion_budget=(math.log(m) / epsilon) if epsilon > 0 else math.inf,
        calibrated=calibrated)


def calibrate(epsilon: float, m: float, r: float) -> SeparatorParams:
    """Smallest t with Phi_bar(t / sqrt(1 - r^2/4)) <= Phi_bar(t)/m, by bisection."""
    if not 0.0 <= epsilon < 1.0:
        raise CalibrationError(f"epsilon must lie in [0,1), got {epsilon}")
    if m < 3.0:
        raise CalibrationError(f"separation strength m must be >= 3, got {m}")
    if not 0.0 < r < 2.0:
        raise CalibrationError(f"separation radius must lie in (0,2), got {r}")
    rho = 1.0 / math.sqrt(1.0 - r * r / 4.0)

    def excess(t: float) -> float:
        # <= 0 exactly when the joint-tail condition holds at t.
        return log_gaussian_tail(rho * t) - (log_gaussian_tail(t) - math.log(m))

    lo, hi = 1e-8, T_MAX
    if excess(hi) > 0.0:
        raise CalibrationError(
            f"no threshold below t={T_MAX} satisfies the joint-tail condition "
            f"(m={m}, r={r}); the required probability scale is not representable")
    if excess(lo) <= 0.0:
        hi = lo
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if excess(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-13 * max(1.0, hi):
                break
    return _params_at(hi, epsilon, m, r, calibrated=True)


def practical_params(epsilon: float, m: float, r: float, alpha: float) -> SeparatorParams:
    """Separator thresholds at a caller-chosen probability scale.

    Used when the certified scale from calibrate() is too small to ever fire
    at the given sample budget.  The min-ball rejection in the measured
    variants still enforces their separation condition on every draw; only
    the tail certificate is waived (calibrated=False).
    """
    if not 0.0 < alpha < 0.5:
        raise CalibrationError(f"probability scale must lie in (0, 0.5), got {alpha}")
    return _params_at(gaussian_tail_inv(alpha), epsilon, m, r, calibrated=False)


@dataclass(frozen=True)
class SeparatorSample:
    x: np.ndarray           # indices into the vector list
    y: np.ndarray
    z: np.ndarray
    gaussian_seed: str      # label of the stream that produced the draw
    rejected: bool = False  # measured variants: True when the min-ball test emptied the draw

    def is_empty(self) -> bool:
        return self.x.size == 0 and self.y.size == 0 and self.z.size == 0


def _check_unit(vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ValueError("vectors must be a (count, dim) array")
    norms = np.linalg.norm(vectors, axis=1)
    off = np.abs(norms - 1.0)
    if off.size and off.max() > 1e-9:
        raise ValueError(f"input vectors must be unit norm within 1e-9 (max deviation {off.max():.3e})")
    return vectors


def project(vectors: np.ndarray, stream: RandomStream) -> np.ndarray:
    """One shared Gaussian direction; returns the per-vector projections."""
    g = stream.normals(vectors.shape[1])
    return vectors @ g


def classify(proj: np.ndarray, p: SeparatorParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Interval membership for one draw of projections."""
    x = proj >= p.t
    y = (proj > p.t - p.eps_prime) & (proj < p.t)
    z = (proj > p.t - 2.0 * p.eps_prime) & (proj <= p.t - p.eps_prime)
    return x, y, z


def sample_one_buffer(vectors: np.ndarray, p: SeparatorParams,
                      stream: RandomStream) -> SeparatorSample:
    """One draw of the one-buffer separator (z stays empty)."""
    vectors = _check_unit(vectors)
    proj = project(vectors, stream)
    x, y, _ = classify(proj, p)
    return SeparatorSample(x=np.flatnonzero(x), y=np.flatnonzero(y),
                           z=np.empty(0, dtype=np.int64), gaussian_seed=stream.label)


def _min_ball_leftover(vectors: np.ndarray, measures: np.ndarray,
                       x_idx: np.ndarray, r: float) -> float:
    """min over u in X of mu(X minus Ball(u, r)) in the psi metric."""
    pts = vectors[x_idx]
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    outside = (d > r) * measures[x_idx][None, :]
    return float(outside.sum(axis=1).min())


def _measured_draw(vectors: np.ndarray, measures: np.ndarray, epsilon: float,
                   delta: float, r: float, stream: RandomStream,
                   params: SeparatorParams | None, two_buffers: bool) -> SeparatorSample:
    if delta <= 0.0 or delta > 2.0 / 3.0:
        raise ValueError(f"measured separators need delta in (0, 2/3], got {delta}")
    measures = np.asarray(measures, dtype=np.float64)
    if np.any(measures < 0.0):
        raise ValueError("measures must be nonnegative")
    vectors = _check_unit(vectors)
    if measures.shape[0] != vectors.shape[0]:
        raise ValueError("need one measure per vector")
    p = params if params is not None else calibrate(epsilon, 2.0 / delta, r)
    proj = project(vectors, stream)
    x, y, z = classify(proj, p)
    if not two_buffers:
        z[:] = False
    x_idx = np.flatnonzero(x)
    if x_idx.size:
        leftover = _min_ball_leftover(vectors, measures, x_idx, r)
        if leftover > delta * float(measures.sum()):
            empty = np.empty(0, dtype=np.int64)
            return SeparatorSample(x=empty, y=empty, z=empty,
                                   gaussian_seed=stream.label, rejected=True)
    return SeparatorSample(x=x_idx, y=np.flatnonzero(y), z=np.flatnonzero(z),
                           gaussian_seed=stream.label)


def sample_measured(vectors: np.ndarray, measures: np.ndarray, epsilon: float,
                    delta: float, r: float, stream: RandomStream,
                    params: SeparatorParams | None = None) -> SeparatorSample:
    """Measure-constrained separator: empty unless the min-ball condition holds."""
    return _measured_draw(vectors, measures, epsilon, delta, r, stream, params,
                          two_buffers=False)


def sample_two_buffers(vectors: np.ndarray, measures: np.ndarray, epsilon: float,
                       delta: float, r: float, stream: RandomStream,
                       params: SeparatorParams | None = None) -> SeparatorSample:
    """Measure-constrained separator with both buffer layers Y and Z."""
    return _measured_draw(vectors, measures, epsilon, delta, r, stream, params,
                          two_buffers=True)
