"""Standard normal tail numerics.

The separator machinery lives and dies by the upper tail
Phi_bar(t) = Pr{N(0,1) >= t}, across scales from 0.5 down to ~1e-340, so the
tail and its inverse are computed in both linear and log space.  The log form
uses erfc up to t = 36 and the continued asymptotic expansion beyond, where
erfc itself underflows.
"""

from __future__ import annotations

import math

__all__ = ["gaussian_tail", "gaussian_tail_inv", "log_gaussian_tail", "tail_sandwich"]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def gaussian_tail(t: float) -> float:
    """Pr{N(0,1) >= t}; exact 0.5 at t = 0, underflows to 0 only past t ~ 38.5."""
    return 0.5 * math.erfc(t / _SQRT2)


def log_gaussian_tail(t: float) -> float:
    """log Pr{N(0,1) >= t}, valid far past the erfc underflow point."""
    if t <= 36.0:
        return math.log(0.5) + math.log(math.erfc(t / _SQRT2))
    # Asymptotic series Phi_bar(t) = phi(t)/t * (1 - 1/t^2 + 3/t^4 - 15/t^6 + ...)
    inv2 = 1.0 / (t * t)
    series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)))
    return -0.5 * t * t - math.log(t) - _LOG_SQRT_2PI + math.log(series)


def gaussian_tail_inv(p: float) -> float:
    """t with Phi_bar(t) = p for p in (0,1); Newton on the log tail."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"tail probability must lie in (0,1), got {p!r}")
    if p == 0.5:
        return 0.0
    # Symmetric reduction keeps the Newton iteration on the decaying side.
    if p > 0.5:
        return -gaussian_tail_inv(1.0 - p)
    target = math.log(p)
    # Crude but monotone start: Phi_bar(t) <= exp(-t^2/2) for t >= 0.
    t = math.sqrt(max(-2.0 * target, 1.0))
    for _ in range(80):
        f = log_gaussian_tail(t) - target
        # d/dt log Phi_bar(t) = -phi(t)/Phi_bar(t)
        dlog = -math.exp(-0.5 * t * t - _LOG_SQRT_2PI - log_gaussian_tail(t))
        step = f / dlog
        t_next = t - step
        if t_next <= 0.0:
            t_next = t / 2.0
        if abs(t_next - t) <= 1e-15 * max(1.0, abs(t)):
            t = t_next
            break
        t = t_next
    return t


def tail_sandwich(t: float) -> tuple[float, float]:
    """Lower/upper bounds t/(sqrt(2 pi)(t^2+1)) e^{-t^2/2} < Phi_bar(t) < e^{-t^2/2}/(sqrt(2 pi) t), t > 0."""
    if t <= 0.0:
        raise ValueError("sandwich bounds require t > 0")
    core = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return core * t / (t * t + 1.0), core / t
