"""Constrained maximum entropy and Maxwell-Boltzmann densities/fits.

``solve_maxent`` maximises the entropy of real-valued occupations subject to
a fixed particle count and a fixed total energy. The maximiser has the form
n_i = exp(-alpha - beta * e_i); beta is found by bisection on the mean-energy
function, which is strictly decreasing in beta.

The physical constants of the Maxwell-Boltzmann law only enter through
b = m / (2 k T), so densities and fits are parameterised by ``b`` alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateEnergy, DegenerateFit, EmptyHistogram, TooFewLevels
from .measures import Histogram


@dataclass(frozen=True)
class MaxEntProblem:
    levels: tuple[float, ...]
    total_count: float
    total_energy: float

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 2:
            raise TooFewLevels(f"need at least 2 energy levels, got {len(levels)}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("energy levels must be strictly increasing")
        if not self.total_count > 0:
            raise ValueError("total_count must be positive")
        lo, hi = levels[0] * self.total_count, levels[-1] * self.total_count
        if not lo < self.total_energy < hi:
            raise DegenerateEnergy(
                f"total energy {self.total_energy} not strictly inside ({lo}, {hi})")

    @property
    def mean_energy(self) -> float:
        return self.total_energy / self.total_count


@dataclass(frozen=True)
class MaxEntSolution:
    occupations: np.ndarray
    alpha: float
    beta: float

    def to_dict(self, levels: Sequence[float]) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "levels": [float(e) for e in levels],
            "occupations": [float(n) for n in self.occupations],
        }


def _log_partition(levels: np.ndarray, beta: float) -> float:
    x = -beta * levels
    top = x.max()
    return float(top + math.log(np.exp(x - top).sum()))


def mean_energy(levels: Sequence[float], beta: float) -> float:
    """sum(e exp(-beta e)) / sum(exp(-beta e)), evaluated without overflow."""
    eps = np.asarray(levels, dtype=float)
    x = -beta * eps
    w = np.exp(x - x.max())
    return float(np.dot(eps, w) / w.sum())


def solve_maxent(problem: MaxEntProblem, max_iter: int = 2000) -> MaxEntSolution:
    eps = np.asarray(problem.levels, dtype=float)
    target = problem.mean_energy
    # stop on whichever is tighter: 1e-12 of the level span on the mean, or
    # the total-energy tolerance 1e-9 * max(1, |E|) spread over N particles
    tol = min(1e-12 * (eps[-1] - eps[0]),
              0.5e-9 * max(1.0, abs(problem.total_energy)) / problem.total_count)

    def g(b):
        return mean_energy(eps, b)

    bound = 1.0
    while not (g(-bound) >= target >= g(bound)):
        bound *= 2.0
        if bound > 1e300:
            raise DegenerateEnergy("could not bracket beta; energy too close to a bound")

    lo, hi = -bound, bound
    beta = 0.0
    for _ in range(max_iter):
        beta = 0.5 * (lo + hi)
        diff = g(beta) - target
        if abs(diff) <= tol or beta in (lo, hi):
            break
        # g is decreasing: too much energy means beta must grow
        if diff > 0:
            lo = beta
        else:
            hi = beta

    alpha = _log_partition(eps, beta) - math.log(problem.total_count)
    occupations = np.exp(-alpha - beta * eps)
    return MaxEntSolution(occupations=occupations, alpha=alpha, beta=beta)


def mb_pdf_2d(v, b: float):
    """2 b v exp(-b v^2); integrates to 1 over v >= 0."""
    v = np.asarray(v, dtype=float)
    out = 2.0 * b * v * np.exp(-b * v * v)
    return float(out) if out.ndim == 0 else out


def mb_pdf_3d(v, b: float):
    """(b / pi)^(3/2) 4 pi v^2 exp(-b v^2); integrates to 1 over v >= 0."""
    v = np.asarray(v, dtype=float)
    out = (b / math.pi) ** 1.5 * 4.0 * math.pi * v * v * np.exp(-b * v * v)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MBFit:
    amplitude: float
    shape: float
    r_squared: float
    residual_norm: float
    weighted: bool = False

    def model(self, v):
        """Fitted curve C v exp(-b v^2)."""
        v = np.asarray(v, dtype=float)
        return self.amplitude * v * np.exp(-self.shape * v * v)

    @property
    def mode(self) -> float:
        return 1.0 / math.sqrt(2.0 * self.shape)

    def to_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "shape": self.shape,
            "r_squared": self.r_squared,
            "residual_norm": self.residual_norm,
            "weighted": self.weighted,
        }


def _profile_amplitude(y, w, basis):
    denom = float(np.dot(w * basis, basis))
    if denom <= 0.0:
        return 0.0
    return float(np.dot(w * basis, y) / denom)


def fit_mb(h: Histogram, poisson: bool = False, max_iter: int = 500) -> MBFit:
    """Least-squares fit of C i exp(-b i^2) to the histogram counts.

    A log-spaced grid over ``b`` (with C profiled out) picks the starting
    point, then damped Gauss-Newton on (C, b) refines until the relative
    step drops below 1e-10. ``poisson=True`` weights each bin by
    1 / max(count, 1).
    """
    if h.total < 1:
        raise EmptyHistogram("histogram has no mass")
    y = h.counts.astype(float)
    if np.count_nonzero(y) < 3 or np.count_nonzero(y[1:]) == 0:
        raise DegenerateFit("need at least three occupied bins away from zero")

    v = np.arange(y.size, dtype=float)
    w = 1.0 / np.maximum(y, 1.0) if poisson else np.ones_like(y)

    def sse(C, b):
        r = y - C * v * np.exp(-b * v * v)
        return float(np.dot(w * r, r))

    best = None
    for b in np.logspace(-8, 1, 451):
        C = _profile_amplitude(y, w, v * np.exp(-b * v * v))
        s = sse(C, b)
        if best is None or s < best[0]:
            best = (s, C, float(b))
    cur, C, b = best

    for _ in range(max_iter):
        e = np.exp(-b * v * v)
        f = C * v * e
        r = y - f
        J = np.column_stack((v * e, -C * v ** 3 * e))
        sw = np.sqrt(w)
        step, *_ = np.linalg.lstsq(J * sw[:, None], r * sw, rcond=None)
        lam = 1.0
        accepted = False
        while lam > 1e-12:
            C_new, b_new = C + lam * step[0], b + lam * step[1]
            if b_new > 0:
                s_new = sse(C_new, b_new)
                if s_new <= cur:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        rel = max(abs(C_new - C) / max(abs(C), 1e-300), abs(b_new - b) / b)
        C, b, cur = C_new, b_new, s_new
        if rel < 1e-10:
            break

    ybar = float(np.dot(w, y) / w.sum())
    tss = float(np.dot(w * (y - ybar), y - ybar))
    r2 = 1.0 - cur / tss if tss > 0 else 0.0
    if C <= 0 or b <= 0:
        raise DegenerateFit(f"fit did not converge to a positive curve (C={C}, b={b})")
    return MBFit(amplitude=float(C), shape=float(b), r_squared=float(r2),
                 residual_norm=math.sqrt(cur),
                 weighted=poisson)
