"""Histograms, entropy, multiplicity and the aesthetic measures.

Each pyramid level is treated as a population of "particles" (pixels)
occupying the energy levels 0..255. The two aesthetic measures are

* ``m_eq14``: the sum over the three levels of Shannon entropy in bits;
* ``m_eq15``: the sum over the three levels of entropy scaled to [0, 1]
  (divided by 8 bits) plus energy scaled to [0, 1] (divided by 255 * N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import EmptyHistogram, OutOfRange
from .imageio import GrayImage
from .levels import FORWARD, build_pyramid

N_LEVELS = 256
MAX_ENTROPY_BITS = 8.0
N_BINS = 150
MEASURES = ("eq14", "eq15")


@dataclass(frozen=True, eq=False)
class Histogram:
    """Occupation counts of the 256 energy levels."""

    counts: np.ndarray
    total: int
    energy: int

    @classmethod
    def from_counts(cls, counts) -> "Histogram":
        arr = np.zeros(N_LEVELS, dtype=np.int64)
        c = np.asarray(counts, dtype=np.int64)
        if c.ndim != 1 or c.size > N_LEVELS:
            raise ValueError(f"expected at most {N_LEVELS} counts, got shape {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        arr[:c.size] = c
        arr.setflags(write=False)
        total = int(arr.sum())
        energy = int(np.dot(np.arange(N_LEVELS, dtype=np.int64), arr))
        return cls(arr, total, energy)

    def nonzero(self) -> np.ndarray:
        return self.counts[self.counts > 0]

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))


def histogram(img: GrayImage) -> Histogram:
    return Histogram.from_counts(np.bincount(img.pixels.ravel(), minlength=N_LEVELS))


def _require_mass(h: Histogram) -> None:
    if h.total < 1:
        raise EmptyHistogram("histogram has no mass")


def shannon_entropy(h: Histogram) -> float:
    """Shannon entropy in bits; empty levels contribute nothing."""
    _require_mass(h)
    p = h.nonzero() / h.total
    return float(max(0.0, -np.sum(p * np.log2(p))))


def log_multiplicity_exact(h: Histogram) -> float:
    """ln(N! / prod n_i!) in nats, via log-gamma."""
    _require_mass(h)
    return math.lgamma(h.total + 1) - math.fsum(math.lgamma(int(n) + 1) for n in h.nonzero())


def log_multiplicity_stirling(h: Histogram) -> float:
    """N ln N - N - sum(n_i ln n_i - n_i) over occupied levels."""
    _require_mass(h)
    N = h.total
    terms = (int(n) * math.log(n) - int(n) for n in h.nonzero())
    return N * math.log(N) - N - math.fsum(terms)


def energy_bin(scaled_energy: Real) -> int:
    """Index of the energy group in 0..149 for a scaled energy in [0, 1].

    Accepts ``Fraction`` so callers holding exact integer energies can bin
    without floating-point edge effects.
    """
    if not 0 <= scaled_energy <= 1:
        raise OutOfRange(f"scaled energy {scaled_energy!r} outside [0, 1]")
    return min(math.floor(scaled_energy * N_BINS), N_BINS - 1)


@dataclass(frozen=True)
class LevelStats:
    entropy_bits: float
    energy: int
    entropy_scaled: float
    energy_scaled: float
    pixel_count: int

    def to_dict(self) -> dict:
        return {
            "entropy_bits": self.entropy_bits,
            "energy": self.energy,
            "entropy_scaled": self.entropy_scaled,
            "energy_scaled": self.energy_scaled,
            "pixel_count": self.pixel_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LevelStats":
        return cls(float(d["entropy_bits"]), int(d["energy"]), float(d["entropy_scaled"]),
                   float(d["energy_scaled"]), int(d["pixel_count"]))


def scale_stats(h: Histogram, entropy_bits: float) -> LevelStats:
    _require_mass(h)
    return LevelStats(
        entropy_bits=entropy_bits,
        energy=h.energy,
        entropy_scaled=entropy_bits / MAX_ENTROPY_BITS,
        energy_scaled=h.energy / (255 * h.total),
        pixel_count=h.total,
    )


@dataclass(frozen=True)
class AestheticScore:
    levels: tuple[LevelStats, LevelStats, LevelStats]
    m_eq14: float
    m_eq15: float
    l1_energy_bin: int

    def m(self, measure: str = "eq15") -> float:
        if measure == "eq14":
            return self.m_eq14
        if measure == "eq15":
            return self.m_eq15
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")

    @property
    def l1_energy(self) -> int:
        return self.levels[0].energy

    def to_dict(self) -> dict:
        return {
            "levels": [lv.to_dict() for lv in self.levels],
            "m_eq14": self.m_eq14,
            "m_eq15": self.m_eq15,
            "l1_energy_bin": self.l1_energy_bin,
        }


def score(img: GrayImage, operator: str = FORWARD) -> AestheticScore:
    """Score an image (at least 3x3) under both measures."""
    pyramid = build_pyramid(img, operator)
    hists = [histogram(level) for level in pyramid]
    stats = tuple(scale_stats(h, shannon_entropy(h)) for h in hists)
    m14 = sum(s.entropy_bits for s in stats)
    m15 = sum(s.entropy_scaled for s in stats) + sum(s.energy_scaled for s in stats)
    h1 = hists[0]
    return AestheticScore(
        levels=stats,
        m_eq14=m14,
        m_eq15=m15,
        l1_energy_bin=energy_bin(Fraction(h1.energy, 255 * h1.total)),
    )
