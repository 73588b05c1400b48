"""Generate-and-filter search over random patterns.

Candidates are drawn independently from a pattern generator, scored, and
assigned to one of 150 groups by the scaled energy of their first level.
A candidate replaces the incumbent of its group only if its M is strictly
larger, so the first image to reach a given M keeps its slot.

Sequential runs are bit-for-bit reproducible from the seed. With
``workers > 1`` candidates are produced in independently seeded chunks and
merged as chunks finish: the per-group elitism still holds, but which of two
equal-M candidates wins, and the recorded ``found_at`` indices, may differ
from a sequential run.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import CorruptArchive, DataError
from .imageio import GrayImage, load_image, save_image
from .measures import MEASURES, N_BINS, AestheticScore, energy_bin, score

__all__ = [
    "KINDS", "N_BINS", "GeneratorConfig", "Slot", "EnergyBinnedArchive",
    "energy_bin", "propose", "evolve", "top_groups", "save_archive", "load_archive",
]

KINDS = ("uniform_noise", "block_mosaic", "symmetric_tile")
ARCHIVE_VERSION = 1
ARCHIVE_FILE = "archive.json"
# tolerance when checking persisted M values against a re-score
RESCORE_TOL = 1e-12


@dataclass(frozen=True)
class GeneratorConfig:
    width: int = 64
    height: int = 64
    generator_kind: str = "block_mosaic"
    seed: int = 0
    iterations: int = 1000
    measure: str = "eq15"

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ValueError(f"canvas must be at least 3x3, got {self.width}x{self.height}")
        if self.generator_kind not in KINDS:
            raise ValueError(f"unknown generator {self.generator_kind!r}; expected one of {KINDS}")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}; expected one of {MEASURES}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def _mosaic(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    # rows of random height, each cut into cells of random width
    canvas = np.empty((height, width), dtype=np.uint8)
    max_h = max(2, height // 2)
    max_w = max(2, width // 2)
    y = 0
    while y < height:
        rh = int(rng.integers(2, max_h + 1))
        x = 0
        while x < width:
            rw = int(rng.integers(2, max_w + 1))
            canvas[y:y + rh, x:x + rw] = rng.integers(0, 256)
            x += rw
        y += rh
    return canvas


def propose(cfg: GeneratorConfig, rng: np.random.Generator) -> GrayImage:
    """Draw one candidate pattern of the configured size and kind.

    ``uniform_noise`` is a single ``rng.integers(0, 256, (height, width),
    dtype=uint8)`` call, so with ``np.random.default_rng(seed)`` (PCG64) the
    pixel stream is fully determined by the seed.
    """
    h, w = cfg.height, cfg.width
    kind = cfg.generator_kind
    if kind == "uniform_noise":
        return GrayImage(rng.integers(0, 256, size=(h, w), dtype=np.uint8))
    if kind == "block_mosaic":
        return GrayImage(_mosaic(h, w, rng))
    quad = _mosaic((h + 1) // 2, (w + 1) // 2, rng)
    top = np.hstack([quad, quad[:, : w // 2][:, ::-1]])
    return GrayImage(np.vstack([top, top[: h // 2][::-1]]))


@dataclass(frozen=True)
class Slot:
    image: GrayImage
    score: AestheticScore
    found_at: int


class EnergyBinnedArchive:
    """Best image seen so far in each of the 150 energy groups."""

    def __init__(self, measure: str = "eq15", config: Optional[GeneratorConfig] = None):
        if measure not in MEASURES:
            raise ValueError(f"unknown measure {measure!r}")
        self.measure = measure
        self.config = config
        self.bins: list[Optional[Slot]] = [None] * N_BINS
        self.counts: list[int] = [0] * N_BINS

    def offer(self, image: GrayImage, sc: AestheticScore, found_at: int) -> bool:
        """Count the candidate in its group and keep it if it beats the
        incumbent. Returns True when the slot changed."""
        k = sc.l1_energy_bin
        self.counts[k] += 1
        cur = self.bins[k]
        if cur is None or sc.m(self.measure) > cur.score.m(self.measure):
            self.bins[k] = Slot(image, sc, found_at)
            return True
        return False

    def merge(self, other: "EnergyBinnedArchive") -> None:
        for k in range(N_BINS):
            self.counts[k] += other.counts[k]
            slot = other.bins[k]
            if slot is None:
                continue
            cur = self.bins[k]
            if cur is None or slot.score.m(self.measure) > cur.score.m(self.measure):
                self.bins[k] = slot

    def best_m(self, k: int) -> Optional[float]:
        slot = self.bins[k]
        return None if slot is None else slot.score.m(self.measure)

    def occupied(self) -> list[int]:
        return [k for k, s in enumerate(self.bins) if s is not None]

    def __len__(self):
        return len(self.occupied())

    def __eq__(self, other):
        if not isinstance(other, EnergyBinnedArchive):
            return NotImplemented
        return (self.measure == other.measure and self.config == other.config
                and self.counts == other.counts and self.bins == other.bins)

    def __repr__(self):
        return (f"EnergyBinnedArchive(measure={self.measure!r}, occupied={len(self)}, "
                f"candidates={sum(self.counts)})")


def _evolve_chunk(cfg: GeneratorConfig, seed_seq, start: int, n: int) -> EnergyBinnedArchive:
    rng = np.random.default_rng(seed_seq)
    archive = EnergyBinnedArchive(cfg.measure, cfg)
    for i in range(start, start + n):
        img = propose(cfg, rng)
        archive.offer(img, score(img), i)
    return archive


def evolve(cfg: GeneratorConfig,
           on_candidate: Optional[Callable[[int, AestheticScore, bool], None]] = None,
           workers: int = 1,
           chunk_size: int = 512) -> EnergyBinnedArchive:
    """Run ``cfg.iterations`` propose, score, bin and compare steps.

    ``on_candidate(iteration, score, replaced)`` is called after every
    candidate in sequential mode (it is ignored when ``workers > 1``).
    """
    if workers <= 1:
        rng = np.random.default_rng(cfg.seed)
        archive = EnergyBinnedArchive(cfg.measure, cfg)
        for i in range(cfg.iterations):
            img = propose(cfg, rng)
            sc = score(img)
            replaced = archive.offer(img, sc, i)
            if on_candidate is not None:
                on_candidate(i, sc, replaced)
        return archive

    starts = list(range(0, cfg.iterations, chunk_size))
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(starts))
    archive = EnergyBinnedArchive(cfg.measure, cfg)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_evolve_chunk, cfg, ss, s, min(chunk_size, cfg.iterations - s))
                   for ss, s in zip(seeds, starts)]
        for fut in as_completed(futures):
            archive.merge(fut.result())
    return archive


def top_groups(archive: EnergyBinnedArchive, k: int) -> list[int]:
    """The ``k`` most populated groups, ties going to the lower index."""
    if not 0 < k <= N_BINS:
        raise ValueError(f"k must be in 1..{N_BINS}")
    order = sorted(range(N_BINS), key=lambda b: (-archive.counts[b], b))
    return order[:k]


def _slot_file(k: int) -> str:
    return f"bin_{k}.pgm"


def archive_document(archive: EnergyBinnedArchive) -> dict:
    slots = []
    for k, slot in enumerate(archive.bins):
        if slot is None:
            slots.append(None)
            continue
        slots.append({
            "file": _slot_file(k),
            "m_eq14": slot.score.m_eq14,
            "m_eq15": slot.score.m_eq15,
            "found_at": slot.found_at,
        })
    return {
        "version": ARCHIVE_VERSION,
        "bins": N_BINS,
        "measure": archive.measure,
        "config": None if archive.config is None else archive.config.to_dict(),
        "counts": list(archive.counts),
        "slots": slots,
    }


def save_archive(archive: EnergyBinnedArchive, directory: str | os.PathLike) -> Path:
    """Write ``archive.json`` and one ``bin_<k>.pgm`` per occupied group.

    Stale ``bin_*.pgm`` files from an earlier save into the same directory
    are removed so the directory always mirrors the JSON.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    keep = {_slot_file(k) for k in archive.occupied()}
    for old in directory.glob("bin_*.pgm"):
        if old.name not in keep:
            old.unlink()
    for k in archive.occupied():
        save_image(archive.bins[k].image, directory / _slot_file(k))
    doc = archive_document(archive)
    path = directory / ARCHIVE_FILE
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def load_archive(directory: str | os.PathLike) -> EnergyBinnedArchive:
    """Rebuild an archive, re-scoring every stored image.

    Raises CorruptArchive when the JSON is unreadable, a PGM is missing, or a
    stored image does not re-score to its recorded M values and group.
    """
    directory = Path(directory)
    try:
        doc = json.loads((directory / ARCHIVE_FILE).read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise CorruptArchive(f"unreadable {ARCHIVE_FILE}: {exc}") from exc

    try:
        if doc["version"] != ARCHIVE_VERSION:
            raise CorruptArchive(f"unsupported archive version {doc['version']}")
        config = None if doc["config"] is None else GeneratorConfig.from_dict(doc["config"])
        counts = [int(c) for c in doc["counts"]]
        slots = doc["slots"]
        measure = doc["measure"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArchive(f"malformed {ARCHIVE_FILE}: {exc}") from exc
    if len(counts) != N_BINS or len(slots) != N_BINS:
        raise CorruptArchive(f"expected {N_BINS} counts and slots")

    archive = EnergyBinnedArchive(measure, config)
    archive.counts = counts
    for k, entry in enumerate(slots):
        if entry is None:
            continue
        try:
            img = load_image(directory / entry["file"])
        except (OSError, KeyError, DataError) as exc:
            raise CorruptArchive(f"slot {k}: cannot load image: {exc}") from exc
        sc = score(img)
        if sc.l1_energy_bin != k:
            raise CorruptArchive(f"slot {k}: image re-scores into group {sc.l1_energy_bin}")
        for name in ("m_eq14", "m_eq15"):
            if abs(getattr(sc, name) - float(entry[name])) > RESCORE_TOL:
                raise CorruptArchive(f"slot {k}: stored {name} does not match re-score")
        archive.bins[k] = Slot(img, sc, int(entry["found_at"]))
    return archive
