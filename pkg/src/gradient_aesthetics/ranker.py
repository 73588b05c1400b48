"""Score a directory of images and rank them within energy groups.

Images are only ever compared against images in the same energy group;
there is no absolute threshold separating appealing from unappealing.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import DataError, EmptyCorpus
from .imageio import load_image
from .levels import FORWARD
from .measures import MEASURES, AestheticScore, score

IMAGE_SUFFIXES = (".pgm", ".png")


@dataclass(frozen=True)
class Entry:
    file: str
    width: int
    height: int
    score: AestheticScore
    label: Optional[str] = None

    @property
    def bin(self) -> int:
        return self.score.l1_energy_bin

    def to_dict(self) -> dict:
        d = {"file": self.file, "width": self.width, "height": self.height}
        if self.label is not None:
            d["label"] = self.label
        d["l1_energy"] = self.score.l1_energy
        d.update(self.score.to_dict())
        return d


@dataclass(frozen=True)
class Pair:
    appealing_file: str
    control_file: str
    bin: int
    m_appealing: float
    m_control: float

    @property
    def same_bin(self) -> bool:
        return True

    @property
    def appealing_wins(self) -> bool:
        return self.m_appealing > self.m_control

    def to_dict(self) -> dict:
        return {
            "appealing_file": self.appealing_file,
            "control_file": self.control_file,
            "bin": self.bin,
            "same_bin": self.same_bin,
            "m_appealing": self.m_appealing,
            "m_control": self.m_control,
            "appealing_wins": self.appealing_wins,
        }


@dataclass
class CorpusReport:
    measure: str
    entries: list[Entry]
    groups: dict[int, list[Entry]]
    errors: list[tuple[str, str]] = field(default_factory=list)
    pairs: Optional[list[Pair]] = None

    @property
    def win_fraction(self) -> Optional[float]:
        if not self.pairs:
            return None
        return sum(p.appealing_wins for p in self.pairs) / len(self.pairs)

    def rank_of(self, entry: Entry) -> int:
        return self.groups[entry.bin].index(entry) + 1

    def to_dict(self) -> dict:
        d = {
            "measure": self.measure,
            "entries": [e.to_dict() for e in self.entries],
            "groups": {str(k): [e.file if e.label is None else f"{e.label}/{e.file}" for e in g]
                       for k, g in sorted(self.groups.items())},
            "errors": [{"file": f, "error": msg} for f, msg in self.errors],
        }
        if self.pairs is not None:
            d["pairs"] = [p.to_dict() for p in self.pairs]
            d["win_fraction"] = self.win_fraction
        return d

    def to_csv(self) -> str:
        labeled = any(e.label is not None for e in self.entries)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["file", "bin", "m_eq14", "m_eq15", "rank_in_bin", "l1_energy"]
        if labeled:
            header.append("label")
        w.writerow(header)
        for k in sorted(self.groups):
            for rank, e in enumerate(self.groups[k], start=1):
                row = [e.file, k, repr(e.score.m_eq14), repr(e.score.m_eq15), rank,
                       e.score.l1_energy]
                if labeled:
                    row.append(e.label)
                w.writerow(row)
        return buf.getvalue()


def list_images(directory: str | os.PathLike) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def score_directory(directory, label=None, operator=FORWARD):
    """Score every image file in ``directory``; returns (entries, errors)."""
    entries, errors = [], []
    for path in list_images(directory):
        try:
            img = load_image(path)
            sc = score(img, operator)
        except (DataError, OSError) as exc:
            errors.append((path.name, f"{type(exc).__name__}: {exc}"))
            continue
        entries.append(Entry(path.name, img.width, img.height, sc, label))
    return entries, errors


def group_entries(entries: list[Entry], measure: str) -> dict[int, list[Entry]]:
    groups: dict[int, list[Entry]] = {}
    for e in entries:
        groups.setdefault(e.bin, []).append(e)
    for k in groups:
        groups[k].sort(key=lambda e: (-e.score.m(measure), e.file, e.label or ""))
    return dict(sorted(groups.items()))


def rank_corpus(directory: str | os.PathLike, measure: str = "eq15",
                operator: str = FORWARD) -> CorpusReport:
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    entries, errors = score_directory(directory, operator=operator)
    if not entries:
        raise EmptyCorpus(f"no scorable images in {directory}")
    return CorpusReport(measure, entries, group_entries(entries, measure), errors)


def compare_labeled(dir_appealing: str | os.PathLike, dir_control: str | os.PathLike,
                    measure: str = "eq15", operator: str = FORWARD) -> CorpusReport:
    """Pair every appealing image with every control image in the same
    energy group and record which has the larger M.

    An empty ``pairs`` list means the two corpora share no group.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    good, err_a = score_directory(dir_appealing, "appealing", operator)
    ctrl, err_c = score_directory(dir_control, "control", operator)
    if not good:
        raise EmptyCorpus(f"no scorable images in {dir_appealing}")
    if not ctrl:
        raise EmptyCorpus(f"no scorable images in {dir_control}")

    pairs = []
    for a in good:
        for c in ctrl:
            if a.bin == c.bin:
                pairs.append(Pair(a.file, c.file, a.bin, a.score.m(measure), c.score.m(measure)))
    pairs.sort(key=lambda p: (p.bin, p.appealing_file, p.control_file))
    errors = [(f"appealing/{f}", m) for f, m in err_a] + [(f"control/{f}", m) for f, m in err_c]
    entries = good + ctrl
    return CorpusReport(measure, entries, group_entries(entries, measure), errors, pairs)
