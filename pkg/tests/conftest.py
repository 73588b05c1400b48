import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gradient_aesthetics.imageio import GrayImage, save_image  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

_criteria = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    cid, title = marker.args
    rec = _criteria.setdefault(cid, {"title": title, "outcome": "PASS", "detail": ""})
    if call.excinfo is not None:
        if call.excinfo.errisinstance(pytest.skip.Exception):
            if rec["outcome"] == "PASS":
                rec["outcome"] = "SKIP"
                rec["detail"] = str(call.excinfo.value)
        elif call.when in ("setup", "call"):
            rec["outcome"] = "FAIL"
            rec["detail"] = call.excinfo.exconly().splitlines()[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria):
        rec = _criteria[cid]
        line = f"[{rec['outcome']}] {cid}: {rec['title']}"
        if rec["detail"]:
            line += f" ({rec['detail']})"
        terminalreporter.write_line(line)


def checker(n=8, cell=1):
    y, x = np.indices((n, n))
    return GrayImage((((x // cell) + (y // cell)) % 2) * 255)


def seeded_random(shape=(8, 8), seed=1234):
    return GrayImage(np.random.default_rng(seed).integers(0, 256, size=shape, dtype=np.uint8))


def write_corpus(directory: Path):
    """Small fixed corpus used by the CLI golden tests."""
    directory.mkdir(parents=True, exist_ok=True)
    save_image(GrayImage(np.zeros((3, 3), np.uint8)), directory / "black3.pgm")
    save_image(GrayImage(np.full((3, 3), 255, np.uint8)), directory / "white3.pgm")
    save_image(checker(8), directory / "checker8.pgm")
    save_image(seeded_random((8, 8), 1234), directory / "random8.pgm")
    ramp = np.tile(np.arange(0, 256, 16, dtype=np.uint8), (16, 1))
    save_image(GrayImage(ramp), directory / "ramp16.pgm")
    return directory


@pytest.fixture
def corpus(tmp_path):
    return write_corpus(tmp_path / "corpus")
