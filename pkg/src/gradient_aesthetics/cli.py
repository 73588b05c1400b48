"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable image,
degenerate histogram or fit, corrupt archive), 3 when ``compare`` finds no
energy group shared by the two corpora.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import DataError, EmptyHistogram
from .imageio import load_image, save_image
from .levels import FORWARD, OPERATORS, build_pyramid
from .measures import MEASURES, N_BINS, histogram, score
from .statmech import MaxEntProblem, fit_mb, solve_maxent

log = logging.getLogger("gradient_aesthetics")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_SHARED_BINS = 0, 1, 2, 3
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 3 or h < 3:
        raise argparse.ArgumentTypeError("size must be at least 3x3")
    return w, h


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _levels(text: str) -> list[float]:
    """Comma list of numbers; ``a..b`` expands to the integers a through b."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                a, b = part.split("..")
                out.extend(float(i) for i in range(int(a), int(b) + 1))
            else:
                out.append(float(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None
    return out


def _bins(text: str) -> int:
    if text != str(N_BINS):
        raise argparse.ArgumentTypeError(f"the number of energy groups is fixed at {N_BINS}")
    return N_BINS


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return repr(float(x))


# -- subcommands -------------------------------------------------------------

def cmd_score(args) -> int:
    records = []
    for path in args.images:
        img = load_image(path)
        sc = score(img, args.gradient)
        rec = {"file": Path(path).name, "width": img.width, "height": img.height}
        rec.update(sc.to_dict())
        records.append(rec)
    if args.format == "json":
        _emit(_json(records[0] if len(records) == 1 else records), args.out)
        return EXIT_OK
    header = ["file", "width", "height"]
    for k in (1, 2, 3):
        header += [f"l{k}_entropy_bits", f"l{k}_energy", f"l{k}_entropy_scaled",
                   f"l{k}_energy_scaled", f"l{k}_pixel_count"]
    header += ["m_eq14", "m_eq15", "l1_energy_bin"]
    rows = []
    for rec in records:
        row = [rec["file"], rec["width"], rec["height"]]
        for lv in rec["levels"]:
            row += [_fmt(lv["entropy_bits"]), lv["energy"], _fmt(lv["entropy_scaled"]),
                    _fmt(lv["energy_scaled"]), lv["pixel_count"]]
        row += [_fmt(rec["m_eq14"]), _fmt(rec["m_eq15"]), rec["l1_energy_bin"]]
        rows.append(row)
    _emit(_csv(header, rows), args.out)
    return EXIT_OK


def _emit_report(report, args) -> None:
    for f, msg in report.errors:
        log.warning("skipped %s: %s", f, msg)
    if args.format == "json":
        _emit(_json(report.to_dict()), args.out)
    else:
        _emit(report.to_csv(), args.out)
    if args.plot:
        from .plotting import plot_corpus
        plot_corpus(report, args.plot)


def cmd_rank(args) -> int:
    from .ranker import rank_corpus
    report = rank_corpus(args.directory, args.measure, args.gradient)
    _emit_report(report, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    from .ranker import compare_labeled
    report = compare_labeled(args.appealing, args.control, args.measure, args.gradient)
    _emit_report(report, args)
    if not report.pairs:
        print("no energy group is shared by the two corpora", file=sys.stderr)
        return EXIT_NO_SHARED_BINS
    log.info("appealing side wins %.3f of %d same-group pairs",
             report.win_fraction, len(report.pairs))
    return EXIT_OK


def cmd_generate(args) -> int:
    from .search import GeneratorConfig, evolve, save_archive, top_groups

    width, height = args.size
    cfg = GeneratorConfig(width=width, height=height, generator_kind=args.kind, seed=args.seed,
                          iterations=args.iterations, measure=args.measure)
    log.info("generating with seed %d, %d energy groups", cfg.seed, N_BINS)
    archive = evolve(cfg, workers=args.workers)
    path = save_archive(archive, args.out)
    top = top_groups(archive, min(args.top, N_BINS))
    if args.format == "json":
        summary = {
            "archive": str(path),
            "bins": N_BINS,
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "occupied": len(archive),
            "top_groups": [
                {"bin": b, "count": archive.counts[b], "m": archive.best_m(b)} for b in top
            ],
        }
        sys.stdout.write(_json(summary))
    else:
        rows = []
        for b in range(N_BINS):
            slot = archive.bins[b]
            if slot is None:
                rows.append([b, archive.counts[b], "", "", ""])
            else:
                rows.append([b, archive.counts[b], _fmt(slot.score.m_eq14),
                             _fmt(slot.score.m_eq15), slot.found_at])
        sys.stdout.write(_csv(["bin", "count", "m_eq14", "m_eq15", "found_at"], rows))
    if args.plot:
        from .plotting import plot_archive
        plot_archive(archive, args.plot, k=args.top)
    return EXIT_OK


def cmd_maxent(args) -> int:
    problem = MaxEntProblem(tuple(args.levels), args.count, args.energy)
    sol = solve_maxent(problem)
    if args.format == "json":
        _emit(_json(sol.to_dict(problem.levels)), args.out)
    else:
        rows = [[_fmt(e), _fmt(n)] for e, n in zip(problem.levels, sol.occupations)]
        _emit(_csv(["level", "occupation"], rows), args.out)
    if args.plot:
        from .plotting import plot_maxent
        plot_maxent(problem.levels, sol, args.plot)
    return EXIT_OK


def _level_hist(args):
    img = load_image(args.image)
    if args.level == 1:
        return img, histogram(img)
    level = build_pyramid(img, args.gradient).level(args.level)
    return level, histogram(level)


def cmd_fit_mb(args) -> int:
    _, hist = _level_hist(args)
    fit = fit_mb(hist, poisson=args.poisson)
    if args.format == "json":
        doc = {"file": Path(args.image).name, "level": args.level}
        doc.update(fit.to_dict())
        _emit(_json(doc), args.out)
    else:
        fitted = fit.model(range(hist.counts.size))
        rows = [[i, int(c), _fmt(f)] for i, (c, f) in enumerate(zip(hist.counts, fitted))]
        _emit(_csv(["bin", "count", "fitted"], rows), args.out)
    if args.plot:
        from .plotting import plot_level_histogram
        plot_level_histogram(hist, args.plot, fit=fit, level=args.level)
    return EXIT_OK


def cmd_hist(args) -> int:
    level_img, hist = _level_hist(args)
    if hist.total < 1:
        raise EmptyHistogram("level is empty")
    rows = [[i, int(c)] for i, c in enumerate(hist.counts)]
    _emit(_csv(["value", "count"], rows), args.out)
    if args.dump:
        save_image(level_img, args.dump)
    if args.plot:
        from .plotting import plot_level_histogram
        plot_level_histogram(hist, args.plot, level=args.level)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="gradient-aesthetics", formatter_class=fmt,
                description="Entropy/energy aesthetic measure over a three-level gradient pyramid.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, formats=("json", "csv"), out=True, measure=False, gradient=True, plot=True):
        sp.add_argument("--format", choices=formats, default=formats[0])
        if out:
            sp.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        if measure:
            sp.add_argument("--measure", choices=MEASURES, default="eq15")
        if gradient:
            sp.add_argument("--gradient", choices=OPERATORS, default=FORWARD,
                            help="gradient operator used to build levels 2 and 3")
        if plot:
            sp.add_argument("--plot", metavar="PATH",
                            help="also render a figure to this file (png, pdf or svg)")

    sp = sub.add_parser("score", help="score images", formatter_class=fmt)
    sp.add_argument("images", nargs="+", metavar="IMAGE")
    common(sp, plot=False)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("rank", help="rank a directory of images within energy groups",
                        formatter_class=fmt)
    sp.add_argument("directory")
    common(sp, measure=True)
    sp.add_argument("--bins", type=_bins, default=N_BINS, help="number of energy groups (fixed)")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("compare", help="compare appealing vs control images per energy group",
                        formatter_class=fmt)
    sp.add_argument("appealing")
    sp.add_argument("control")
    common(sp, measure=True)
    sp.add_argument("--bins", type=_bins, default=N_BINS, help="number of energy groups (fixed)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("generate", help="elitist generate-and-filter search", formatter_class=fmt)
    sp.add_argument("--out", required=True, metavar="DIR", help="archive directory")
    sp.add_argument("--seed", type=_u64, default=DEFAULT_SEED, help="PCG64 seed")
    sp.add_argument("--iterations", type=_positive, default=1000)
    sp.add_argument("--size", type=_size, default=(64, 64), metavar="WxH")
    sp.add_argument("--kind", choices=("uniform_noise", "block_mosaic", "symmetric_tile"),
                    default="block_mosaic")
    sp.add_argument("--workers", type=_positive, default=1,
                    help="worker processes; >1 is not reproducible candidate-for-candidate")
    sp.add_argument("--top", type=_positive, default=12, help="groups listed in the summary")
    sp.add_argument("--bins", type=_bins, default=N_BINS, help="number of energy groups (fixed)")
    common(sp, out=False, measure=True, gradient=False)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("maxent", help="solve the max-entropy occupation problem",
                        formatter_class=fmt)
    sp.add_argument("--levels", type=_levels, required=True,
                    help="comma-separated energy levels; a..b expands to integers")
    sp.add_argument("--count", type=float, required=True, help="total number of particles")
    sp.add_argument("--energy", type=float, required=True, help="total energy")
    common(sp, gradient=False)
    sp.set_defaults(func=cmd_maxent)

    sp = sub.add_parser("fit-mb", help="fit a Maxwell-Boltzmann curve to a level histogram",
                        formatter_class=fmt)
    sp.add_argument("image")
    sp.add_argument("--level", type=int, choices=(1, 2, 3), default=2)
    sp.add_argument("--poisson", action="store_true", help="weight bins by 1/max(count, 1)")
    common(sp)
    sp.set_defaults(func=cmd_fit_mb)

    sp = sub.add_parser("hist", help="histogram of one pyramid level as CSV", formatter_class=fmt)
    sp.add_argument("image")
    sp.add_argument("--level", type=int, choices=(1, 2, 3), default=1)
    sp.add_argument("--dump", metavar="PATH", help="also save the level itself as PGM")
    common(sp, formats=("csv",))
    sp.set_defaults(func=cmd_hist)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK

    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (DataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
