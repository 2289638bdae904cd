"""Command-line entry points.

Subcommands: ``profile`` (lower-bound matrix profile as CSV), ``motifs``
(ranked motif pairs), ``compare`` (lower-bound method against linear
imputation, optionally scored against a reference profile), and ``mask``
(synthetic missing-data injection).

Exit codes: 0 on success, 2 for usage, parse, or validation problems,
3 for data mismatches such as a reference profile of the wrong length.
All output is deterministic for fixed inputs and arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .bounds import CaseLabel
from .engine import LowerBoundMatrixProfile, exact_profile, lower_bound_profile
from .motifs import MotifPair, top_k_motifs
from .preprocess import MaskSpec, apply_mask, linear_impute
from .series import (
    EngineConfig,
    InfeasibleMaskError,
    MissingValueSeries,
    SeriesLengthError,
    SeriesParseError,
    WindowError,
    format_series,
    read_series,
)

PROFILE_HEADER = ("position", "value", "index", "case")
MOTIF_HEADER = ("rank", "pos_a", "pos_b", "distance", "case")

_CODE_TO_LABEL = {label.code: label for label in CaseLabel}

ORACLE_TOLERANCE = 1e-9


class _CliError(Exception):
    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


def _fmt(x: float) -> str:
    """Nine significant digits, the CSV value format."""
    return "%.9g" % x


def write_profile_csv(profile: LowerBoundMatrixProfile, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(PROFILE_HEADER)
    for pos in range(profile.window_count):
        value = profile.values[pos]
        idx = profile.index[pos]
        label = int(profile.labels[pos])
        writer.writerow(
            (
                pos,
                _fmt(value) if np.isfinite(value) else "",
                str(idx) if idx >= 0 else "",
                CaseLabel(label).code if label else "",
            )
        )


def parse_profile_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a profile CSV back into (values, index, labels) arrays."""
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise _CliError("profile file is empty")
    if tuple(rows[0]) == PROFILE_HEADER:
        rows = rows[1:]
    values, index, labels = [], [], []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 4:
            raise _CliError(f"profile row {lineno}: expected 4 fields")
        try:
            position = int(row[0])
        except ValueError:
            raise _CliError(f"profile row {lineno}: bad position {row[0]!r}") from None
        if position != len(values):
            raise _CliError(f"profile row {lineno}: positions must be contiguous")
        values.append(float(row[1]) if row[1] else np.nan)
        index.append(int(row[2]) if row[2] else -1)
        code = row[3]
        if code and code not in _CODE_TO_LABEL:
            raise _CliError(f"profile row {lineno}: unknown case code {code!r}")
        labels.append(_CODE_TO_LABEL[code].value if code else 0)
    return (
        np.asarray(values, dtype=np.float64),
        np.asarray(index, dtype=np.int64),
        np.asarray(labels, dtype=np.uint8),
    )


def write_motifs_csv(motifs: list[MotifPair], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(MOTIF_HEADER)
    for pair in motifs:
        writer.writerow(
            (pair.rank, pair.pos_a, pair.pos_b, _fmt(pair.distance), pair.label.code)
        )


def _load_series(path: str):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return read_series(text)
    except (SeriesParseError, SeriesLengthError) as exc:
        raise _CliError(f"{path}: {exc}") from exc


def _parse_bounds(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise _CliError("--bounds expects LO,HI")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise _CliError("--bounds expects two numbers") from None
    return lo, hi


def _build_config(args, n: int) -> EngineConfig:
    try:
        config = EngineConfig(
            m=args.window,
            exclusion_divisor=args.exclusion_div,
            value_bounds_override=_parse_bounds(args.bounds),
            all_missing_policy=args.all_missing_policy,
        )
        config.validate_for(n)
    except (ValueError, WindowError) as exc:
        raise _CliError(str(exc)) from exc
    return config


def _write_out(path: str | None, emit) -> None:
    if path is None or path == "-":
        emit(sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _add_profile_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", required=True, help="series CSV file")
    sub.add_argument("--window", required=True, type=int, help="window length")
    sub.add_argument("--exclusion-div", type=int, default=4,
                     help="window divisor for the trivial-match zone")
    sub.add_argument("--bounds", default=None, metavar="LO,HI",
                     help="global completion bounds instead of per-window extrema")
    sub.add_argument("--all-missing-policy", choices=("zero", "flag"),
                     default="zero", help="treatment of fully missing windows")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads; results do not depend on this")


def cmd_profile(args) -> int:
    series, _ = _load_series(args.input)
    config = _build_config(args, series.n)
    profile = lower_bound_profile(series, config, threads=args.threads)
    _write_out(args.output, lambda fh: write_profile_csv(profile, fh))
    return 0


def cmd_motifs(args) -> int:
    series, _ = _load_series(args.input)
    config = _build_config(args, series.n)
    if args.top_k < 0:
        raise _CliError("--top-k must be non-negative")
    profile = lower_bound_profile(series, config, threads=args.threads)
    motifs = top_k_motifs(profile, args.top_k)
    if args.output is not None:
        _write_out(args.output, lambda fh: write_profile_csv(profile, fh))
    _write_out(args.output_motifs, lambda fh: write_motifs_csv(motifs, fh))
    return 0


def _top_pair(profile: LowerBoundMatrixProfile) -> tuple[int, int, float] | None:
    values = profile.values
    if not np.isfinite(values).any():
        return None
    pos = int(np.nanargmin(values))
    partner = int(profile.index[pos])
    a, b = (pos, partner) if pos < partner else (partner, pos)
    return a, b, float(values[pos])


def cmd_compare(args) -> int:
    series, _ = _load_series(args.input)
    config = _build_config(args, series.n)
    bounded = lower_bound_profile(series, config, threads=args.threads)
    imputed_series = linear_impute(series)
    imputed = exact_profile(imputed_series, config)

    lines = [f"windows {bounded.window_count}"]
    for name, prof in (("lower-bound", bounded), ("impute-linear", imputed)):
        top = _top_pair(prof)
        if top is None:
            lines.append(f"{name} top none")
        else:
            lines.append(f"{name} top {top[0]} {top[1]} {_fmt(top[2])}")
    both = np.isfinite(bounded.values) & np.isfinite(imputed.values)
    if both.any():
        diff = imputed.values[both] - bounded.values[both]
        lines.append(f"diff mean {_fmt(float(diff.mean()))} max {_fmt(float(diff.max()))}")
    else:
        lines.append("diff mean nan max nan")

    if args.oracle is not None:
        try:
            with open(args.oracle, "r", encoding="utf-8", newline="") as fh:
                oracle_values, _, _ = parse_profile_csv(fh.read())
        except OSError as exc:
            raise _CliError(f"cannot read {args.oracle}: {exc.strerror}") from exc
        if oracle_values.size != bounded.window_count:
            raise _CliError(
                f"reference profile has {oracle_values.size} entries, "
                f"expected {bounded.window_count}",
                exit_code=3,
            )
        for name, prof in (("lower-bound", bounded), ("impute-linear", imputed)):
            with np.errstate(invalid="ignore"):
                over = prof.values > oracle_values + ORACLE_TOLERANCE
            lines.append(f"violations {name} {int(np.count_nonzero(over))}")

    if args.output is not None:
        def emit(fh):
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ("position", "lower_bound", "lb_index", "imputed", "imputed_index")
            )
            for pos in range(bounded.window_count):
                lv, li = bounded.values[pos], bounded.index[pos]
                iv, ii = imputed.values[pos], imputed.index[pos]
                writer.writerow(
                    (
                        pos,
                        _fmt(lv) if np.isfinite(lv) else "",
                        str(li) if li >= 0 else "",
                        _fmt(iv) if np.isfinite(iv) else "",
                        str(ii) if ii >= 0 else "",
                    )
                )
        _write_out(args.output, emit)

    print("\n".join(lines))
    return 0


def cmd_mask(args) -> int:
    series, layout = _load_series(args.input)
    try:
        spec = MaskSpec(
            mode=args.mode,
            count=args.count,
            fraction=args.fraction,
            block_length=args.block_len,
            target=args.at,
            seed=args.seed,
        )
        masked = apply_mask(series, spec)
    except (ValueError, InfeasibleMaskError) as exc:
        raise _CliError(str(exc)) from exc
    _write_out(args.output, lambda fh: fh.write(format_series(masked, layout)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapprofile",
        description="Matrix profiles and motifs for series with missing values",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("profile", help="write the lower-bound matrix profile")
    _add_profile_options(p)
    p.add_argument("--output", default=None, help="profile CSV path (default stdout)")
    p.set_defaults(func=cmd_profile)

    p = subs.add_parser("motifs", help="report the best non-overlapping motif pairs")
    _add_profile_options(p)
    p.add_argument("--top-k", type=int, default=1, help="number of motif pairs")
    p.add_argument("--output", default=None,
                   help="also write the profile CSV to this path")
    p.add_argument("--output-motifs", default=None,
                   help="motif CSV path (default stdout)")
    p.set_defaults(func=cmd_motifs)

    p = subs.add_parser(
        "compare",
        help="lower-bound profile versus linear imputation on the same input",
    )
    _add_profile_options(p)
    p.add_argument("--oracle", default=None,
                   help="reference profile CSV to score both methods against")
    p.add_argument("--output", default=None,
                   help="per-position CSV of both profiles")
    p.set_defaults(func=cmd_compare)

    p = subs.add_parser("mask", help="delete points to synthesize missing data")
    p.add_argument("--input", required=True, help="series CSV file")
    p.add_argument("--mode", required=True, choices=("random", "blocks", "block"))
    p.add_argument("--count", type=int, default=None,
                   help="points (random) or blocks (blocks) to delete")
    p.add_argument("--fraction", type=float, default=None,
                   help="share of the series to delete instead of a count")
    p.add_argument("--block-len", type=int, default=None, help="block length")
    p.add_argument("--at", type=int, default=None, help="center of the targeted block")
    p.add_argument("--seed", type=int, default=0, help="mask placement seed")
    p.add_argument("--output", default=None, help="masked series path (default stdout)")
    p.set_defaults(func=cmd_mask)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (SeriesParseError, SeriesLengthError, WindowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
