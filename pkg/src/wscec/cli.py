"""Command line: ``wscec ingest|classify|evaluate|selftest``.

Exit codes: 0 success, 1 selftest failure, 2 input error, 3 missing ground
truth (or missing report for ``evaluate``).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, selftest
from .classifier import confidence_ellipse, evaluate, select_b, wscec_run
from .config import EMIT_KINDS, PipelineConfig, WscecParams
from .errors import EvaluationUnavailableError, WscecError
from .features import feature_extract
from .geometry import distance_matrix
from .ingest import (
    GroundTruthLabel,
    Heartbeat,
    read_csv_record,
    read_label_csv,
    read_wfdb,
    record_to_beats,
)
from .synthetic import standard_beat as bundled_standard

log = logging.getLogger("wscec")

EXIT_OK, EXIT_SELFTEST, EXIT_INPUT, EXIT_NO_TRUTH = 0, 1, 2, 3


class InputError(Exception):
    pass


def _add_params(p):
    d = WscecParams()
    p.add_argument("--l", type=int, default=d.window_length, help="window length")
    p.add_argument("--tau", type=int, default=d.stride, help="window stride")
    p.add_argument("--d", type=int, default=d.embed_dim, help="embedding dimension")
    p.add_argument("--k", type=int, default=d.k, help="kNN neighbourhood size")
    p.add_argument("--m", type=float, default=d.m, help="histogram bin width")
    p.add_argument("--s", type=int, default=d.s, help="first histogram bin index counted")
    p.add_argument("--epsilon", type=float, default=d.epsilon)
    p.add_argument("--cur2-form", choices=["paper", "corrected"], default=d.cur2_form)
    p.add_argument("--cov-norm", choices=["sum", "mean"], default=d.covariance_normalization)
    p.add_argument("--distance-form", choices=["paper", "l2"], default=d.distance_form)
    p.add_argument("--amplitude-norm", choices=["zscore", "none"], default=d.amplitude_norm)


def _params(a):
    return WscecParams(a.l, a.tau, a.d, a.k, a.m, a.s, a.epsilon, a.cov_norm, a.cur2_form,
                       a.distance_form, a.amplitude_norm)


def _emit(text):
    kinds = frozenset(k.strip() for k in text.split(",") if k.strip())
    bad = kinds - set(EMIT_KINDS)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown emit kinds {sorted(bad)}")
    return kinds


def build_parser():
    ap = argparse.ArgumentParser(prog="wscec", description="ECG beat classification from Wasserstein scalar curvature.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read records, filter, segment into 300-sample beats")
    p.add_argument("--input", nargs="+", required=True, help="WFDB record stems or CSV files")
    p.add_argument("--format", choices=["wfdb", "csv"], default="wfdb")
    p.add_argument("--out", required=True)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--fs", type=float, default=360.0, help="sampling rate for CSV input")
    p.add_argument("--column", type=int, default=0, help="CSV column holding the signal")
    p.add_argument("--cutoff", type=float, default=50.0)
    p.add_argument("--labels", help="CSV sidecar of sample_index,label")
    p.add_argument("--label", help="annotation for --already-segmented input")
    p.add_argument("--already-segmented", action="store_true",
                   help="each CSV input is one 300-sample beat; skip filtering and R-peak search")

    p = sub.add_parser("classify", help="run the batch classifier over an ingested bundle")
    p.add_argument("--input", required=True, help="bundle directory written by ingest")
    p.add_argument("--out", required=True)
    p.add_argument("--standard-beat", help="source_id of the standard normal beat in the bundle "
                   "(default: the bundled synthetic normal beat)")
    p.add_argument("--emit", type=_emit, default=frozenset({"report"}),
                   help=f"comma list of {','.join(EMIT_KINDS)}")
    p.add_argument("--jobs", type=int, default=PipelineConfig().jobs)
    _add_params(p)

    p = sub.add_parser("evaluate", help="TPR/NRR table from a report with ground truth")
    p.add_argument("--input", required=True, help="report.json or the directory holding it")
    p.add_argument("--out", required=True)
    p.add_argument("--coverage", type=float, default=0.95, help="confidence ellipse coverage")

    p = sub.add_parser("selftest", help="randomized invariant checks of the geometry core")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--quick", action="store_true", help="20%% of the default sample sizes")
    p.add_argument("--mutate-term", type=int, choices=[0, 1, 2], help=argparse.SUPPRESS)
    return ap


def cmd_ingest(a):
    beats = []
    try:
        labels = read_label_csv(a.labels) if a.labels else None
    except (OSError, WscecError) as exc:
        raise InputError(f"{a.labels}: {exc}") from exc
    for path in a.input:
        try:
            if a.format == "wfdb":
                rec = read_wfdb(path, a.channel)
            else:
                rec = read_csv_record(path, a.fs, a.column)
        except (OSError, WscecError) as exc:
            raise InputError(f"{path}: {exc}") from exc
        if a.already_segmented:
            try:
                beats.append(Heartbeat(rec.samples, annotation=GroundTruthLabel.parse(a.label or "Unlabeled"), source_id=rec.source_id))
            except WscecError as exc:
                raise InputError(f"{path}: {exc}") from exc
            continue
        found = record_to_beats(rec, labels, a.cutoff)
        log.info("%s: %d beats", path, len(found))
        beats.extend(found)
    io.write_beats(a.out, beats, source=[str(p) for p in a.input], format=a.format,
                   cutoff_hz=a.cutoff, already_segmented=a.already_segmented)
    print(f"wrote {len(beats)} beats to {a.out}")
    return EXIT_OK


def _emit_intermediates(out, beats, params, b, kinds):
    for beat in beats:
        try:
            f = feature_extract(beat, params, b, keep=True)
        except WscecError as exc:
            log.info("no intermediates for %s: %s", beat.source_id, exc)
            continue
        name = io.safe_name(beat.source_id)
        if "clouds" in kinds:
            io.write_matrix_csv(io.ensure_dir(out / "clouds") / f"{name}.csv", f.cloud.points)
            io.write_spd_csv(io.ensure_dir(out / "spd") / f"{name}.csv", f.spd)
        if "dmatrix" in kinds:
            D = distance_matrix(f.spd.means, f.spd.covs, params.distance_form)
            io.write_pgm(io.ensure_dir(out / "dmatrix") / f"{name}.pgm", D)
        if "hist" in kinds:
            hdir = io.ensure_dir(out / "hist")
            io.write_histogram_csv(hdir / f"{name}.csv", f.histogram)
            io.histogram_svg(hdir / f"{name}.svg", f.histogram, beat.source_id)


def cmd_classify(a):
    params = _params(a)
    try:
        beats = io.read_beats(a.input)
    except (OSError, ValueError) as exc:
        raise InputError(f"{a.input}: {exc}") from exc
    if not beats:
        raise InputError(f"{a.input}: no beats")
    if a.standard_beat:
        match = [b for b in beats if b.source_id == a.standard_beat]
        if not match:
            raise InputError(f"standard beat {a.standard_beat!r} not in bundle")
        standard = match[0]
    else:
        standard = bundled_standard()
    b = select_b(standard, params)
    report = wscec_run(beats, standard, params, jobs=a.jobs, b=b)
    out = io.ensure_dir(a.out)
    io.write_report(out, report)
    io.write_json(out / io.MANIFEST_FILE, {
        "version": __version__, "params": params.to_dict(), "b": b,
        "standard_id": report.standard_id, "count": len(report.beats),
        "tallies": {d.value: n for d, n in report.tallies.items()},
        "input": str(a.input), "emit": sorted(a.emit),
    })
    io.scatter_svg(out / "dispersion.svg", report)
    extra = set(a.emit) - {"report"}
    if extra:
        _emit_intermediates(out, beats, params, b, extra)
    tallies = ", ".join(f"{d.value}={n}" for d, n in report.tallies.items())
    print(f"classified {len(report.beats)} beats (b={b:g}): {tallies}")
    return EXIT_OK


def cmd_evaluate(a):
    path = Path(a.input)
    if path.is_dir():
        path = path / "report.json"
    if not path.exists():
        print(f"error: no report at {path}", file=sys.stderr)
        return EXIT_NO_TRUTH
    report = io.read_report(path)
    try:
        table = evaluate(report)
    except EvaluationUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_TRUTH
    out = io.ensure_dir(a.out)
    io.write_table_csv(out / "tpr_nrr.csv", table)
    io.write_confusion_csv(out / "confusion.csv", table)
    ellipses = []
    by_truth = {}
    for r in report.beats:
        if r.cur1 is not None:
            by_truth.setdefault(r.truth.value, []).append((r.cur1, r.cur2))
    for lab, pts in sorted(by_truth.items()):
        try:
            ellipses.append(confidence_ellipse(pts, a.coverage, lab))
        except WscecError as exc:
            log.info("no ellipse for %s: %s", lab, exc)
    io.write_json(out / "ellipses.json", [
        {"label": e.label, "center": e.center, "semi_axes": e.semi_axes, "angle": e.angle,
         "coverage": e.coverage} for e in ellipses])
    io.scatter_svg(out / "dispersion.svg", report, ellipses)
    for d, s in table.scores.items():
        print(f"{d.group:22s} orig={s.original_size:5d} classified={s.classified_size:5d} "
              f"TPR={s.tpr:.4f} NRR={s.nrr:.4f}")
    return EXIT_OK


def cmd_selftest(a):
    checks = selftest.run(a.seed, a.mutate_term, a.quick)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    ok = all(c.passed for c in checks)
    print("selftest passed" if ok else "selftest FAILED")
    return EXIT_OK if ok else EXIT_SELFTEST


COMMANDS = {"ingest": cmd_ingest, "classify": cmd_classify, "evaluate": cmd_evaluate,
            "selftest": cmd_selftest}


def main(argv=None):
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return COMMANDS[a.command](a)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WscecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
