"""Plain-text persistence: beat bundles, reports, tables, PGM and SVG plots.

Everything is CSV/JSON/ASCII so runs can be diffed; floats are written with
``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import ClassificationReport, Domain, SymptomDomainPartition
from .ingest import BEAT_LENGTH, GroundTruthLabel, Heartbeat

BEATS_FILE = "beats.csv"
MANIFEST_FILE = "manifest.json"


def _fmt(x):
    return repr(float(x))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# --- beats -------------------------------------------------------------------


def write_beats(out_dir, beats, **manifest):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / BEATS_FILE, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "r_index", "annotation"] + [f"s{i:03d}" for i in range(BEAT_LENGTH)])
        for b in beats:
            w.writerow([b.source_id, b.r_index, b.annotation.value] + [_fmt(v) for v in b.samples])
    meta = {"count": len(beats), "version": __version__, "beats_file": BEATS_FILE}
    meta.update(manifest)
    write_json(out / MANIFEST_FILE, meta)
    return out / MANIFEST_FILE


def read_beats(path):
    p = Path(path)
    if p.is_dir():
        p = p / BEATS_FILE
    beats = []
    with open(p, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            beats.append(Heartbeat(np.array(row[3:], dtype=float), int(row[1]),
                                   GroundTruthLabel(row[2]), row[0]))
    return beats


# --- reports -----------------------------------------------------------------

REPORT_COLUMNS = ["index", "source_id", "cur1", "cur2", "label", "domain", "truth",
                  "n_curvatures", "overflow_count", "note"]


def write_report(out_dir, report):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report.to_dict())
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in report.beats:
            d = r.to_dict()
            row = [d[c] for c in REPORT_COLUMNS]
            row[2] = "" if r.cur1 is None else _fmt(r.cur1)
            row[3] = "" if r.cur2 is None else _fmt(r.cur2)
            w.writerow(row)
    return out / "report.json"


def read_report(path):
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    return ClassificationReport.from_dict(read_json(p))


def write_table_csv(path, table):
    """Rows mirror the published layout: sizes, TPR and NRR per domain group."""
    doms = list(Domain)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row"] + [d.group for d in doms])
        w.writerow(["Original size"] + [table[d].original_size for d in doms])
        w.writerow(["Classified size"] + [table[d].classified_size for d in doms])
        w.writerow(["TPR"] + [f"{table[d].tpr:.6f}" for d in doms])
        w.writerow(["NRR"] + [f"{table[d].nrr:.6f}" for d in doms])


def write_confusion_csv(path, table):
    truths = sorted({t for t, _ in table.confusion}, key=lambda t: t.value)
    preds = sorted({p for _, p in table.confusion}, key=lambda p: p.value)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["truth \\ predicted"] + [p.value for p in preds])
        for t in truths:
            w.writerow([t.value] + [table.confusion.get((t, p), 0) for p in preds])


# --- per-beat intermediates --------------------------------------------------


def write_matrix_csv(path, M):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(M):
            w.writerow([_fmt(v) for v in row])


def write_spd_csv(path, spd):
    d = spd.means.shape[1]
    iu = np.triu_indices(d)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"mu{i}" for i in range(d)] + [f"s{i}{j}" for i, j in zip(*iu)])
        for mu, S in zip(spd.means, spd.covs):
            w.writerow([_fmt(v) for v in mu] + [_fmt(v) for v in S[iu]])


def write_pgm(path, D):
    """ASCII (P2) 8-bit grayscale, min-max scaled: black is zero distance."""
    D = np.asarray(D, dtype=float)
    lo, hi = D.min(), D.max()
    g = np.zeros_like(D, dtype=int) if hi <= lo else np.rint(255 * (D - lo) / (hi - lo)).astype(int)
    lines = ["P2", f"{D.shape[1]} {D.shape[0]}", "255"]
    lines += [" ".join(str(v) for v in row) for row in g]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path):
    tok = Path(path).read_text().split()
    if tok[0] != "P2":
        raise ValueError("not an ASCII PGM")
    w, h, _ = int(tok[1]), int(tok[2]), int(tok[3])
    return np.array(tok[4:], dtype=int).reshape(h, w)


def write_histogram_csv(path, H):
    edges = H.edges
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "count"])
        for j, c in enumerate(H.counts):
            w.writerow([_fmt(edges[j]), _fmt(edges[j + 1]), int(c)])
        w.writerow([_fmt(edges[-1]), "inf", H.overflow_count])


def _svg(width, height, body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n")


def histogram_svg(path, H, title=""):
    W, Ht, pad = 640, 320, 40
    counts = H.counts
    top = max(1, int(counts.max()))
    bw = (W - 2 * pad) / len(counts)
    body = [f'<rect width="{W}" height="{Ht}" fill="white"/>']
    for j, c in enumerate(counts):
        if c:
            h = (Ht - 2 * pad) * c / top
            body.append(f'<rect x="{pad + j * bw:.2f}" y="{Ht - pad - h:.2f}" width="{bw:.2f}" '
                        f'height="{h:.2f}" fill="steelblue"/>')
    body.append(f'<line x1="{pad}" y1="{Ht - pad}" x2="{W - pad}" y2="{Ht - pad}" stroke="black"/>')
    body.append(f'<text x="{pad}" y="{Ht - 10}" font-size="12">0</text>')
    body.append(f'<text x="{W - pad}" y="{Ht - 10}" font-size="12" text-anchor="end">{H.b:g}</text>')
    body.append(f'<text x="{W / 2}" y="20" font-size="14" text-anchor="middle">{title} '
                f'(m={H.m:g}, overflow={H.overflow_count})</text>')
    Path(path).write_text(_svg(W, Ht, body))


_DOMAIN_COLOURS = {
    Domain.NORMAL: "#2ca02c", Domain.ATRIAL: "#1f77b4", Domain.VENTRICULAR: "#d62728",
    Domain.BUNDLE_BRANCH: "#9467bd", Domain.UNCLASSIFIED: "#7f7f7f",
}


def scatter_svg(path, report, ellipses=(), cur2_max=300.0):
    """Dispersion plane with the domain rectangles and per-beat points."""
    part = SymptomDomainPartition(report.b)
    W, Ht, pad = 640, 480, 40
    xmax = max(report.b, 1.0)
    sx = lambda v: pad + (W - 2 * pad) * min(v, xmax) / xmax
    sy = lambda v: Ht - pad - (Ht - 2 * pad) * min(v, cur2_max) / cur2_max
    body = [f'<rect width="{W}" height="{Ht}" fill="white"/>']
    rects = [(part.d0, Domain.NORMAL), (part.d1, Domain.ATRIAL), (part.d2, Domain.VENTRICULAR),
             (part.d3, Domain.BUNDLE_BRANCH)]
    for rect, dom in rects:
        x0, x1 = sx(rect.cur1.lo), sx(rect.cur1.hi)
        y0, y1 = sy(min(rect.cur2.hi, cur2_max)), sy(rect.cur2.lo)
        body.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" height="{y1 - y0:.2f}" '
                    f'fill="{_DOMAIN_COLOURS[dom]}" fill-opacity="0.12" stroke="{_DOMAIN_COLOURS[dom]}"/>')
    for r in report.beats:
        if r.cur1 is None:
            continue
        body.append(f'<circle cx="{sx(r.cur1):.2f}" cy="{sy(r.cur2):.2f}" r="2.5" '
                    f'fill="{_DOMAIN_COLOURS[r.domain]}"><title>{r.source_id} {r.label.value}</title></circle>')
    for e in ellipses:
        cx, cy = sx(e.center[0]), sy(e.center[1])
        rx = (W - 2 * pad) * e.semi_axes[0] / xmax
        ry = (Ht - 2 * pad) * e.semi_axes[1] / cur2_max
        body.append(f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{rx:.2f}" ry="{ry:.2f}" fill="none" '
                    f'stroke="black" transform="rotate({-np.degrees(e.angle):.2f} {cx:.2f} {cy:.2f})"/>')
    body.append(f'<text x="{W / 2}" y="{Ht - 8}" font-size="12" text-anchor="middle">cur1</text>')
    body.append(f'<text x="12" y="{Ht / 2}" font-size="12" transform="rotate(-90 12 {Ht / 2})">cur2</text>')
    Path(path).write_text(_svg(W, Ht, body))


def safe_name(source_id):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in source_id) or "beat"


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return Path(path)
