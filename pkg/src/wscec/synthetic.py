"""Synthetic single-lead heartbeats built from Gaussian waves.

Each beat is a sum of Gaussian bumps ``(centre, width, amplitude)`` in samples
and millivolts at 360 Hz, with the R-peak at sample 100, plus seeded white
noise. The class templates give each rhythm its textbook outline (early P for
A.P., wide notched QRS for bundle-branch blocks, sine-like V.F., ...).

``EXEMPLARS`` pins one noise level and seed per class. They were picked by
``scripts/calibrate_fixtures.py`` so that each exemplar lands in its class's
symptom domain with the largest margin found; they exercise the pipeline end
to end but are not evidence that the features separate real rhythms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import BEAT_LENGTH, PRE_R, GroundTruthLabel, Heartbeat

L = GroundTruthLabel

TEMPLATES = {
    L.N: ((60, 8, 0.15), (92, 2.5, -0.12), (100, 3, 1.0), (108, 2.5, -0.2), (190, 15, 0.3)),
    L.AP: ((35, 6, -0.12), (92, 2.5, -0.12), (100, 3, 1.0), (108, 2.5, -0.2), (190, 15, 0.3)),
    L.PVC: ((100, 10, 1.8), (118, 8, -0.6), (200, 20, -0.5)),
    L.FVN: ((60, 8, 0.1), (100, 6, 1.3), (112, 6, -0.4), (195, 18, -0.2)),
    L.VF: tuple((40 + 60 * i, 12, 0.8 * (-1) ** i) for i in range(5)),
    L.LBBB: ((60, 8, 0.15), (96, 5, 0.8), (110, 5, 0.9), (200, 18, -0.35)),
    L.RBBB: ((60, 8, 0.15), (95, 3, 0.5), (102, 3, -0.3), (112, 5, 0.8), (190, 15, 0.25)),
}


@dataclass(frozen=True)
class SyntheticSpec:
    label: GroundTruthLabel
    noise: float
    seed: int

    def beat(self):
        return synthetic_beat(self.label, self.noise, self.seed)


def waveform(waves, n=BEAT_LENGTH):
    t = np.arange(n, dtype=float)
    x = np.zeros(n)
    for centre, width, amp in waves:
        x += amp * np.exp(-0.5 * ((t - centre) / width) ** 2)
    return x


def synthetic_beat(label, noise=0.03, seed=0, source_id=None):
    label = GroundTruthLabel.parse(label)
    x = waveform(TEMPLATES[label])
    x = x + np.random.default_rng(seed).normal(0.0, noise, x.size)
    sid = source_id or f"synthetic-{label.name}-{seed}"
    return Heartbeat(x, PRE_R, label, sid)


def synthetic_record(labels, noise=0.03, seed=0, fs=360.0, rr=None):
    """Concatenate clean templates into a continuous record with R-peaks ``rr``
    samples apart; returns ``(samples, peak_indices)``."""
    rng = np.random.default_rng(seed)
    rr = rr or int(0.9 * fs)
    n = rr * (len(labels) + 1)
    x = np.zeros(n)
    peaks = []
    for i, lab in enumerate(labels):
        p = rr * (i + 1)
        shape = waveform(TEMPLATES[GroundTruthLabel.parse(lab)])
        lo = p - PRE_R
        x[lo : lo + BEAT_LENGTH] += shape
        peaks.append(p)
    return x + rng.normal(0.0, noise, n), np.asarray(peaks)


# Frozen by scripts/calibrate_fixtures.py; rerun it after changing TEMPLATES.
EXEMPLARS = {
    L.N: SyntheticSpec(L.N, 0.03, 19),
    L.AP: SyntheticSpec(L.AP, 0.06, 16),
    L.PVC: SyntheticSpec(L.PVC, 0.2, 23),
    L.FVN: SyntheticSpec(L.FVN, 0.15, 11),
    L.VF: SyntheticSpec(L.VF, 0.12, 11),
    L.LBBB: SyntheticSpec(L.LBBB, 0.25, 23),
    L.RBBB: SyntheticSpec(L.RBBB, 0.25, 19),
}
STANDARD = EXEMPLARS[L.N]


def standard_beat():
    return STANDARD.beat()


def exemplar_batch():
    return [spec.beat() for spec in EXEMPLARS.values()]
