"""Raw ECG ingestion: WFDB/CSV readers, low-pass filtering, R-peak search and
segmentation into fixed-length heartbeats."""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import ndimage, signal

from .errors import (
    FormatError,
    ParameterError,
    ParseError,
    TruncatedDataError,
    UnsupportedFormatError,
)

log = logging.getLogger(__name__)

BEAT_LENGTH = 300
PRE_R = 100
POST_R = 200
REFERENCE_FS = 360.0


class GroundTruthLabel(str, Enum):
    N = "N"
    LBBB = "L.B.B.B."
    RBBB = "R.B.B.B."
    AP = "A.P."
    PVC = "P.V.C."
    FVN = "F.V.N."
    VF = "V.F."
    UNLABELED = "Unlabeled"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip()
        if key in _LABEL_ALIASES:
            return _LABEL_ALIASES[key]
        folded = key.upper().replace(".", "").replace(" ", "")
        if folded in _LABEL_ALIASES:
            return _LABEL_ALIASES[folded]
        raise ValueError(f"unknown beat label {text!r}")


# Class names plus the MIT-BIH annotation symbols for the same beat types.
_LABEL_ALIASES = {
    **{m.value: m for m in GroundTruthLabel},
    **{m.name: m for m in GroundTruthLabel},
    "NORMAL": GroundTruthLabel.N,
    "L": GroundTruthLabel.LBBB,
    "R": GroundTruthLabel.RBBB,
    "A": GroundTruthLabel.AP,
    "V": GroundTruthLabel.PVC,
    "F": GroundTruthLabel.FVN,
    "!": GroundTruthLabel.VF,
    "": GroundTruthLabel.UNLABELED,
    "UNLABELED": GroundTruthLabel.UNLABELED,
}


@dataclass(frozen=True)
class RawRecord:
    samples: np.ndarray
    sampling_rate: float
    source_id: str = ""
    lead: str = ""

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ParameterError("record needs a nonempty 1-D sample sequence")
        if not self.sampling_rate > 0:
            raise ParameterError(f"sampling rate must be positive, got {self.sampling_rate}")
        object.__setattr__(self, "samples", x)


@dataclass(frozen=True)
class Heartbeat:
    samples: np.ndarray
    r_index: int = PRE_R
    annotation: GroundTruthLabel = GroundTruthLabel.UNLABELED
    source_id: str = ""

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.shape != (BEAT_LENGTH,):
            raise ParameterError(f"heartbeat must have exactly {BEAT_LENGTH} samples, got {x.shape}")
        if not 0 <= self.r_index < BEAT_LENGTH:
            raise ParameterError(f"r_index {self.r_index} outside [0, {BEAT_LENGTH})")
        object.__setattr__(self, "samples", x)
        if not isinstance(self.annotation, GroundTruthLabel):
            object.__setattr__(self, "annotation", GroundTruthLabel.parse(self.annotation))


# --- WFDB --------------------------------------------------------------------


@dataclass
class SignalSpec:
    file_name: str
    fmt: int
    gain: float
    baseline: int
    units: str = "mV"
    description: str = ""


@dataclass
class WfdbHeader:
    record_name: str
    n_signals: int
    sampling_rate: float
    n_samples: int | None
    signals: list = field(default_factory=list)


def _parse_gain(token, adc_zero):
    # gain[(baseline)][/units]
    units = "mV"
    if "/" in token:
        token, units = token.split("/", 1)
    baseline = adc_zero
    if "(" in token:
        token, rest = token.split("(", 1)
        if not rest.endswith(")"):
            raise FormatError(f"bad baseline in gain field {token!r}")
        baseline = int(rest[:-1])
    gain = float(token) if token else 0.0
    return (gain if gain != 0 else 200.0), baseline, units


def parse_header(text):
    """Parse a WFDB ``.hea`` header (record line plus one line per signal)."""
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty header")
    rec = lines[0].split()
    try:
        name = rec[0]
        n_sig = int(rec[1])
        fs = float(rec[2].split("/")[0].split("(")[0]) if len(rec) > 2 else 250.0
        n_samples = int(rec[3]) if len(rec) > 3 else None
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed record line {lines[0]!r}") from exc
    if "/" in name:
        raise FormatError("multi-segment records are not supported")
    if len(lines) < 1 + n_sig:
        raise FormatError(f"header declares {n_sig} signals but lists {len(lines) - 1}")
    signals = []
    for ln in lines[1 : 1 + n_sig]:
        tok = ln.split()
        try:
            fmt = int(tok[1].split("x")[0].split(":")[0].split("+")[0])
            adc_zero = int(tok[4]) if len(tok) > 4 else 0
            gain, baseline, units = _parse_gain(tok[2], adc_zero) if len(tok) > 2 else (200.0, 0, "mV")
        except (IndexError, ValueError) as exc:
            raise FormatError(f"malformed signal line {ln!r}") from exc
        desc = " ".join(tok[8:]) if len(tok) > 8 else ""
        signals.append(SignalSpec(tok[0], fmt, gain, baseline, units, desc))
    return WfdbHeader(name, n_sig, fs, n_samples, signals)


def decode_212(data, n_values):
    """Unpack ``n_values`` 12-bit two's-complement samples from format-212 bytes.

    Each 3-byte group holds two samples: the first is byte0 plus the low nibble
    of byte1 as its high bits, the second is byte2 plus the high nibble of byte1.
    """
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    n_groups = (n_values + 1) // 2
    need = 3 * n_groups if n_values % 2 == 0 else 3 * (n_groups - 1) + 2
    if buf.size < need:
        raise TruncatedDataError(f"format 212 needs {need} bytes for {n_values} samples, got {buf.size}")
    padded = np.zeros(3 * n_groups, dtype=np.uint8)
    padded[: min(buf.size, 3 * n_groups)] = buf[: 3 * n_groups]
    g = padded.reshape(-1, 3).astype(np.int32)
    first = g[:, 0] | ((g[:, 1] & 0x0F) << 8)
    second = g[:, 2] | ((g[:, 1] & 0xF0) << 4)
    out = np.empty(2 * n_groups, dtype=np.int32)
    out[0::2] = first
    out[1::2] = second
    out[out > 2047] -= 4096
    return out[:n_values]


def encode_212(values):
    """Pack integer samples into format-212 bytes (inverse of ``decode_212``)."""
    v = np.asarray(values, dtype=np.int64)
    if np.any((v < -2048) | (v > 2047)):
        raise ParameterError("format 212 holds values in [-2048, 2047]")
    if v.size % 2:
        v = np.append(v, 0)
    u = (v & 0xFFF).reshape(-1, 2)
    out = np.empty((u.shape[0], 3), dtype=np.uint8)
    out[:, 0] = u[:, 0] & 0xFF
    out[:, 1] = ((u[:, 0] >> 8) & 0x0F) | (((u[:, 1] >> 8) & 0x0F) << 4)
    out[:, 2] = u[:, 1] & 0xFF
    return out.tobytes()


def _decode(data, fmt, n_values):
    if fmt == 212:
        return decode_212(data, n_values)
    if fmt == 16:
        if len(data) < 2 * n_values:
            raise TruncatedDataError(f"format 16 needs {2 * n_values} bytes, got {len(data)}")
        return np.frombuffer(bytes(data[: 2 * n_values]), dtype="<i2").astype(np.int32)
    raise UnsupportedFormatError(f"WFDB format {fmt} is not supported (only 212 and 16)")


def read_wfdb_record(header_bytes, data_bytes, channel=0):
    """Decode one channel of a single-file WFDB record into physical units.

    ``header_bytes``/``data_bytes`` are the contents of the ``.hea`` and ``.dat``
    files. Samples come back as ``(raw - baseline) / gain``.
    """
    hdr = parse_header(header_bytes)
    if not 0 <= channel < hdr.n_signals:
        raise ParameterError(f"channel {channel} out of range for {hdr.n_signals} signals")
    files = {s.file_name for s in hdr.signals}
    fmts = {s.fmt for s in hdr.signals}
    if len(files) > 1 or len(fmts) > 1:
        raise UnsupportedFormatError("signals split over several files or formats")
    fmt = fmts.pop()
    if fmt not in (212, 16):
        raise UnsupportedFormatError(f"WFDB format {fmt} is not supported (only 212 and 16)")
    data = bytes(data_bytes)
    bytes_per_frame = hdr.n_signals * (1.5 if fmt == 212 else 2)
    if hdr.n_samples is not None:
        n_frames = hdr.n_samples
    else:
        n_frames = int(len(data) // bytes_per_frame)
    raw = _decode(data, fmt, n_frames * hdr.n_signals).reshape(n_frames, hdr.n_signals)
    spec = hdr.signals[channel]
    phys = (raw[:, channel] - spec.baseline) / spec.gain
    return RawRecord(phys, hdr.sampling_rate, hdr.record_name, spec.description)


def read_wfdb(path, channel=0):
    """Read ``<path>.hea`` and the ``.dat`` file it names."""
    stem = str(path)
    if stem.endswith(".hea") or stem.endswith(".dat"):
        stem = stem[:-4]
    with open(stem + ".hea", "rb") as fh:
        header = fh.read()
    hdr = parse_header(header)
    dat = os.path.join(os.path.dirname(stem), hdr.signals[0].file_name)
    with open(dat, "rb") as fh:
        data = fh.read()
    return read_wfdb_record(header, data, channel)


# --- CSV ---------------------------------------------------------------------


def read_csv_record(stream, sampling_rate, column=0, source_id="csv", skip_header=False):
    """Read a path or text stream with one numeric value per row (or ``column``).

    Parse errors cite the 1-based line number.
    """
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, newline="") as fh:
            return read_csv_record(fh, sampling_rate, column, source_id=os.path.basename(str(stream)),
                                   skip_header=skip_header)
    values = []
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if skip_header and lineno == 1:
            continue
        if not row or all(not c.strip() for c in row):
            continue
        try:
            values.append(float(row[column]))
        except (ValueError, IndexError):
            raise ParseError(f"cannot read a number from {row!r}", line=lineno) from None
    if not values:
        raise ParseError("no samples in CSV input")
    return RawRecord(np.array(values), float(sampling_rate), source_id)


def read_label_csv(stream):
    """Annotation sidecar: rows of ``sample_index,label``. Returns (indices, labels)."""
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, newline="") as fh:
            return read_label_csv(fh)
    idx, labels = [], []
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row or not row[0].strip():
            continue
        try:
            i = int(row[0])
        except ValueError:
            if lineno == 1:
                continue  # header row
            raise ParseError(f"bad sample index {row[0]!r}", line=lineno) from None
        try:
            lab = GroundTruthLabel.parse(row[1] if len(row) > 1 else "")
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        idx.append(i)
        labels.append(lab)
    order = np.argsort(idx, kind="stable")
    return np.asarray(idx, dtype=int)[order], [labels[i] for i in order]


# --- filtering and segmentation ----------------------------------------------


def lowpass_filter(record, cutoff=50.0, order=4):
    """Zero-phase Butterworth low-pass (forward-backward, second-order sections)."""
    nyq = record.sampling_rate / 2.0
    if not 0 < cutoff < nyq:
        raise ParameterError(f"cutoff {cutoff} Hz must lie in (0, {nyq}) Hz")
    sos = signal.butter(order, cutoff, btype="low", fs=record.sampling_rate, output="sos")
    x = record.samples
    padlen = min(3 * (2 * len(sos) + 1), len(x) - 1)
    y = signal.sosfiltfilt(sos, x, padlen=max(padlen, 0)) if len(x) > 1 else x.copy()
    return replace(record, samples=y)


def detect_r_peaks(record, threshold_ratio=0.6, window_s=2.0, refractory_s=0.2):
    """Threshold-and-argmax R-peak search.

    The signal is centred on its median; a sample is supra-threshold when it
    exceeds ``threshold_ratio`` times the centred rolling maximum over
    ``window_s`` seconds. Each supra-threshold run contributes its argmax.
    Candidates are then accepted tallest first, skipping any within
    ``refractory_s`` of an accepted one, and a peak is kept only if it is the
    signal maximum within its refractory window.
    """
    x = record.samples - np.median(record.samples)
    fs = record.sampling_rate
    refractory = max(1, int(round(refractory_s * fs)))
    size = max(1, int(round(window_s * fs)))
    rolling = ndimage.maximum_filter1d(x, size=size, mode="nearest")
    above = (x > threshold_ratio * rolling) & (rolling > 0)
    if not above.any():
        return np.array([], dtype=int)
    edges = np.diff(above.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    candidates = np.array([s + int(np.argmax(x[s:e])) for s, e in zip(starts, stops)])
    local_max = ndimage.maximum_filter1d(x, size=2 * refractory - 1, mode="nearest")
    kept = []
    for p in candidates[np.argsort(-x[candidates], kind="stable")]:
        if x[p] < local_max[p]:
            continue
        if all(abs(p - q) >= refractory for q in kept):
            kept.append(p)
    return np.sort(np.asarray(kept, dtype=int))


def segment_heartbeats(record, peaks, labels=None, pre=PRE_R, post=POST_R, tolerance_s=0.1):
    """Cut a ``pre + post`` window around each R-peak.

    At 360 Hz this is a plain slice ``[p - pre, p + post)``; other rates are
    linearly resampled onto 300 points spanning the same time interval. Peaks
    without room for the full window are skipped. ``labels`` is an optional
    ``(sample_indices, labels)`` pair; each beat takes the nearest annotation
    within ``tolerance_s``.
    """
    x = record.samples
    n = len(x)
    ratio = record.sampling_rate / REFERENCE_FS
    offsets = (np.arange(pre + post) - pre) * ratio
    beats = []
    for p in np.asarray(peaks, dtype=int):
        lo, hi = p + offsets[0], p + offsets[-1]
        if lo < 0 or hi > n - 1:
            log.info("skipping peak at %d in %s: window [%g, %g] exceeds record", p, record.source_id, lo, hi)
            continue
        if ratio == 1.0:
            seg = x[p - pre : p + post].copy()
        else:
            seg = np.interp(p + offsets, np.arange(n), x)
        ann = GroundTruthLabel.UNLABELED
        if labels is not None and len(labels[0]):
            idx, labs = labels
            j = int(np.argmin(np.abs(idx - p)))
            if abs(idx[j] - p) <= tolerance_s * record.sampling_rate:
                ann = labs[j]
        beats.append(Heartbeat(seg, pre, ann, f"{record.source_id}:{p}"))
    return beats


def normalize_beat(beat, method="zscore"):
    """Amplitude normalization applied before embedding.

    ``zscore`` removes the mean and divides by the standard deviation (a flat
    beat is only centred). ``none`` returns the beat unchanged.
    """
    if method == "none":
        return beat
    if method != "zscore":
        raise ParameterError(f"unknown amplitude normalization {method!r}")
    x = beat.samples - beat.samples.mean()
    sd = x.std()
    if sd > 0:
        x = x / sd
    return replace(beat, samples=x)


def record_to_beats(record, labels=None, cutoff=50.0):
    filtered = lowpass_filter(record, cutoff)
    peaks = detect_r_peaks(filtered)
    return segment_heartbeats(filtered, peaks, labels)
