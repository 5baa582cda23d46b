"""Algorithm and pipeline configuration."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

from .embedding import EmbeddingParams
from .errors import ParameterError

CUR2_FORMS = ("paper", "corrected")
AMPLITUDE_NORMS = ("zscore", "none")
EMIT_KINDS = ("clouds", "dmatrix", "hist", "report")


@dataclass(frozen=True)
class WscecParams:
    window_length: int = 10
    stride: int = 1
    embed_dim: int = 3
    k: int = 20
    m: float = 1.0
    s: int = 0
    epsilon: float = 0.09
    covariance_normalization: str = "sum"
    cur2_form: str = "paper"
    distance_form: str = "paper"
    amplitude_norm: str = "zscore"

    def __post_init__(self):
        self.embedding  # validates l, tau, d
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if not self.m > 0:
            raise ParameterError(f"bin width m must be positive, got {self.m}")
        if self.s < 0:
            raise ParameterError(f"s must be >= 0, got {self.s}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.covariance_normalization not in ("sum", "mean"):
            raise ParameterError(f"covariance_normalization must be sum|mean, got {self.covariance_normalization!r}")
        if self.cur2_form not in CUR2_FORMS:
            raise ParameterError(f"cur2_form must be paper|corrected, got {self.cur2_form!r}")
        if self.distance_form not in ("paper", "l2"):
            raise ParameterError(f"distance_form must be paper|l2, got {self.distance_form!r}")
        if self.amplitude_norm not in AMPLITUDE_NORMS:
            raise ParameterError(f"amplitude_norm must be zscore|none, got {self.amplitude_norm!r}")

    @property
    def embedding(self):
        return EmbeddingParams(self.window_length, self.stride, self.embed_dim)

    @property
    def curvature_cap(self):
        """``3 d (d - 1) / epsilon``: the ceiling on the histogram range."""
        d = self.embed_dim
        return 3.0 * d * (d - 1) / self.epsilon

    def to_dict(self):
        return asdict(self)


@dataclass
class PipelineConfig:
    inputs: list = field(default_factory=list)
    input_format: str = "wfdb"
    out_dir: str = "out"
    params: WscecParams = field(default_factory=WscecParams)
    emit: frozenset = frozenset({"report"})
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    standard_beat: str | None = None
    channel: int = 0
    sampling_rate: float = 360.0
    already_segmented: bool = False
    labels: str | None = None

    def __post_init__(self):
        unknown = set(self.emit) - set(EMIT_KINDS)
        if unknown:
            raise ParameterError(f"unknown emit kinds {sorted(unknown)}; choose from {EMIT_KINDS}")
        if self.jobs < 1:
            raise ParameterError("jobs must be >= 1")
