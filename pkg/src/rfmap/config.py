"""Flat key=value pipeline configuration.

Recognized keys: kernel, ng, resize_w, resize_h, nmi_bins, threads, seed,
features (comma-separated canonical names). Blank lines and lines starting
with # are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import RfmConfig

__all__ = ["PipelineConfig", "load_config"]

_INT_KEYS = ("kernel", "ng", "resize_w", "resize_h", "nmi_bins", "threads", "seed")


@dataclass(frozen=True)
class PipelineConfig:
    kernel: int = 13
    ng: int = 32
    resize_w: int = 256
    resize_h: int = 256
    nmi_bins: int = 32
    threads: int = 1
    seed: int = 0
    features: tuple = None

    def __post_init__(self):
        self.rfm_config()  # kernel/ng/features share the extraction invariants
        if self.resize_w < 1 or self.resize_h < 1:
            raise ValueError("resize target must be positive")
        if self.nmi_bins < 2:
            raise ValueError("nmi_bins must be at least 2")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def rfm_config(self) -> RfmConfig:
        return RfmConfig(kernel=self.kernel, ng=self.ng, features=self.features)


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from None
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: {key} must be an integer") from None
        elif key == "features":
            values[key] = tuple(f.strip() for f in val.split(",") if f.strip())
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    try:
        return PipelineConfig(**values)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
