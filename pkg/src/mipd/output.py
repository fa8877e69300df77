"""CSV and run-manifest emission.

All reals are printed with 17 significant digits so that every binary64
value round-trips exactly; identical invocations therefore produce
byte-identical data files.  Each data file gets a companion
``<name>.manifest.json`` recording the tool version, the full parameter
record, the RNG seed where applicable, a UTC timestamp, and the SHA-256
digest of the emitted file (the timestamp lives only in the manifest, so
data-file digests are reproducible).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .topology import CriticalPoint, PhaseCurve, ScanGrid

__all__ = [
    "AxisSpec",
    "fmt",
    "write_scan_csv",
    "write_curve_csv",
    "write_critical_csv",
    "write_manifest",
    "sha256_of",
    "TOOL_VERSION",
]

TOOL_VERSION = "0.1.0"

SCAN_HEADER = "C,A,theta,d,re_z,im_z,alpha,chi_principal"
CURVE_HEADER = "theta,re_z,im_z,alpha,chi_unwrapped"
CRITICAL_HEADER = "A,C_crit,theta_crit,residual"


@dataclass(frozen=True)
class AxisSpec:
    """A closed interval sampled at ``count`` evenly spaced points."""

    start: float
    end: float
    count: int

    def __post_init__(self):
        if not (self.start < self.end):
            raise ValueError(f"axis start {self.start} must be < end {self.end}")
        if self.count < 2:
            raise ValueError(f"axis count must be >= 2, got {self.count}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.count)


def fmt(x: float) -> str:
    """17-significant-digit decimal form; exact for binary64 round trips."""
    return "%.17g" % float(x)


def _signal_fields(z: complex) -> tuple[float, float]:
    mag = abs(z)
    if mag < 1e-14:
        return math.inf, math.nan
    return -math.log(mag), np.angle(z) / 2.0


def write_scan_csv(grid: ScanGrid, path) -> Path:
    """Grid rows in row-major order: A outer, C inner."""
    path = Path(path)
    lines = [SCAN_HEADER]
    for i, a in enumerate(grid.A_values):
        for j, c in enumerate(grid.C_values):
            z = grid.z[i, j]
            alpha, chi = _signal_fields(z)
            lines.append(
                f"{fmt(c)},{fmt(a)},{fmt(grid.theta)},{grid.d:+d},"
                f"{fmt(z.real)},{fmt(z.imag)},{fmt(alpha)},{fmt(chi)}"
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_curve_csv(curve: PhaseCurve, path) -> Path:
    path = Path(path)
    lines = [CURVE_HEADER]
    for theta, z, chi in zip(curve.theta_samples, curve.z_values, curve.chi_unwrapped):
        alpha, _ = _signal_fields(z)
        lines.append(
            f"{fmt(theta)},{fmt(z.real)},{fmt(z.imag)},{fmt(alpha)},{fmt(chi)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_critical_csv(points, path) -> Path:
    path = Path(path)
    lines = [CRITICAL_HEADER]
    for pt in points:
        lines.append(
            f"{fmt(pt.A_crit)},{fmt(pt.C_crit)},{fmt(pt.theta_crit)},{fmt(pt.residual)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_manifest(
    data_path,
    command: str,
    params: dict,
    seed: int | None = None,
    axes: dict | None = None,
) -> Path:
    """Companion manifest for one emitted data file."""
    data_path = Path(data_path)
    manifest_path = data_path.with_suffix("").with_name(
        data_path.with_suffix("").name + ".manifest.json"
    )
    with data_path.open("r", encoding="utf-8") as fh:
        rows = sum(1 for _ in fh) - 1
    record = {
        "tool": "mipd",
        "version": TOOL_VERSION,
        "command": command,
        "params": params,
        "axes": axes or {},
        "seed": seed,
        "started_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "outputs": [
            {"path": data_path.name, "sha256": sha256_of(data_path), "rows": rows}
        ],
    }
    manifest_path.write_text(
        json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest_path
