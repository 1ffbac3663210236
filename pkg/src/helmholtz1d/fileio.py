"""File formats: profile JSON, trace CSV + sidecar, reports, run manifests.

All floating-point output uses 17 significant digits so that values survive
a write/read cycle bit-for-bit.  Files are written to a temporary name in the
target directory and renamed into place, so a reader never sees a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ValidationError
from .medium import (
    ROLES,
    AcquisitionGeometry,
    ComplexTrace,
    FrequencyBand,
    LayerSequence,
    WaveSpeedProfile,
    discretize_speed,
    layers_to_profile,
)

FLOAT_FMT = "%.17g"


def fmt(x: float) -> str:
    return FLOAT_FMT % x


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


# -- profiles -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProfileSpec:
    """A loaded medium: the staircase used for synthesis, the source position,
    and the ground truth to score against (an analytic speed for presets)."""

    profile: WaveSpeedProfile
    x0: float = 0.0
    truth: Callable | None = None

    @property
    def reference(self) -> Callable:
        return self.truth if self.truth is not None else self.profile


def _analytic(preset: str, p: dict) -> Callable:
    c0 = float(p.get("c0", 1.0))
    if preset == "linear":
        slope = float(p.get("slope", 0.0))
        return lambda x: c0 + slope * np.asarray(x, dtype=float)
    amp = float(p.get("amplitude", 0.5))
    center = float(p.get("center", 30.0))
    width = float(p.get("width", 40.0))
    return lambda x: c0 + amp * np.exp(-((np.asarray(x, dtype=float) - center) ** 2) / width)


PRESETS = ("constant", "linear", "smooth-bump", "staircase")


def profile_from_dict(spec: dict) -> ProfileSpec:
    """Build a medium from its JSON description.

    Either ``{"c0", "x0", "jumps": [[x, c], ...]}`` or ``{"preset", "params"}``:

    * ``constant``: ``c0``.
    * ``linear``: ``c(x) = c0 + slope x``, discretized with ``delta0`` and ``n``.
    * ``smooth-bump``: ``c0 + amplitude exp(-(x - center)^2 / width)``, likewise.
    * ``staircase``: equal-travel-time layers from ``r`` (list) and ``delta0``,
      or ``n`` seeded random reflectivities in ``[-rmax, rmax]``.
    """
    if "preset" in spec:
        preset = spec["preset"]
        p = dict(spec.get("params", {}))
        x0 = float(p.get("x0", spec.get("x0", 0.0)))
        c0 = float(p.get("c0", 1.0))
        if preset == "constant":
            return ProfileSpec(WaveSpeedProfile.constant(c0), x0)
        if preset in ("linear", "smooth-bump"):
            c = _analytic(preset, p)
            try:
                delta0, n = float(p["delta0"]), int(p["n"])
            except KeyError as exc:
                raise ValidationError(f"preset {preset!r} needs params.{exc.args[0]}") from exc
            return ProfileSpec(discretize_speed(c, x0, delta0, n), x0, c)
        if preset == "staircase":
            delta0 = float(p.get("delta0", 1.0))
            if "r" in p:
                r = np.asarray(p["r"], dtype=float)
            else:
                rng = np.random.default_rng(int(p.get("seed", 0)))
                rmax = float(p.get("rmax", 0.5))
                r = rng.uniform(-rmax, rmax, int(p.get("n", 10)))
            return ProfileSpec(layers_to_profile(LayerSequence.equal(r, delta0, x0=x0, c0=c0)), x0)
        raise ValidationError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    if "c0" not in spec:
        raise ValidationError("profile JSON needs 'c0' (and optionally 'x0', 'jumps') or 'preset'")
    jumps = spec.get("jumps", [])
    if any(len(j) != 2 for j in jumps):
        raise ValidationError("each jump must be a pair [x, c]")
    return ProfileSpec(WaveSpeedProfile.from_jumps(float(spec["c0"]), jumps), float(spec.get("x0", 0.0)))


def profile_to_dict(profile: WaveSpeedProfile, x0: float = 0.0) -> dict:
    return {"c0": profile.c0, "x0": x0, "jumps": [[x, c] for x, c in profile.jumps]}


def load_profile(path) -> ProfileSpec:
    return profile_from_dict(read_json(path))


def profile_csv(profile: WaveSpeedProfile, x0: float = 0.0) -> str:
    """Staircase breakpoints ``x,c`` for plotting: each jump appears twice."""
    rows = ["x,c", f"{fmt(x0)},{fmt(profile.c0)}"]
    c_prev = profile.c0
    for x, c in profile.jumps:
        rows.append(f"{fmt(x)},{fmt(c_prev)}")
        rows.append(f"{fmt(x)},{fmt(c)}")
        c_prev = c
    return "\n".join(rows) + "\n"


# -- traces ---------------------------------------------------------------------


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_trace(path, trace: ComplexTrace, geometry: AcquisitionGeometry | None = None, c0: float | None = None, extra: dict | None = None) -> tuple[Path, Path]:
    """Write ``omega,re,im`` rows plus a JSON sidecar describing the band."""
    buf = io.StringIO()
    buf.write("omega,re,im\n")
    for w, v in zip(trace.omegas, trace.values):
        buf.write(f"{fmt(w)},{fmt(v.real)},{fmt(v.imag)}\n")
    csv_path = atomic_write_text(path, buf.getvalue())
    meta = {
        "role": trace.role,
        "omega_min": trace.band.omega_min,
        "omega_max": trace.band.omega_max,
        "N": trace.band.N,
    }
    if geometry is not None:
        meta["geometry"] = {"x0": geometry.x0, "x_star": geometry.x_star}
    if c0 is not None:
        meta["c0"] = c0
    if extra:
        meta.update(extra)
    return csv_path, write_json(sidecar_path(path), meta)


def read_trace(path) -> tuple[ComplexTrace, dict]:
    """Read a trace and its sidecar; returns the trace and the sidecar dict."""
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise ValidationError(f"missing sidecar {meta_path}")
    meta = read_json(meta_path)
    for key in ("role", "omega_min", "omega_max", "N"):
        if key not in meta:
            raise ValidationError(f"sidecar {meta_path} lacks {key!r}")
    if meta["role"] not in ROLES:
        raise ValidationError(f"unknown trace role {meta['role']!r}")
    band = FrequencyBand(float(meta["omega_min"]), float(meta["omega_max"]), int(meta["N"]))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["omega", "re", "im"]:
            raise ValidationError(f"{path}: expected header omega,re,im")
        rows = np.array([[float(v) for v in row] for row in reader if row])
    if rows.shape != (band.N, 3):
        raise ValidationError(f"{path}: expected {band.N} rows, found {rows.shape[0] if rows.ndim else 0}")
    if not np.allclose(rows[:, 0], band.omegas, rtol=1e-12, atol=1e-12 * max(1.0, abs(band.omega_max))):
        raise ValidationError(f"{path}: frequencies disagree with the sidecar band")
    return ComplexTrace(band, rows[:, 1] + 1j * rows[:, 2], meta["role"]), meta


def geometry_from_meta(meta: dict) -> AcquisitionGeometry | None:
    g = meta.get("geometry")
    return AcquisitionGeometry(float(g["x0"]), float(g["x_star"])) if g else None


# -- manifests ------------------------------------------------------------------


def _version_stamp() -> dict:
    from . import __version__

    stamp = {"version": __version__}
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0:
            stamp["git"] = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return stamp


@dataclass
class RunManifest:
    """Record of one CLI run; ``duration`` is the only timing-dependent field."""

    command: str
    params: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int | None = None
    duration: float = 0.0
    status: str = "ok"
    stamp: dict = field(default_factory=_version_stamp)

    def write(self, out_dir) -> Path:
        return write_json(Path(out_dir) / f"{self.command}.manifest.json", asdict(self))
