"""Wave-speed profiles and their travel-time/reflectivity coordinates.

A piecewise-constant speed ``c(x)`` with jumps ``x_1 < ... < x_n`` is stored as
a :class:`WaveSpeedProfile`.  The inversion works instead with a
:class:`LayerSequence`: per-layer travel times ``delta_j`` and interface
reflectivities ``r_j``, anchored at the source position ``x0``.

Evaluation uses the half-open convention: ``c = c0`` on ``(-inf, x_1]``,
``c_j`` on ``(x_j, x_{j+1}]`` and ``c_n`` on ``(x_n, inf)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, GeometryError, ReflectivityRangeError, SingularFrequencyError, ValidationError

ROLE_MEASURED = "measured-d"
ROLE_REFLECTION = "reflection-R"
ROLES = (ROLE_MEASURED, ROLE_REFLECTION)


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WaveSpeedProfile:
    """Step-function wave speed.

    Parameters
    ----------
    c0 : float
        Speed to the left of the first jump (at the source).
    positions : array_like, shape (n,)
        Strictly increasing jump points ``x_j``.
    speeds : array_like, shape (n,)
        Speed ``c_j`` immediately to the right of ``x_j``.
    """

    c0: float
    positions: np.ndarray
    speeds: np.ndarray

    def __post_init__(self):
        positions = _frozen_array(self.positions)
        speeds = _frozen_array(self.speeds)
        if positions.shape != speeds.shape:
            raise ValidationError("positions and speeds must have equal length")
        if not np.isfinite(self.c0) or self.c0 <= 0:
            raise DomainError(f"c0 must be a positive finite speed, got {self.c0!r}")
        if np.any(~np.isfinite(speeds)) or np.any(speeds <= 0):
            raise DomainError("all layer speeds must be positive and finite")
        if np.any(~np.isfinite(positions)):
            raise ValidationError("jump positions must be finite")
        if np.any(np.diff(positions) <= 0):
            raise ValidationError("jump positions must be strictly increasing")
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "speeds", speeds)

    @classmethod
    def from_jumps(cls, c0: float, jumps: Sequence[Sequence[float]] = ()) -> "WaveSpeedProfile":
        """Build from ``[(x_1, c_1), ..., (x_n, c_n)]``."""
        jumps = np.asarray(jumps, dtype=float).reshape(-1, 2)
        return cls(c0, jumps[:, 0], jumps[:, 1])

    @classmethod
    def constant(cls, c0: float) -> "WaveSpeedProfile":
        return cls(c0, np.empty(0), np.empty(0))

    @property
    def n(self) -> int:
        return int(self.positions.size)

    @property
    def all_speeds(self) -> np.ndarray:
        """``(c_0, c_1, ..., c_n)``."""
        return np.concatenate(([self.c0], self.speeds))

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return [(float(x), float(c)) for x, c in zip(self.positions, self.speeds)]

    def layer_index(self, x) -> np.ndarray:
        """Index ``j`` of the layer containing ``x`` (0 for the source region)."""
        return np.searchsorted(self.positions, np.asarray(x, dtype=float), side="left")

    def __call__(self, x):
        idx = self.layer_index(x)
        out = self.all_speeds[idx]
        return float(out) if np.ndim(out) == 0 else out

    def travel_time(self, x0: float, x: float) -> float:
        """One-way travel time from ``x0`` to ``x >= x0`` through the profile."""
        if x < x0:
            raise GeometryError("travel_time expects x >= x0")
        knots = np.concatenate(([x0], self.positions[(self.positions > x0) & (self.positions < x)], [x]))
        speeds = self(knots[:-1] + 0.5 * np.diff(knots)) if knots.size > 1 else np.empty(0)
        return float(np.sum(np.diff(knots) / speeds))

    def depth_at_travel_time(self, x0: float, t: float) -> float:
        """Position reached from ``x0`` after one-way travel time ``t``."""
        if t < 0:
            raise ValidationError("travel time must be non-negative")
        x, c, remaining = float(x0), self(x0 + 0.0), float(t)
        for xj, cj in zip(self.positions, self.speeds):
            if xj <= x0:
                c = cj
                continue
            step = (xj - x) / c
            if step >= remaining:
                break
            remaining -= step
            x, c = float(xj), float(cj)
        return x + c * remaining


@dataclass(frozen=True, eq=False)
class LayerSequence:
    """Travel-time/reflectivity description of a layered medium.

    ``delta[j-1]`` is the travel time across layer ``j`` (from ``x_{j-1}`` to
    ``x_j`` at speed ``c_{j-1}``); ``r[j-1]`` is the reflectivity of the jump
    at ``x_j``.
    """

    x0: float
    c0: float
    delta: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        delta = _frozen_array(self.delta)
        r = _frozen_array(self.r)
        if delta.shape != r.shape:
            raise ValidationError("delta and r must have equal length")
        if self.c0 <= 0:
            raise DomainError("c0 must be positive")
        if np.any(delta <= 0):
            raise ValidationError("all travel times must be positive")
        if np.any(np.abs(r) >= 1):
            raise ReflectivityRangeError("all reflectivities must satisfy |r| < 1")
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "r", r)

    @classmethod
    def equal(cls, r, delta0: float, x0: float = 0.0, c0: float = 1.0) -> "LayerSequence":
        r = np.asarray(r, dtype=float)
        return cls(x0, c0, np.full(r.shape, float(delta0)), r)

    @property
    def n(self) -> int:
        return int(self.r.size)

    @property
    def layers(self) -> list[tuple[float, float]]:
        return [(float(d), float(r)) for d, r in zip(self.delta, self.r)]


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Source position ``x0`` and receiver position ``x_star``."""

    x0: float
    x_star: float

    def __post_init__(self):
        if not self.x0 < self.x_star:
            raise GeometryError(f"receiver x_star={self.x_star} must lie right of source x0={self.x0}")

    def validate_for(self, profile: WaveSpeedProfile) -> None:
        if profile.n and not self.x_star < profile.positions[0]:
            raise GeometryError(
                f"receiver x_star={self.x_star} must lie left of the first jump x_1={profile.positions[0]}"
            )

    @classmethod
    def midpoint(cls, profile: WaveSpeedProfile, x0: float = 0.0) -> "AcquisitionGeometry":
        """Receiver halfway between the source and the first jump."""
        if profile.n == 0:
            return cls(x0, x0 + 0.5)
        return cls(x0, 0.5 * (x0 + float(profile.positions[0])))


@dataclass(frozen=True)
class FrequencyBand:
    """Midpoint sampling of ``(omega_min, omega_max)`` with ``N`` samples."""

    omega_min: float
    omega_max: float
    N: int

    def __post_init__(self):
        if not self.omega_min < self.omega_max:
            raise ValidationError("omega_min must be smaller than omega_max")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        if np.any(self.omegas == 0.0):
            raise SingularFrequencyError("a sample midpoint lands exactly on omega = 0")

    @property
    def width(self) -> float:
        return self.omega_max - self.omega_min

    @property
    def spacing(self) -> float:
        return self.width / self.N

    @property
    def omegas(self) -> np.ndarray:
        return self.omega_min + (np.arange(self.N) + 0.5) * self.spacing

    def shifted(self, offset: float) -> "FrequencyBand":
        return FrequencyBand(self.omega_min + offset, self.omega_max + offset, self.N)

    @classmethod
    def centered(cls, width: float, N: int, center: float = 0.0) -> "FrequencyBand":
        return cls(center - 0.5 * width, center + 0.5 * width, N)


@dataclass(frozen=True, eq=False)
class ComplexTrace:
    """Complex samples on a :class:`FrequencyBand`, tagged by role."""

    band: FrequencyBand
    values: np.ndarray
    role: str = ROLE_MEASURED

    def __post_init__(self):
        values = _frozen_array(self.values, dtype=complex)
        if values.size != self.band.N:
            raise ValidationError(f"trace has {values.size} samples but the band has N={self.band.N}")
        if self.role not in ROLES:
            raise ValidationError(f"unknown trace role {self.role!r}")
        object.__setattr__(self, "values", values)

    @property
    def omegas(self) -> np.ndarray:
        return self.band.omegas

    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))


def profile_to_layers(profile: WaveSpeedProfile, x0: float = 0.0) -> LayerSequence:
    """Travel times and reflectivities of ``profile`` seen from source ``x0``."""
    if profile.n and not x0 < profile.positions[0]:
        raise GeometryError(f"source x0={x0} must lie left of the first jump x_1={profile.positions[0]}")
    knots = np.concatenate(([x0], profile.positions))
    c = profile.all_speeds
    delta = np.diff(knots) / c[:-1]
    r = (c[1:] - c[:-1]) / (c[1:] + c[:-1])
    return LayerSequence(x0, profile.c0, delta, r)


def layers_to_profile(seq: LayerSequence) -> WaveSpeedProfile:
    """Invert :func:`profile_to_layers`.

    ``c_j = c0 exp(2 sum_{i<=j} atanh r_i)`` and
    ``x_j = x0 + sum_{i<=j} c_{i-1} delta_i``.
    """
    r = np.asarray(seq.r, dtype=float)
    if np.any(np.abs(r) >= 1):
        raise ReflectivityRangeError("all reflectivities must satisfy |r| < 1")
    speeds = seq.c0 * np.exp(2.0 * np.cumsum(np.arctanh(r)))
    left = np.concatenate(([seq.c0], speeds[:-1]))
    positions = seq.x0 + np.cumsum(left * seq.delta)
    return WaveSpeedProfile(seq.c0, positions, speeds)


def minimal_layers(seq: LayerSequence) -> LayerSequence:
    """Drop zero-reflectivity interfaces.

    A zero reflectivity is not a jump, so its travel time is carried into the
    next genuine interface; trailing zero layers vanish.
    """
    delta, r = [], []
    carry = 0.0
    for dj, rj in zip(seq.delta, seq.r):
        carry += dj
        if rj != 0.0:
            delta.append(carry)
            r.append(rj)
            carry = 0.0
    return LayerSequence(seq.x0, seq.c0, delta, r)


def discretize_speed(c: Callable[[float], float], x0: float, delta0: float, n: int) -> WaveSpeedProfile:
    """Equal-travel-time staircase approximation of a speed function.

    Uses left-endpoint sampling: ``x_{j+1} = x_j + c(x_j) delta0`` and the layer
    right of ``x_j`` gets speed ``c(x_j)``.
    """
    if delta0 <= 0:
        raise ValidationError("delta0 must be positive")
    if n < 0:
        raise ValidationError("n must be non-negative")

    def sample(x):
        value = float(c(x))
        if not np.isfinite(value) or value <= 0:
            raise DomainError(f"speed function returned {value!r} at x={x}")
        return value

    c0 = sample(x0)
    positions = np.empty(n)
    speeds = np.empty(n)
    x, cx = float(x0), c0
    for j in range(n):
        x = x + cx * delta0
        cx = sample(x)
        positions[j] = x
        speeds[j] = cx
    return WaveSpeedProfile(c0, positions, speeds)


def relative_l2_error(recovered: WaveSpeedProfile, truth, x_start: float, x_end: float, n_grid: int = 20000) -> float:
    """Relative L2 misfit ``||c_rec - c_true|| / ||c_true||`` on ``[x_start, x_end]``.

    Both speeds are sampled on a uniform midpoint grid of ``n_grid`` points.
    ``truth`` is a :class:`WaveSpeedProfile` or any callable speed; callables
    that do not accept arrays are evaluated pointwise.
    """
    if not x_end > x_start:
        raise ValidationError("x_end must exceed x_start")
    h = (x_end - x_start) / n_grid
    xs = x_start + (np.arange(n_grid) + 0.5) * h
    try:
        c_true = np.asarray(truth(xs), dtype=float)
        if c_true.shape != xs.shape:
            raise ValueError
    except (TypeError, ValueError):
        c_true = np.array([float(truth(x)) for x in xs])
    diff = recovered(xs) - c_true
    return float(np.sqrt(np.sum(diff**2) / np.sum(c_true**2)))
