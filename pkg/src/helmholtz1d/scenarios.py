"""Built-in benchmark media and the synth -> invert -> compare pipeline.

Three families are provided, each with fixed seeds so that results are
stable across runs:

``equal``
    15 equal-travel-time layers (``delta0 = 2``, ``c0 = 1/2``) with
    reflectivities drawn uniformly from ``[-0.5, 0.5]``.
``irregular``
    40 jumps at irregular gaps of 1-3 cells on a travel-time grid of pitch
    ``0.0105`` (``c0 = 1``), so the response is periodic with the inversion
    period even though the jumps are unevenly spaced.  Contrast is kept
    moderate (``|r| <= 0.05``): noise amplification in the coefficient
    recursion grows with contrast and with the number of cells.
``continuous``
    Smooth bump ``c(x) = 2 + 0.5 exp(-(x - a)^2 / b)`` observed through a
    staircase eight times finer (in travel time) than the reconstruction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .forward import add_noise, synth_trace
from .inversion import InversionConfig, ReconstructionReport, invert
from .medium import (
    AcquisitionGeometry,
    FrequencyBand,
    LayerSequence,
    WaveSpeedProfile,
    discretize_speed,
    layers_to_profile,
    relative_l2_error,
)

NOISY_CENTER = 400.0
NOISE_LEVEL = 0.1
N_SAMPLES = 5000


@dataclass(frozen=True, eq=False)
class Scenario:
    """A benchmark medium plus its acquisition and inversion parameters.

    ``truth`` is the object the reconstruction is scored against: the
    staircase itself, or the underlying continuous speed.
    """

    name: str
    profile: WaveSpeedProfile
    truth: Callable
    c0: float
    period: float
    n: int
    N: int = N_SAMPLES
    x0: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def delta0(self) -> float:
        return np.pi / self.period

    @property
    def geometry(self) -> AcquisitionGeometry:
        return AcquisitionGeometry.midpoint(self.profile, self.x0)

    def band(self, noisy: bool = False) -> FrequencyBand:
        center = NOISY_CENTER if noisy else 0.0
        return FrequencyBand.centered(self.period, self.N, center)


def equal_layers(n: int = 15, delta0: float = 2.0, c0: float = 0.5, rmax: float = 0.5, seed: int = 2019, x0: float = 0.0) -> WaveSpeedProfile:
    rng = np.random.default_rng(seed)
    r = rng.uniform(-rmax, rmax, n)
    return layers_to_profile(LayerSequence.equal(r, delta0, x0=x0, c0=c0))


def irregular_layers(n_jumps: int = 40, delta0: float = 0.0105, c0: float = 1.0, rmax: float = 0.05, seed: int = 7, x0: float = 0.0) -> WaveSpeedProfile:
    """Jumps at irregular multiples (gaps of 1, 2 or 3 cells) of ``delta0``."""
    rng = np.random.default_rng(seed)
    gaps = rng.integers(1, 4, n_jumps)
    r = rng.uniform(-rmax, rmax, n_jumps)
    r = np.where(np.abs(r) < 0.01, np.copysign(0.01, r), r)
    return layers_to_profile(LayerSequence(x0, c0, gaps * delta0, r))


def smooth_bump(c0: float = 2.0, amplitude: float = 0.5, center: float = 30.0, width: float = 40.0) -> Callable:
    def c(x):
        return c0 + amplitude * np.exp(-((np.asarray(x, dtype=float) - center) ** 2) / width)

    return c


def fine_staircase(c: Callable, travel_time: float, delta0: float, refine: int = 8, x0: float = 0.0) -> WaveSpeedProfile:
    """Left-endpoint staircase of ``c`` with pitch ``delta0 / refine`` covering ``travel_time``."""
    step = delta0 / refine
    return discretize_speed(c, x0, step, int(np.ceil(travel_time / step)))


def get_scenario(name: str, period: float | None = None, n: int | None = None) -> Scenario:
    """Scenario by name; ``period``/``n`` override the defaults (used by bandwidth ladders)."""
    if name == "equal":
        prof = equal_layers()
        return Scenario("equal", prof, prof, prof.c0, period or np.pi / 2, n or 15)
    if name == "irregular":
        prof = irregular_layers()
        # 40 jumps at irregular gaps span more than 40 cells; recover them all
        cells = int(round(prof.travel_time(0.0, prof.positions[-1]) / 0.0105))
        return Scenario("irregular", prof, prof, prof.c0, period or np.pi / 0.0105, n or cells)
    if name == "continuous":
        p = period or np.pi / 0.03
        depth = (n or 1000) * np.pi / p
        c = smooth_bump()
        # the fine staircase is built once at the base pitch so ladders share one medium
        prof = fine_staircase(c, 1.05 * 30.0, 0.03)
        return Scenario("continuous", prof, c, prof.c0, p, n or 1000, notes={"depth_travel_time": depth})
    raise KeyError(f"unknown scenario {name!r}")


SCENARIOS = ("equal", "irregular", "continuous")


@dataclass(frozen=True)
class BenchResult:
    scenario: str
    noise: float
    seed: int | None
    omega_min: float
    omega_max: float
    n: int
    rel_error: float
    wall_time: float

    def row(self) -> dict:
        return {
            "scenario": self.scenario,
            "noise": self.noise,
            "seed": "" if self.seed is None else self.seed,
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
            "n": self.n,
            "rel_error": self.rel_error,
            "wall_time": self.wall_time,
        }


def score(report: ReconstructionReport, scenario: Scenario) -> float:
    """Relative L2 error over the reconstruction depth."""
    return relative_l2_error(report.profile, scenario.truth, scenario.x0, report.depth)


def run_scenario(scenario: Scenario, noise: float = 0.0, seed: int | None = None, band: FrequencyBand | None = None) -> tuple[BenchResult, ReconstructionReport]:
    """Synthesize data, optionally add noise, invert, and score."""
    if band is None:
        band = scenario.band(noisy=noise > 0)
    t0 = time.perf_counter()
    geometry = scenario.geometry
    d = synth_trace(scenario.profile, geometry, band)
    if noise > 0:
        d = add_noise(d, noise, seed)
    report = invert(d, geometry, scenario.c0, InversionConfig(scenario.n, period=scenario.period))
    elapsed = time.perf_counter() - t0
    err = score(report, scenario)
    return BenchResult(scenario.name, noise, seed, band.omega_min, band.omega_max, scenario.n, err, elapsed), report


def bandwidth_ladder(name: str = "continuous", steps: int = 4, base_period: float | None = None, base_n: int | None = None):
    """Errors for periods ``p/2^(steps-1), ..., p/2, p`` at fixed reconstruction depth."""
    base = get_scenario(name)
    p_top = base_period or base.period
    n_top = base_n or base.n
    out = []
    for k in range(steps - 1, -1, -1):
        p = p_top / 2**k
        n = max(1, n_top // 2**k)
        sc = get_scenario(name, period=p, n=n)
        result, _ = run_scenario(sc)
        out.append(result)
    return out
