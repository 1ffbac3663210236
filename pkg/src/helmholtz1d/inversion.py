"""Reconstruction of the wave speed from single-receiver band-limited data.

The fast path treats the medium as ``n`` layers of common travel time
``delta0 = pi / p`` where ``p`` is the period of the surrogate reflection:

1. Fourier coefficients ``alpha_j`` of ``R`` over one period (midpoint sum).
2. Moments ``m_j`` of the orthogonality measure by back substitution.
3. Verblunsky coefficients ``r_j`` by the Szego recurrence on the moments.
4. Speeds ``c_j = c0 exp(2 sum atanh r_i)`` and jumps ``x_j = x0 + delta0 sum c_{i-1}``.

:func:`layer_strip` recovers the same reflectivities by peeling one
automorphism at a time and serves as an independent cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    AliasingError,
    DegenerateMeasureError,
    InsufficientBandError,
    InversionError,
    NoArrivalDetected,
    ValidationError,
)
from .forward import data_to_R
from .medium import (
    ROLE_REFLECTION,
    AcquisitionGeometry,
    ComplexTrace,
    LayerSequence,
    WaveSpeedProfile,
    layers_to_profile,
)
from .opuc import _conj, alpha_to_moments, moment_residual


class ReconstructionWarning(UserWarning):
    """Recovered coefficients needed realification or clamping beyond tolerance."""


@dataclass(frozen=True)
class InversionConfig:
    """Parameters of the fast inversion.

    ``period`` overrides period detection; ``band_shift`` moves the start of
    the one-period integration window from ``omega_min`` to
    ``omega_min + band_shift``.
    """

    n: int
    period: float | None = None
    band_shift: float = 0.0
    clamp_eps: float = 1e-12
    imag_tol: float = 1e-6
    detect: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("the number of layers n must be an integer >= 1")
        if self.period is not None and not self.period > 0:
            raise ValidationError("period must be positive")
        if self.band_shift < 0:
            raise ValidationError("band_shift must be non-negative")


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    profile: WaveSpeedProfile
    r: np.ndarray
    r_raw: np.ndarray
    delta0: float
    period: float
    alpha: np.ndarray
    moments: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def depth(self) -> float:
        """Position of the deepest recovered jump."""
        return float(self.profile.positions[-1]) if self.profile.n else float("nan")

    def to_dict(self) -> dict:
        pairs = lambda a: [[float(np.real(v)), float(np.imag(v))] for v in a]
        return {
            "c0": self.profile.c0,
            "x0": float(self.diagnostics.get("x0", 0.0)),
            "jumps": [[x, c] for x, c in self.profile.jumps],
            "r": [float(v) for v in self.r],
            "r_raw": pairs(self.r_raw),
            "delta0": self.delta0,
            "period": self.period,
            "alpha": pairs(self.alpha),
            "moments": pairs(self.moments),
            "diagnostics": {k: (float(v) if isinstance(v, (np.floating, np.integer)) else v) for k, v in self.diagnostics.items()},
        }


def _window(trace: ComplexTrace, p: float, shift: float):
    band = trace.band
    start = band.omega_min + shift
    # tolerate representation error in p that would otherwise drop the last sample
    slack = 1e-9 * p
    if start + p > band.omega_max + slack:
        raise InsufficientBandError(
            f"window [{start:.6g}, {start + p:.6g}] is not contained in the band "
            f"({band.omega_min:.6g}, {band.omega_max:.6g})"
        )
    w = band.omegas
    offset = w - start
    sel = (offset >= 0) & (offset < p - 0.5 * band.spacing + slack)
    return start, offset[sel], trace.values[sel]


def fourier_alpha(R: ComplexTrace, p: float, n: int, band_shift: float = 0.0) -> np.ndarray:
    """``alpha_j = (1/p) int_{w0}^{w0+p} R(w) exp(-2 i j pi w / p) dw`` for ``j = 1..n``.

    Midpoint Riemann sum over the samples inside the window ``[w0, w0 + p)``
    with ``w0 = omega_min + band_shift``.
    """
    if not p > 0:
        raise ValidationError("period must be positive")
    start, offset, values = _window(R, p, band_shift)
    M = values.size
    if M < 2 * n:
        raise AliasingError(f"{M} samples in the window cannot resolve {n} coefficients (need >= {2 * n})")
    h = R.band.spacing
    j = np.arange(1, n + 1)
    # split the phase so large |omega| does not cost absolute accuracy
    base = np.exp(-2j * np.pi * np.mod(j * (start / p), 1.0))
    alpha = np.empty(n, dtype=complex)
    chunk = max(1, 2**22 // max(M, 1))
    for lo in range(0, n, chunk):
        jj = j[lo : lo + chunk]
        kernel = np.exp(-2j * np.pi * np.outer(jj, offset / p))
        alpha[lo : lo + chunk] = kernel @ values
    return alpha * base * (h / p)


def moments_to_reflectivities(m, n: int, tol: float = 1e-14, literal_conjugation: bool = False) -> np.ndarray:
    """Verblunsky coefficients ``r_1..r_n`` from moments ``m_0..m_n``.

    Runs the monic Szego recurrence on coefficient vectors ``nu^j`` of
    ``Phi_j``:

        r_{j+1} = sum_i conj(nu_i^j) m_{i+1} / sum_i nu_i^j m_{j-i}
        nu^{j+1} = (0, nu^j) - conj(r_{j+1}) (reversed conj(nu^j), 0)

    The numerator is ``conj(<z Phi_j, 1>)`` and the denominator
    ``<Phi_j, Phi_j>``.  ``literal_conjugation=True`` conjugates the whole
    product ``nu_i m_{i+1}`` instead, which agrees for real data but returns
    ``conj(r)`` for complex coefficients.

    Accepts ``dtype=object`` (mpmath) moments.
    """
    m = np.asarray(m)
    if m.size < n + 1:
        raise ValidationError(f"need moments m_0..m_{n}, got {m.size}")
    obj = m.dtype == object
    dtype = object if obj else complex
    scale = abs(m[0])
    nu = np.array([m[0] * 0 + 1], dtype=dtype)
    r = np.empty(n, dtype=dtype)
    for j in range(n):
        if literal_conjugation:
            num = np.sum(_conj(nu * m[1 : j + 2]))
        else:
            num = np.dot(_conj(nu), m[1 : j + 2])
        den = np.dot(nu, m[j::-1])
        if abs(den) <= tol * scale:
            raise DegenerateMeasureError(
                f"Gram norm <Phi_{j}, Phi_{j}> = {complex(den):.3e} vanished at step {j + 1}; "
                "n exceeds the effective layer count or the data is corrupt"
            )
        rj = num / den
        r[j] = rj
        rc = rj.conjugate() if obj else np.conj(rj)
        nu = np.concatenate(([0], nu)) - rc * np.concatenate((_conj(nu[::-1]), [0]))
    return r


def _scan_shifts(R: ComplexTrace):
    v = R.values
    N = v.size
    smax = N // 2
    if smax < 1:
        return np.empty(0), np.empty(0)
    p2 = np.abs(v) ** 2
    cs = np.concatenate(([0.0], np.cumsum(p2)))
    s = np.arange(1, smax + 1)
    head = cs[N - s]  # sum_{k < N-s} |v_k|^2
    tail = cs[N] - cs[s]  # sum_{k >= s} |v_k|^2
    L = 1 << int(np.ceil(np.log2(2 * N)))
    F = np.fft.fft(v, L)
    corr = np.fft.ifft(np.conj(F) * F)[s]  # sum_k conj(v_k) v_{k+s}
    E = (head + tail - 2 * np.real(corr)) / (N - s)
    return s, np.maximum(E, 0.0)


def detect_period(R: ComplexTrace, tol: float = 1e-8):
    """Smallest shift ``y`` with ``R(w + y) = R(w)`` on the band, or ``None``.

    Scans grid shifts up to half the band width (so at least two periods are
    seen) for local minima of the mean squared shift residual, refines each
    minimum with a three-point parabola and accepts the first whose residual
    is below ``tol * RMS**2``.  A constant trace is degenerate: every shift
    matches and the smallest grid shift is returned.
    """
    period, _ = _period_search(R, tol)
    return period


def _period_search(R: ComplexTrace, tol: float):
    s, E = _scan_shifts(R)
    if s.size == 0:
        return None, False
    h = R.band.spacing
    level = tol * R.rms() ** 2
    if E[0] <= level:
        return float(h), True
    for i in range(1, s.size - 1):
        if not (E[i] <= E[i - 1] and E[i] <= E[i + 1]):
            continue
        a, b, c = E[i - 1], E[i], E[i + 1]
        curv = a - 2 * b + c
        if curv > 0:
            delta = 0.5 * (a - c) / curv
            vertex = b - 0.25 * (a - c) * delta
        else:
            delta, vertex = 0.0, b
        if min(b, vertex) <= level:
            return float((s[i] + delta) * h), False
    return None, False


def layer_strip(R: ComplexTrace, delta0: float, n: int, band_shift: float = 0.0):
    """Peel ``n`` equal-travel-time interfaces off the surrogate reflection.

    Each pass takes ``r`` as the first Fourier coefficient of the current
    trace over one period ``pi / delta0``, then applies the inverse
    automorphism ``v -> conj(z) (v - r z) / (1 - conj(r z) v)`` with
    ``z = exp(2 i w delta0)``.  Returns the (complex) reflectivities and the
    residual trace.
    """
    if n < 0:
        raise ValidationError("n must be non-negative")
    p = np.pi / delta0
    z = np.exp(2j * R.omegas * delta0)
    v = np.array(R.values, dtype=complex)
    r = np.empty(n, dtype=complex)
    for j in range(n):
        current = ComplexTrace(R.band, v, ROLE_REFLECTION)
        rj = fourier_alpha(current, p, 1, band_shift)[0]
        r[j] = rj
        rz = rj * z
        v = np.conj(z) * (v - rz) / (1 - np.conj(rz) * v)
    return r, ComplexTrace(R.band, v, ROLE_REFLECTION)


def almost_periodic_mean(R, L: float, lam, n_quad: int | None = None, window: str = "rect"):
    """Finite-window mean ``(1/2L) int_{-L}^{L} R(w) exp(-i lam w) dw`` for each ``lam``.

    ``window="hann"`` uses a normalized Hann taper instead of the flat weight,
    which suppresses sidelobe leakage from neighbouring frequencies without
    biasing the amplitude of an isolated exponential at its own frequency.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if n_quad is None:
        n_quad = max(2**14, int(np.ceil(8 * L * max(float(np.max(np.abs(lam))), 1.0) / np.pi)))
    h = 2 * L / n_quad
    w = -L + (np.arange(n_quad) + 0.5) * h
    values = np.asarray(R(w), dtype=complex)
    if window == "rect":
        weights = np.ones(n_quad)
    elif window == "hann":
        weights = 0.5 * (1 + np.cos(np.pi * w / L))
    else:
        raise ValidationError(f"unknown window {window!r}")
    weighted = values * weights / np.sum(weights)
    out = np.empty(lam.size, dtype=complex)
    chunk = max(1, 2**22 // n_quad)
    for lo in range(0, lam.size, chunk):
        out[lo : lo + chunk] = np.exp(-1j * np.outer(lam[lo : lo + chunk], w)) @ weighted
    return out


def estimate_first_arrival(R, L: float, lambda_grid, threshold: float = 0.05, n_quad: int | None = None, refine: bool = True):
    """Estimate ``(delta_1, r_1)`` from the lowest frequency present in ``R``.

    The first grid frequency whose Hann-windowed mean exceeds ``threshold``
    marks the first arrival; the estimate climbs to the top of that spectral
    peak and (optionally) refines it by bounded scalar optimization.  The
    amplitude is the plain finite-window mean at the located frequency.
    Errors scale like ``1/L``.
    """
    if not L > 0:
        raise ValidationError("L must be positive")
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValidationError("lambda_grid must be positive and strictly ascending")
    if n_quad is None:
        n_quad = max(2**14, int(np.ceil(8 * L * float(grid[-1]) / np.pi)))
    # sample R once; every mean below reuses the samples
    h = 2 * L / n_quad
    w = -L + (np.arange(n_quad) + 0.5) * h
    samples = np.asarray(R(w), dtype=complex)
    cached = lambda _w: samples
    mags = np.abs(almost_periodic_mean(cached, L, grid, n_quad, window="hann"))
    above = np.nonzero(mags > threshold)[0]
    if above.size == 0:
        raise NoArrivalDetected(f"no mean above threshold {threshold} on the lambda grid")
    i = int(above[0])
    while i + 1 < grid.size and mags[i + 1] >= mags[i]:
        i += 1
    lam = grid[i]
    if refine and grid.size > 1:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        res = minimize_scalar(
            lambda x: -abs(almost_periodic_mean(cached, L, [x], n_quad, window="hann")[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10 * max(1.0, hi)},
        )
        if -res.fun >= mags[i]:
            lam = float(res.x)
    r1 = almost_periodic_mean(cached, L, [lam], n_quad, window="rect")[0]
    return 0.5 * lam, r1


def reflectivities_to_profile(r, delta0: float, x0: float, c0: float) -> WaveSpeedProfile:
    """Equal-travel-time staircase: ``c_j = c0 exp(2 sum atanh r_i)``, ``x_j = x0 + delta0 sum c_{i-1}``."""
    return layers_to_profile(LayerSequence.equal(r, delta0, x0=x0, c0=c0))


def invert(d: ComplexTrace, geometry: AcquisitionGeometry, c0: float, cfg: InversionConfig) -> ReconstructionReport:
    """Reconstruct a staircase wave speed from measured data ``d``.

    ``d`` may also be a trace already tagged as the surrogate reflection, in
    which case the data transform is skipped.  The period comes from
    ``cfg.period``, else from :func:`detect_period`, else from the band width.
    """
    R = d if d.role == ROLE_REFLECTION else data_to_R(d, geometry, c0)
    n = int(cfg.n)

    period, source = cfg.period, "config"
    if period is None and cfg.detect:
        found, degenerate = _period_search(R, 1e-8)
        if found is not None and not degenerate:
            period, source = found, "detected"
    if period is None:
        period = R.band.width - cfg.band_shift
        source = "band-width"

    try:
        alpha = fourier_alpha(R, period, n, cfg.band_shift)
    except (InsufficientBandError, AliasingError) as exc:
        exc.step = "step 1 (fourier coefficients)"
        raise
    energy = float(np.sum(np.abs(alpha) ** 2))
    if energy >= 1:
        warnings.warn(f"sum |alpha_j|^2 = {energy:.4f} >= 1; data inconsistent with a lossless medium", ReconstructionWarning)

    m = alpha_to_moments(alpha)
    try:
        r_raw = moments_to_reflectivities(m, n)
    except DegenerateMeasureError as exc:
        exc.step = "step 3 (moments to reflectivities)"
        raise

    r = np.real(r_raw).astype(float)
    max_imag = float(np.max(np.abs(np.imag(r_raw)))) if n else 0.0
    if max_imag > cfg.imag_tol:
        warnings.warn(f"recovered reflectivities carry imaginary parts up to {max_imag:.3e}", ReconstructionWarning)
    bound = 1.0 - cfg.clamp_eps
    clamped = np.abs(r) > bound
    clamp_count = int(np.sum(clamped))
    if clamp_count:
        warnings.warn(f"{clamp_count} reflectivities clamped into (-1, 1)", ReconstructionWarning)
        r = np.clip(r, -bound, bound)

    delta0 = np.pi / period
    try:
        profile = reflectivities_to_profile(r, delta0, geometry.x0, c0)
    except ValidationError as exc:
        # speeds exp(2 sum atanh r) under/overflow when many r sit at the clamp
        raise InversionError(f"recovered profile is not representable: {exc}", step="step 4 (reflectivities to profile)") from exc
    diagnostics = {
        "x0": geometry.x0,
        "period_source": source,
        "max_imag": max_imag,
        "imag_flagged": bool(max_imag > cfg.imag_tol),
        "clamp_count": clamp_count,
        "schur_sum": float(np.sum(np.arctanh(np.abs(r)))),
        "alpha_energy": energy,
        "moment_residual": moment_residual(alpha, m),
        "band_shift": cfg.band_shift,
    }
    return ReconstructionReport(profile, r, np.asarray(r_raw, dtype=complex), delta0, period, alpha, m, diagnostics)
