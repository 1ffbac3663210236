"""Exact forward model for the layered 1-D Helmholtz equation.

The field solves ``u'' + (omega/c)^2 u = source`` with a point source at
``x0`` and outgoing radiation on both sides.  The source normalization
follows the convention ``B_0 = -kappa/(2i)`` with ``kappa = omega/c0``: the
right-going amplitude leaving the source is fixed to that value.  (Read as a
distribution this corresponds to a source strength of ``kappa**2`` rather
than 1; it is kept because it makes the data-to-reflection transform an
exact identity.)

The surrogate reflection response seen from the source region is the
composition of disk automorphisms

    R(omega) = phi_1 o phi_2 o ... o phi_n (0),
    phi_j(v) = z_j (v + r_j) / (1 + conj(r_j) v),   z_j = exp(2 i omega delta_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoleError, ReflectivityRangeError, SingularFrequencyError, ValidationError
from .medium import (
    ROLE_MEASURED,
    ROLE_REFLECTION,
    AcquisitionGeometry,
    ComplexTrace,
    FrequencyBand,
    LayerSequence,
    WaveSpeedProfile,
    profile_to_layers,
)

# Leading factor: phi_{M0}(g) = (1 + g) / (1 - g) is the Herglotz transform
M0 = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex)
M0.setflags(write=False)


def transfer_matrix(r: complex, delta: float, omega: float) -> np.ndarray:
    """``M = [[z, r z], [conj(r), 1]]`` with ``z = exp(2 i omega delta)``."""
    z = np.exp(2j * omega * delta)
    return np.array([[z, r * z], [np.conj(r), 1.0]], dtype=complex)


def mobius_apply(m, v):
    """Apply the linear fractional map of a 2x2 matrix: ``(m11 v + m12) / (m21 v + m22)``."""
    m = np.asarray(m, dtype=complex)
    den = m[1, 0] * v + m[1, 1]
    if np.any(den == 0):
        raise PoleError("linear fractional transformation evaluated at its pole")
    return (m[0, 0] * v + m[0, 1]) / den


def _check_r(r) -> np.ndarray:
    r = np.asarray(r)
    if np.any(np.abs(r) >= 1):
        raise ReflectivityRangeError("reflectivities must lie in the open unit disk")
    return r


def schur_bound(r) -> float:
    """Uniform bound ``tanh(sum atanh |r_j|)`` on the response modulus."""
    r = _check_r(r)
    return float(np.tanh(np.sum(np.arctanh(np.abs(r)))))


def eval_f(r, z):
    """Multivariate response ``f(z_1, ..., z_n)`` on the closed polydisk.

    ``z`` may carry trailing batch dimensions: ``z[j]`` is the value (or array
    of values) of the ``j``-th variable.
    """
    r = _check_r(r)
    z = np.asarray(z, dtype=complex)
    if z.shape[:1] != r.shape:
        raise ValidationError("need one z variable per reflectivity")
    if np.any(np.abs(z) > 1 + 1e-12):
        raise ReflectivityRangeError("z variables must lie in the closed unit disk")
    v = np.zeros(z.shape[1:], dtype=complex)
    for j in range(r.size - 1, -1, -1):
        v = z[j] * (v + r[j]) / (1 + np.conj(r[j]) * v)
    return v


def reflection_response(seq: LayerSequence, omega):
    """Surrogate reflection ``R(omega)`` by a right-to-left automorphism fold.

    Scalar updates replace the matrix product, so no growing normalization
    factor ever appears.  ``omega`` may be an array; ``omega = 0`` is allowed.
    """
    omega = np.asarray(omega, dtype=float)
    v = np.zeros(omega.shape, dtype=complex)
    for j in range(seq.n - 1, -1, -1):
        rj = seq.r[j]
        z = np.exp(2j * omega * seq.delta[j])
        v = z * (v + rj) / (1 + rj * v)
    return v[()] if v.ndim == 0 else v


@dataclass(frozen=True, eq=False)
class FieldAmplitudes:
    """Left/right travelling amplitudes ``(A_j, B_j)``, ``j = 0..n``.

    In layer ``j`` the field is ``A_j exp(-i k_j (x - x_j)) + B_j exp(i k_j (x - x_j))``
    with ``k_j = omega / c_j`` and ``x_0`` the source position.  Arrays have
    shape ``(n + 1,) + omega.shape``.
    """

    omega: np.ndarray
    A: np.ndarray
    B: np.ndarray


def field_amplitudes(profile: WaveSpeedProfile, x0: float, omega) -> FieldAmplitudes:
    """Solve the outgoing problem for all layer amplitudes.

    Works backwards from ``(A_n, B_n) = (0, 1)`` through
    ``(A_{j-1}, B_{j-1}) = gamma_j M_j (A_j, B_j)``, keeping only the ratio
    ``A_j / B_j`` and the per-step factor ``B_{j-1} / B_j`` so that nothing
    overflows, then fixes the scale by ``B_0 = -kappa/(2i)``.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise SingularFrequencyError("the field is undefined at omega = 0 under this normalization")
    seq = profile_to_layers(profile, x0)
    c = profile.all_speeds
    n = seq.n
    ratio = np.zeros((n + 1,) + omega.shape, dtype=complex)
    step = np.ones((n + 1,) + omega.shape, dtype=complex)
    rho = np.zeros(omega.shape, dtype=complex)
    for j in range(n, 0, -1):
        rj = seq.r[j - 1]
        half = np.exp(1j * omega * seq.delta[j - 1])
        gamma = (c[j] + c[j - 1]) / (2.0 * c[j]) / half
        den = 1 + np.conj(rj) * rho
        step[j] = gamma * den  # B_{j-1} / B_j
        rho = half * half * (rho + rj) / den
        ratio[j - 1] = rho
    kappa0 = omega / profile.c0
    B0 = -kappa0 / 2j
    B = B0 / np.cumprod(step, axis=0)
    A = ratio * B
    return FieldAmplitudes(omega, A, B)


def continuity_residuals(profile: WaveSpeedProfile, x0: float, amps: FieldAmplitudes) -> tuple[float, float]:
    """Largest relative mismatch in ``u`` and ``u'/kappa``-weighted matching at the jumps."""
    seq = profile_to_layers(profile, x0)
    c = profile.all_speeds
    scale = max(np.max(np.abs(amps.A)), np.max(np.abs(amps.B)))
    res0 = res1 = 0.0
    for j in range(1, seq.n + 1):
        e = np.exp(1j * amps.omega * seq.delta[j - 1])
        left = amps.A[j - 1] / e + amps.B[j - 1] * e
        right = amps.A[j] + amps.B[j]
        res0 = max(res0, float(np.max(np.abs(left - right))))
        dleft = (-amps.A[j - 1] / e + amps.B[j - 1] * e) / c[j - 1]
        dright = (-amps.A[j] + amps.B[j]) / c[j]
        res1 = max(res1, float(np.max(np.abs(dleft - dright))) * c[j])
    return res0 / scale, res1 / scale


def field_at(profile: WaveSpeedProfile, x0: float, omega: float, x, amps: FieldAmplitudes | None = None):
    """Evaluate ``u(x, omega)`` for a scalar frequency at positions ``x``."""
    if np.ndim(omega) != 0:
        raise ValidationError("field_at takes a scalar omega")
    if amps is None:
        amps = field_amplitudes(profile, x0, omega)
    x = np.asarray(x, dtype=float)
    c = profile.all_speeds
    refs = np.concatenate(([x0], profile.positions))
    j = profile.layer_index(x)
    k = omega / c[j]
    s = x - refs[j]
    A = amps.A[j].copy()
    B = amps.B[j]
    # left of the source only the left-going wave survives
    behind = x < x0
    A = np.where(behind, A + B, A)
    B = np.where(behind, 0.0, B)
    u = A * np.exp(-1j * k * s) + B * np.exp(1j * k * s)
    return u[()] if u.ndim == 0 else u


def _phase(omega, geometry: AcquisitionGeometry, c0: float):
    return omega * (geometry.x_star - geometry.x0) / c0


def _reject_zero(band: FrequencyBand):
    if np.any(band.omegas == 0):
        raise SingularFrequencyError("the band samples omega = 0")


def reflection_to_data(R: ComplexTrace, geometry: AcquisitionGeometry, c0: float) -> ComplexTrace:
    """Algebraic inverse of :func:`data_to_R`."""
    _reject_zero(R.band)
    w = R.omegas
    theta = _phase(w, geometry, c0)
    d = (1j * w / (2 * c0)) * np.exp(-1j * theta) * (R.values + np.exp(2j * theta))
    return ComplexTrace(R.band, d, ROLE_MEASURED)


def data_to_R(trace: ComplexTrace, geometry: AcquisitionGeometry, c0: float) -> ComplexTrace:
    """Surrogate reflection ``R = -(2 i c0 / omega) e^{i theta} d - e^{2 i theta}``.

    ``theta = omega (x_star - x0) / c0`` is the source-to-receiver phase.
    """
    _reject_zero(trace.band)
    w = trace.omegas
    theta = _phase(w, geometry, c0)
    R = -(2j * c0 / w) * np.exp(1j * theta) * trace.values - np.exp(2j * theta)
    return ComplexTrace(trace.band, R, ROLE_REFLECTION)


def synth_trace(profile: WaveSpeedProfile, geometry: AcquisitionGeometry, band: FrequencyBand, method: str = "response") -> ComplexTrace:
    """Measured data ``d(omega) = u(x_star, omega)`` sampled on ``band``.

    ``method="response"`` goes through the automorphism fold and the inverse
    data transform; ``method="field"`` solves for the amplitudes and evaluates
    the field at the receiver.  Both are exact and agree to roundoff.
    """
    geometry.validate_for(profile)
    _reject_zero(band)
    w = band.omegas
    if method == "response":
        seq = profile_to_layers(profile, geometry.x0)
        R = ComplexTrace(band, reflection_response(seq, w), ROLE_REFLECTION)
        return reflection_to_data(R, geometry, profile.c0)
    if method == "field":
        amps = field_amplitudes(profile, geometry.x0, w)
        s = geometry.x_star - geometry.x0
        k = w / profile.c0
        d = amps.A[0] * np.exp(-1j * k * s) + amps.B[0] * np.exp(1j * k * s)
        return ComplexTrace(band, d, ROLE_MEASURED)
    raise ValidationError(f"unknown synthesis method {method!r}")


def add_noise(trace: ComplexTrace, level: float, seed: int | None = None) -> ComplexTrace:
    """Add i.i.d. complex Gaussian noise at ``level`` times the trace RMS.

    Real and imaginary parts each get standard deviation
    ``level * rms / sqrt(2)``, so the complex noise RMS is ``level * rms``.
    """
    if level < 0:
        raise ValidationError("noise level must be non-negative")
    if level == 0:
        return ComplexTrace(trace.band, trace.values.copy(), trace.role)
    rng = np.random.default_rng(seed)
    sigma = level * trace.rms() / np.sqrt(2.0)
    noise = rng.normal(0.0, sigma, trace.band.N) + 1j * rng.normal(0.0, sigma, trace.band.N)
    return ComplexTrace(trace.band, trace.values + noise, trace.role)

