"""Orthogonal polynomials on the unit circle for equal-layer media.

With every layer crossing in the same travel time the response becomes a
function of one variable, ``g(z) = phi_1 o ... o phi_n (0)``, and the
product of the transfer matrices is a polynomial matrix

    M0 M1 ... Mn = [[Psi_n, Psi_n*], [-Phi_n, Phi_n*]]

whose entries are the Szego polynomials with Verblunsky coefficients ``r``
(``Phi``) and ``-r`` (``Psi``).  ``F = (1 + g)/(1 - g)`` is a Caratheodory
function whose Taylor coefficients are twice the conjugate moments of the
orthogonality measure.

Polynomials are dense coefficient arrays in ascending powers.  The moment
routines accept ``dtype=object`` arrays of :mod:`mpmath` numbers, which is how
ill-conditioned (high-contrast) cases are checked in extended precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .errors import ReflectivityRangeError, ValidationError


def _conj(a):
    a = np.asarray(a)
    if a.dtype == object:
        return np.array([x.conjugate() for x in a.ravel()], dtype=object).reshape(a.shape)
    return np.conj(a)


def _check_disk(r) -> np.ndarray:
    r = np.asarray(r)
    if r.dtype != object:
        r = r.astype(complex)
    if any(abs(x) >= 1 for x in r.ravel()):
        raise ReflectivityRangeError("recurrence coefficients must lie in the open unit disk")
    return r


def dual(p) -> np.ndarray:
    """Reversed, conjugated coefficients: ``z^deg conj(p(1/conj z))``."""
    return _conj(np.asarray(p)[::-1])


def polyval(p, z):
    """Evaluate an ascending-coefficient polynomial (Horner)."""
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=np.result_type(np.asarray(p).dtype, z.dtype, complex))
    for coeff in np.asarray(p)[::-1]:
        out = out * z + coeff
    return out[()] if out.ndim == 0 else out


def szego_polynomials(r) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Monic ``Phi_0..Phi_n`` for coefficients ``r`` and ``Psi_0..Psi_n`` for ``-r``.

    ``Phi_{j+1}(z) = z Phi_j(z) - conj(r_{j+1}) Phi_j*(z)``.
    """
    r = _check_disk(r)

    def run(coeffs):
        polys = [np.ones(1, dtype=r.dtype if r.dtype == object else complex)]
        for a in coeffs:
            p = polys[-1]
            shifted = np.concatenate(([0], p))
            polys.append(shifted - _conj(np.asarray([a]))[0] * np.concatenate((dual(p), [0])))
        return polys

    return run(r), run(-r)


def matrix_product_polys(r) -> list[list[np.ndarray]]:
    """Entrywise polynomial product ``M0 M1 ... Mn`` with ``M_j = [[z, r_j z], [conj r_j, 1]]``.

    Computed by direct polynomial multiplication, independently of the
    recurrence in :func:`szego_polynomials`.
    """
    r = _check_disk(r)
    P = [[np.array([1.0 + 0j]), np.array([1.0 + 0j])], [np.array([-1.0 + 0j]), np.array([1.0 + 0j])]]
    z = np.array([0.0, 1.0 + 0j])
    for rj in r:
        Mj = [[z, rj * z], [np.array([np.conj(rj)]), np.array([1.0 + 0j])]]
        P = [
            [
                np.polynomial.polynomial.polyadd(
                    np.polynomial.polynomial.polymul(P[i][0], Mj[0][k]),
                    np.polynomial.polynomial.polymul(P[i][1], Mj[1][k]),
                )
                for k in range(2)
            ]
            for i in range(2)
        ]
    return P


def g_from_polys(r, z):
    """Diagonal response ``g(z) = (Psi_n* - Phi_n*) / (Psi_n* + Phi_n*)``."""
    phi, psi = szego_polynomials(r)
    a = polyval(dual(psi[-1]), z)
    b = polyval(dual(phi[-1]), z)
    return (a - b) / (a + b)


def herglotz_F(r, z):
    """Caratheodory function ``F = (1 + g)/(1 - g) = Psi_n*(z) / Phi_n*(z)``."""
    phi, psi = szego_polynomials(r)
    return polyval(dual(psi[-1]), z) / polyval(dual(phi[-1]), z)


def g_taylor_coefficients(r, n: int, n_quad: int = 2**14) -> np.ndarray:
    """First ``n`` Taylor coefficients ``alpha_1..alpha_n`` of ``g``.

    Trapezoidal quadrature of ``g(e^{it}) e^{-ijt}`` on ``n_quad`` nodes (an
    FFT).  Spectrally accurate since ``g`` is analytic across the circle.
    """
    r = _check_disk(r)
    if n_quad <= n:
        raise ValidationError("n_quad must exceed the number of coefficients")
    z = np.exp(2j * np.pi * np.arange(n_quad) / n_quad)
    v = np.zeros(n_quad, dtype=complex)
    for rj in r[::-1]:
        v = z * (v + rj) / (1 + np.conj(rj) * v)
    return np.fft.fft(v)[1 : n + 1] / n_quad


def g_series(r, n: int, one=1.0):
    """Taylor coefficients ``alpha_1..alpha_n`` of ``g`` by truncated power-series arithmetic.

    Exact up to the arithmetic of the inputs: pass :mod:`mpmath` reflectivities
    (with ``one=mpmath.mpf(1)``) for an extended-precision oracle.
    """
    r = list(r)
    zero = one * 0
    v = [zero] * (n + 1)
    for rj in reversed(r):
        rc = rj.conjugate() if hasattr(rj, "conjugate") else np.conj(rj)
        num = [v[0] + rj] + v[1:]
        den = [one + rc * v[0]] + [rc * c for c in v[1:]]
        quot = [zero] * (n + 1)
        for k in range(n + 1):
            acc = num[k] - sum((den[i] * quot[k - i] for i in range(1, k + 1)), zero)
            quot[k] = acc / den[0]
        v = [zero] + quot[:n]
    return np.array(v[1:], dtype=object if not isinstance(one, float) else complex)


def alpha_to_moments(alpha) -> np.ndarray:
    """Moments ``m_0..m_n`` from Taylor coefficients by back substitution.

    ``m_0 = 1`` and ``m_j = alpha_j m_0 + alpha_{j-1} m_1 + ... + alpha_1 m_{j-1}``,
    i.e. the solution of ``(I - A) m = e_1`` with ``A`` lower-triangular
    Toeplitz on ``(0, alpha_1, ..., alpha_n)``.
    """
    alpha = np.asarray(alpha)
    obj = alpha.dtype == object
    n = alpha.size
    m = np.empty(n + 1, dtype=object if obj else complex)
    m[0] = alpha[0] * 0 + 1 if obj and n else 1
    for j in range(1, n + 1):
        m[j] = np.dot(alpha[:j], m[j - 1 :: -1])
    return m


def moment_residual(alpha, m) -> float:
    """Max-norm of ``(I - A) m - e_1``, with ``A m`` evaluated as a convolution."""
    alpha = np.asarray(alpha, dtype=complex)
    m = np.asarray(m, dtype=complex)
    n = alpha.size
    Am = np.convolve(np.concatenate(([0.0], alpha)), m)[: n + 1]
    e1 = np.zeros(n + 1)
    e1[0] = 1
    return float(np.max(np.abs(m - Am - e1)))


def moment_inner_product(m, p, q):
    """``<p, q> = integral p conj(q) dmu`` from moments ``m_k = integral conj(zeta)^k dmu``.

    Monomials pair as ``<z^a, z^b> = m_{b-a}`` with ``m_{-k} = conj(m_k)``.
    """
    m = np.asarray(m)
    p = np.asarray(p)
    q = np.asarray(q)
    if max(p.size, q.size) > m.size:
        raise ValidationError(f"need moments up to order {max(p.size, q.size) - 1}, have {m.size - 1}")
    total = 0
    mc = _conj(m)
    qc = _conj(q)
    for a, pa in enumerate(p):
        for b, qb in enumerate(qc):
            k = b - a
            total = total + pa * qb * (m[k] if k >= 0 else mc[-k])
    return total


@dataclass(frozen=True)
class BivariatePolynomial:
    """Polynomial in ``zeta`` and ``conj(zeta)`` with exact rational coefficients.

    ``terms[(a, b)]`` is the coefficient of ``zeta**a * conj(zeta)**b``.
    """

    terms: dict = field(default_factory=dict)

    def __call__(self, zeta):
        zc = np.conj(zeta)
        return sum((float(c) * zeta**a * zc**b for (a, b), c in self.terms.items()), 0.0 * zeta)

    def __eq__(self, other):
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        return {k: v for k, v in self.terms.items() if v} == {k: v for k, v in other.terms.items() if v}

    def is_zero(self) -> bool:
        return not any(self.terms.values())


def psi_polynomial(p: int, q: int) -> BivariatePolynomial:
    """Fourier-amplitude polynomial ``psi^{(p,q)}``.

    For ``min(p, q) >= 1``:
    ``(-1)^p / (q (p+q-1)!) * (1 - z zbar) * d^{p+q}/dzbar^p dz^q (1 - z zbar)^{p+q-1}``
    with ``z, zbar`` treated as independent variables.  ``psi^{(p,0)} = z^p``
    for ``p >= 0`` and ``psi = 0`` when ``min(p, q) < 0`` or ``p = 0 < q``.
    """
    if min(p, q) < 0 or (p == 0 and q > 0):
        return BivariatePolynomial({})
    if q == 0:
        return BivariatePolynomial({(p, 0): Fraction(1)})
    N = p + q - 1
    deriv = {}
    # (1 - z zbar)^N = sum_k C(N,k) (-1)^k z^k zbar^k; differentiate termwise
    for k in range(max(p, q), N + 1):
        coeff = Fraction(comb(N, k) * (-1) ** k * factorial(k) * factorial(k), factorial(k - q) * factorial(k - p))
        deriv[(k - q, k - p)] = deriv.get((k - q, k - p), 0) + coeff
    scale = Fraction((-1) ** p, q * factorial(N))
    terms = {}
    for (a, b), c in deriv.items():
        terms[(a, b)] = terms.get((a, b), 0) + scale * c
        terms[(a + 1, b + 1)] = terms.get((a + 1, b + 1), 0) - scale * c
    return BivariatePolynomial({k: v for k, v in terms.items() if v})


def fourier_coefficient_product(k, r) -> complex:
    """Torus Fourier coefficient of ``z^k`` in ``f(z_1..z_n)``: ``prod_j psi^{(k_j, k_{j+1})}(r_j)``."""
    k = [int(x) for x in k]
    r = list(np.asarray(r).ravel())
    if len(k) != len(r):
        raise ValidationError("multi-index length must equal the number of layers")
    if not k or k[0] != 1 or any(x < 0 for x in k):
        raise ValidationError("multi-index must satisfy k_1 = 1 and k_j >= 0")
    k = k + [0]
    out = 1.0 + 0j
    for j, rj in enumerate(r):
        out *= psi_polynomial(k[j], k[j + 1])(complex(rj))
    return out
