"""Scalar special functions: the two-parameter Mittag-Leffler function and the
residue-series kernel of the half-line Dirichlet problem.

The Mittag-Leffler function is evaluated by its Taylor series inside the disc
``|z| <= SERIES_RADIUS`` and, outside it, by inverting its Laplace transform

    E_{a,b}(z) = 1/(2 pi i) ∫ e^s s^(a-b) / (s^a - z) ds

along a parabolic Hankel contour ``s(u) = mu (1 + i u)^2``.  Poles of the
integrand that lie to the right of the contour are added as residues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sc

__all__ = [
    "MLParams",
    "SERIES_RADIUS",
    "mittag_leffler",
    "mittag_leffler_real",
    "dirichlet_kernel",
    "dirichlet_kernel_terms",
]

SERIES_RADIUS = 1.0

_EPS = np.finfo(float).eps
# log(1/tol) targeted by the contour quadrature
_LOG_TOL = 36.0
# keep exp(mu) below this multiple of the answer's magnitude
_ROUNDOFF_BUDGET = 3.0


@dataclass(frozen=True)
class MLParams:
    """Parameters ``(beta, gamma)`` of ``E_{beta,gamma}``."""

    beta: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"Mittag-Leffler beta must be > 0, got {self.beta!r}")
        if not np.isfinite(self.gamma):
            raise ValueError(f"Mittag-Leffler gamma must be finite, got {self.gamma!r}")


# {{{ Mittag-Leffler


def _ml_series(z: complex, a: float, b: float) -> complex:
    # terms decay once Gamma(a k + b) outgrows |z|^k; stop at double-precision noise
    kmax = 16
    while True:
        k = np.arange(kmax)
        terms = z**k * sc.rgamma(a * k + b)
        tail = np.abs(terms[-4:]).max()
        if tail <= _EPS * 1e-3 * max(np.abs(terms).sum(), 1e-300) or kmax > 20000:
            break
        kmax *= 2
    return complex(terms.sum())


def _ml_poles(z: complex, a: float) -> np.ndarray:
    # roots of s^a = z on the principal sheet |arg s| < pi
    theta = math.atan2(z.imag, z.real)
    jmin = math.ceil(-a / 2 - theta / (2 * math.pi))
    jmax = math.floor(a / 2 - theta / (2 * math.pi))
    j = np.arange(jmin, jmax + 1)
    ang = (theta + 2 * math.pi * j) / a
    ang = ang[np.abs(ang) < math.pi * (1 - 1e-14)]
    return abs(z) ** (1 / a) * np.exp(1j * ang)


def _contour_plan(poles: np.ndarray, residues: np.ndarray):
    """Pick the parabola scale and trapezoid step that need the fewest nodes.

    In ``u`` the branch cut sits at distance 1 from the real axis and a pole
    ``s_j`` at distance ``|Re sqrt(s_j) / sqrt(mu) - 1|``.
    """
    phi = np.sqrt(np.maximum((poles.real + np.abs(poles)) / 2, 0.0))
    levels = np.concatenate([[0.0], np.sort(phi)])

    best = None
    for i, lo in enumerate(levels):
        if i + 1 < len(levels):
            hi = levels[i + 1]
            if hi - lo < 1e-8 * max(hi, 1.0):
                continue
            roots = [0.5 * (lo + hi)] + [
                r for r in (0.7, 1.0, 1.5, 2.0) if lo + 0.1 < r < 0.8 * hi
            ]
        elif lo == 0.0:
            roots = [0.7, 1.0, 1.5]
        else:
            roots = [1.5 * lo, 2.0 * lo]
        for sq in roots:
            d = 0.9 * min([1.0] + [abs(p / sq - 1.0) for p in phi])
            mu = sq * sq
            h = 2 * math.pi * d / (_LOG_TOL + mu * (1 + d) ** 2)
            n = math.ceil(math.sqrt(1 + (_LOG_TOL + 2.0) / mu) / h)
            inside = phi > sq
            res = complex(residues[inside].sum()) if inside.any() else 0j
            infeasible = mu > _ROUNDOFF_BUDGET + math.log(max(abs(res), 1.0))
            key = (infeasible, n)
            if best is None or key < best[0]:
                best = (key, mu, h, n, res)
    _, mu, h, n, res = best
    return mu, h, n, res


def _ml_contour(z: complex, a: float, b: float) -> complex:
    poles = _ml_poles(z, a)
    with np.errstate(over="ignore", invalid="ignore"):
        # log form, so |p|^(1-b) may bring a large e^p back into range
        residues = np.exp((1 - b) * np.log(poles) + poles) / a
    if not np.all(np.isfinite(residues)):
        raise OverflowError(f"E_{{{a:g},{b:g}}}({z}) exceeds the float range")
    mu, h, n, res = _contour_plan(poles, residues)

    u = h * np.arange(-n, n + 1)
    w = 1 + 1j * u
    s = mu * w * w
    ds = 2j * mu * w
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        f = np.exp(s) * s ** (a - b) / (s**a - z) * ds
    integral = h * f.sum() / (2j * math.pi)
    return complex(integral + res)


def _ml_scalar(z: complex, a: float, b: float) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"Mittag-Leffler argument must be finite, got {z!r}")
    if z == 0:
        return complex(sc.rgamma(b))
    if a == 1.0 and b <= 1.0 and b == round(b):
        # E_{1,b}(z) = z^(1-b) e^z: exponentially small values on the left
        # half-plane, which a contour sum cannot resolve in relative terms
        return complex(z ** int(1 - b) * np.exp(z))
    flip = z.imag < 0
    zz = z.conjugate() if flip else z
    if abs(zz) <= SERIES_RADIUS:
        val = _ml_series(zz, a, b)
    else:
        val = _ml_contour(zz, a, b)
    if z.imag == 0:
        return complex(val.real, 0.0)
    return val.conjugate() if flip else val


def mittag_leffler(p: MLParams, z):
    """Two-parameter Mittag-Leffler function ``E_{beta,gamma}(z)``.

    Parameters
    ----------
    p : MLParams
        ``(beta, gamma)``; any ``beta > 0`` and real ``gamma``.
    z : complex or array_like
        Argument(s). Arrays are evaluated elementwise.

    Returns
    -------
    complex or numpy.ndarray
        Values of the function; conjugate symmetry ``E(conj z) = conj E(z)``
        holds exactly, and real input yields a zero imaginary part.
    """
    if not isinstance(p, MLParams):
        raise TypeError("p must be an MLParams instance")
    if np.ndim(z) == 0:
        return _ml_scalar(complex(z), p.beta, p.gamma)
    zarr = np.asarray(z, dtype=complex)
    out = np.empty(zarr.shape, dtype=complex)
    for idx, zi in np.ndenumerate(zarr):
        out[idx] = _ml_scalar(complex(zi), p.beta, p.gamma)
    return out


def mittag_leffler_real(p: MLParams, x):
    """Real-argument ``E_{beta,gamma}(x)``, returned as float(s)."""
    if np.ndim(x) == 0:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"Mittag-Leffler argument must be finite, got {x!r}")
        return mittag_leffler(p, x).real
    return mittag_leffler(p, np.asarray(x, dtype=float)).real


# }}}


# {{{ Dirichlet kernel


def dirichlet_kernel_terms(alpha: float, x: float, z: float, nterms: int) -> np.ndarray:
    """First ``nterms`` residues of the kernel series (float64, for inspection)."""
    n = np.arange(nterms)
    y = z * z / x**alpha
    order = alpha * (n + 1)
    # 1 / Gamma(1 - a) = Gamma(a) sin(pi a) / pi
    logmag = n * math.log(y) + sc.gammaln(order) - sc.gammaln(2 * n + 2) - math.log(math.pi)
    sign = (-1.0) ** n * np.sin(math.pi * order)
    with np.errstate(over="ignore", invalid="ignore"):
        # overflowing terms are detected by the caller
        return z * x ** (-alpha) * sign * np.exp(logmag)


def _kernel_mp(alpha: float, x: float, z: float, digits: int) -> float:
    with mpmath.workdps(digits):
        a = mpmath.mpf(alpha)
        y = mpmath.mpf(z) ** 2 / mpmath.mpf(x) ** a

        def term(n):
            return (-1) ** n * y**n * mpmath.rgamma(2 * n + 2) * mpmath.rgamma(1 - a * (n + 1))

        total = mpmath.mpf(0)
        n = 0
        small = 0
        while small < 4:
            t = term(n)
            total += t
            if n > 2 and abs(t) < mpmath.mpf(10) ** (-digits + 2) * max(abs(total), mpmath.mpf(1e-300)):
                small += 1
            else:
                small = 0
            n += 1
            if n > 100000:
                raise ArithmeticError("kernel residue series did not converge")
        return float(mpmath.mpf(z) * mpmath.mpf(x) ** (-a) * total)


def dirichlet_kernel(alpha: float, x: float, z: float) -> float:
    r"""Kernel of the convolution solution for the special case ``k = lambda^(alpha/2)``.

    This is ``(2 sqrt(pi) / z) H^{0,1}_{2,1}[4 x^alpha / z^2]`` with parameter rows
    ``(0,1), (1/2,1)`` and ``(0, alpha)``, summed over the poles of ``Gamma(1-w)``:

    .. math::

        K(x, z) = z x^{-\alpha} \sum_{n \ge 0}
            \frac{(-1)^n (z^2 / x^\alpha)^n}{\Gamma(2n+2)\,\Gamma(1-\alpha(n+1))}.

    The series is entire in ``z^2/x^alpha``. Severe cancellation (large
    ``z^2/x^alpha``) is handled by re-summing in extended precision.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not z > 0:
        raise ValueError(f"z must be > 0, got {z!r}")
    if not x > 0:
        raise ValueError("the kernel is singular at x = 0; x must be > 0")

    nterms = 32
    while True:
        terms = dirichlet_kernel_terms(alpha, x, z, nterms)
        if not np.all(np.isfinite(terms)):
            break
        peak = np.abs(terms).max()
        if np.abs(terms[-4:]).max() <= 1e-17 * peak:
            total = terms.sum()
            # digits lost to cancellation
            lost = math.log10(peak / abs(total)) if total != 0 else np.inf
            if lost < 5:
                return float(total)
            break
        nterms *= 2
        if nterms > 4096:
            break

    digits = 30
    y = z * z / x**alpha
    # largest term is roughly exp(c y^(1/(2-alpha)))
    digits += int(2 * y ** (1 / (2 - alpha)))
    if digits > 5000:
        raise ArithmeticError(
            f"kernel residue series too ill-conditioned at z^2/x^alpha = {y:.3g}"
        )
    return _kernel_mp(alpha, x, z, digits)


# }}}
