"""Orthonormal systems with eigenvalue sequences.

Three systems are shipped, each orthonormal for a probability measure and
enumerated so that ``phi_1 == 1`` and ``lambda_1 == 0``:

``fourier``
    ``exp(2 pi i m x)`` on the torus ``(-1/2, 1/2]`` with Lebesgue measure.
    Index ``j`` maps to frequency 0, +1, -1, +2, -2, ... and ``lambda_j = |m|``.
``chebyshev``
    ``sqrt(2) T_k`` (``T_0`` unscaled) on ``[-1, 1]`` with
    ``dx / (pi sqrt(1 - x^2))``; ``lambda_{k+1} = k``.
``legendre``
    ``sqrt(2k + 1) P_k`` on ``[-1, 1]`` with ``dx / 2``; ``lambda_{k+1} = k``.

A "level" ``m`` is the set of indices with ``lambda_j == m``. All index
arguments are 1-based, array columns are 0-based (column ``j - 1``).
"""

from dataclasses import dataclass, field
import math

import mpmath
import numpy as np

from ._series import level_sum, series_tail
from .errors import DegenerateFitError, DivergenceError, DomainError, TruncationError

__all__ = [
    "Basis",
    "FourierBasis",
    "ChebyshevBasis",
    "LegendreBasis",
    "get_basis",
    "eval_basis",
    "dim_pn",
    "reproducing_kernel",
    "spectral_function",
    "PhiValue",
    "SpectralProfile",
    "error_function_phi",
    "spectral_profile",
    "c_sigma",
    "c_sigma_partial",
    "WeylFit",
    "weyl_fit",
    "dyadic_constant",
    "dyadic_tail_bound",
    "reference_rule",
    "sup_grid",
]

_CHUNK = 1024


class Basis:
    """An orthonormal system ``phi_j`` with eigenvalues ``lambda_j``.

    Subclasses provide :meth:`modes`, :meth:`vander`, :meth:`eval_series`
    and :meth:`level_sup`. Instances are stateless and immutable.
    """

    name = None
    domain = (-1.0, 1.0)
    measure = None
    is_complex = False
    # constants of the analytic bound sup_x sum_{lambda <= n} |phi|^2 <= C n^d, n >= 1
    weyl_constant = None
    weyl_exponent = None
    # point where every level attains its supremum
    peak_point = 1.0
    # indices per level m >= 1
    level_size = 1

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))

    @property
    def sigma_crit(self):
        return self.weyl_exponent / 2

    def check_points(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if not np.all(np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"points outside the {self.name} domain [{lo}, {hi}]")
        return x

    def modes(self, dim):
        """Mode descriptors (frequency or degree) of indices ``1..dim``."""
        raise NotImplementedError

    def lam(self, j):
        """Eigenvalue ``lambda_j`` for 1-based indices ``j``."""
        j = np.asarray(j)
        if np.any(j < 1):
            raise ValueError("basis indices start at 1")
        return np.abs(self._modes_of(j)).astype(float)

    def _modes_of(self, j):
        raise NotImplementedError

    def dim(self, n):
        """``#{j : lambda_j <= n}``."""
        if n < 0:
            raise ValueError("degree must be non-negative")
        return self._dim(int(math.floor(n)))

    def _dim(self, n):
        raise NotImplementedError

    def level_multiplicity(self, m):
        """Number of indices on level ``m`` (array-valued)."""
        raise NotImplementedError

    def vander(self, x, dim):
        """Matrix ``V[k, j-1] = phi_j(x_k)`` of shape ``(len(x), dim)``."""
        raise NotImplementedError

    def eval_series(self, coeffs, x):
        """Evaluate ``sum_j coeffs[j-1] phi_j(x)``."""
        raise NotImplementedError

    def level_sup(self, m):
        """``sup_x sum_{lambda_j = m} |phi_j(x)|^2`` for levels ``m >= 1``.

        Must accept numpy arrays and mpmath scalars, and every level must
        attain its supremum at :attr:`peak_point`.
        """
        raise NotImplementedError

    def mode_sup(self, m):
        """``sup_x |phi_j(x)|`` for an index on level ``m >= 1``."""
        raise NotImplementedError

    def grid(self, size):
        """Equispaced evaluation grid over the domain (endpoints included)."""
        return np.linspace(self.domain[0], self.domain[1], size)


class FourierBasis(Basis):
    name = "fourier"
    domain = (-0.5, 0.5)
    measure = "lebesgue on (-1/2, 1/2]"
    is_complex = True
    level_size = 2
    weyl_constant = 3.0
    weyl_exponent = 1.0
    peak_point = 0.0

    def _modes_of(self, j):
        j = np.asarray(j, dtype=np.int64)
        return np.where(j % 2 == 0, j // 2, -(j // 2))

    def modes(self, dim):
        return self._modes_of(np.arange(1, dim + 1))

    def _dim(self, n):
        return 2 * n + 1

    def level_multiplicity(self, m):
        return np.where(np.asarray(m) == 0, 1, 2)

    def vander(self, x, dim):
        x = self.check_points(x)
        return np.exp(2j * np.pi * np.outer(x, self.modes(dim)))

    def eval_series(self, coeffs, x):
        x = self.check_points(x)
        coeffs = np.asarray(coeffs)
        if coeffs.size == 0:
            return np.zeros(x.shape, dtype=complex)
        freqs = self.modes(len(coeffs))
        lo = int(freqs.min())
        span = int(freqs.max()) - lo + 1
        # e^{2 pi i x (lo + q B + r)}: B + Q exponentials per point instead of span
        step = max(1, math.isqrt(span))
        nq = -(-span // step)
        dense = np.zeros(step * nq, dtype=complex)
        np.add.at(dense, freqs - lo, coeffs)
        dense = dense.reshape(nq, step).T
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        r = np.arange(step)
        q = np.arange(nq) * step + lo
        for a in range(0, flat.size, _CHUNK):
            xs = flat[a : a + _CHUNK, None]
            inner = np.exp(2j * np.pi * xs * r) @ dense
            out[a : a + _CHUNK] = np.sum(np.exp(2j * np.pi * xs * q) * inner, axis=1)
        return out.reshape(x.shape)

    def level_sup(self, m):
        return 2 + 0 * m

    def mode_sup(self, m):
        return 1 + 0 * m

    def grid(self, size):
        return -0.5 + np.arange(size) / size


class ChebyshevBasis(Basis):
    name = "chebyshev"
    measure = "dx / (pi sqrt(1 - x^2)) on [-1, 1]"
    weyl_constant = 3.0
    weyl_exponent = 1.0

    def _modes_of(self, j):
        return np.asarray(j, dtype=np.int64) - 1

    def modes(self, dim):
        return np.arange(dim)

    def _dim(self, n):
        return n + 1

    def level_multiplicity(self, m):
        return np.ones_like(np.asarray(m), dtype=int)

    def vander(self, x, dim):
        x = self.check_points(x)
        theta = np.arccos(x)
        v = np.cos(np.outer(theta, np.arange(dim)))
        v[:, 1:] *= math.sqrt(2)
        return v

    def eval_series(self, coeffs, x):
        x = self.check_points(x)
        b = np.array(coeffs, dtype=np.result_type(coeffs, float))
        b[1:] *= math.sqrt(2)
        return np.polynomial.chebyshev.chebval(x, b)

    def level_sup(self, m):
        return 2 + 0 * m

    def mode_sup(self, m):
        return math.sqrt(2) + 0 * m


class LegendreBasis(Basis):
    name = "legendre"
    measure = "dx / 2 on [-1, 1]"
    weyl_constant = 4.0
    weyl_exponent = 2.0

    def _modes_of(self, j):
        return np.asarray(j, dtype=np.int64) - 1

    def modes(self, dim):
        return np.arange(dim)

    def _dim(self, n):
        return n + 1

    def level_multiplicity(self, m):
        return np.ones_like(np.asarray(m), dtype=int)

    def vander(self, x, dim):
        x = self.check_points(x)
        v = np.empty((x.size, dim))
        if dim > 0:
            v[:, 0] = 1.0
        if dim > 1:
            v[:, 1] = x
        for k in range(1, dim - 1):
            v[:, k + 1] = ((2 * k + 1) * x * v[:, k] - k * v[:, k - 1]) / (k + 1)
        v *= np.sqrt(2 * np.arange(dim) + 1.0)
        return v

    def eval_series(self, coeffs, x):
        x = self.check_points(x)
        coeffs = np.asarray(coeffs)
        b = coeffs * np.sqrt(2 * np.arange(len(coeffs)) + 1.0)
        return np.polynomial.legendre.legval(x, b)

    def level_sup(self, m):
        return 2 * m + 1

    def mode_sup(self, m):
        return (2 * m + 1) ** 0.5


_BASES = {
    "fourier": FourierBasis,
    "fourier_torus": FourierBasis,
    "torus": FourierBasis,
    "chebyshev": ChebyshevBasis,
    "legendre": LegendreBasis,
}


def get_basis(name):
    """Look up a basis by name (``"fourier"``, ``"chebyshev"``, ``"legendre"``)."""
    if isinstance(name, Basis):
        return name
    try:
        return _BASES[name.strip().lower()]()
    except KeyError:
        raise ValueError(f"unknown basis {name!r}; expected one of fourier, chebyshev, legendre") from None


def eval_basis(basis, j, x):
    """Return ``phi_j(x)``."""
    basis = get_basis(basis)
    if j < 1:
        raise ValueError("basis indices start at 1")
    scalar = np.ndim(x) == 0
    v = basis.vander(np.atleast_1d(x), j)[:, j - 1]
    return v[0] if scalar else v


def dim_pn(basis, n):
    """Dimension of ``P_n``."""
    return get_basis(basis).dim(n)


def reproducing_kernel(basis, n, x, y):
    """``k^{(n)}_x(y) = sum_{lambda_j <= n} conj(phi_j(x)) phi_j(y)``."""
    basis = get_basis(basis)
    d = basis.dim(n)
    vx = basis.vander(np.atleast_1d(x), d)
    vy = basis.vander(np.atleast_1d(y), d)
    k = np.einsum("ij,ij->i", vx.conj(), vy)
    if not basis.is_complex:
        k = k.real
    return k[0] if np.ndim(x) == 0 and np.ndim(y) == 0 else k


def spectral_function(basis, n, x):
    """``sum_{lambda_j <= n} |phi_j(x)|^2``, the reciprocal Christoffel function."""
    basis = get_basis(basis)
    v = basis.vander(np.atleast_1d(x), basis.dim(n))
    s = np.sum(np.abs(v) ** 2, axis=1)
    return s[0] if np.ndim(x) == 0 else s


def sup_grid(basis, grid_size):
    return get_basis(basis).grid(grid_size)


def reference_rule(basis, max_mode):
    """Nodes and probability weights exact enough for modes up to ``max_mode``.

    Torus and Chebyshev use composite 16-point Gauss-Legendre panels (in
    ``theta = arccos x`` for Chebyshev), Legendre a single Gauss rule.
    """
    basis = get_basis(basis)
    g, gw = np.polynomial.legendre.leggauss(16)
    panels = max(4, 2 * -(-4 * (max_mode + 1) // 16))
    if isinstance(basis, LegendreBasis):
        x, w = np.polynomial.legendre.leggauss(max(4 * (max_mode + 1), 32))
        return x, w / 2
    if isinstance(basis, FourierBasis):
        a, b = -0.5, 0.5
    else:
        a, b = 0.0, np.pi
    h = (b - a) / panels
    edges = a + h * np.arange(panels)
    t = (edges[:, None] + h * (g + 1) / 2).ravel()
    w = np.tile(gw * h / 2, panels) / (b - a)
    if isinstance(basis, ChebyshevBasis):
        t = np.cos(t)
    return t, w


# ---------------------------------------------------------------------------
# error function and Weyl's law


@dataclass(frozen=True)
class PhiValue:
    """One value of the remainder function ``phi_sigma(n)``.

    ``value`` is an upper estimate, ``lower`` a lower estimate; the exact
    grid supremum lies in ``[lower, value]`` and ``tail_bound = value - lower``.
    ``partial`` is the grid supremum of the explicitly evaluated levels
    ``n < lambda <= k_max`` alone.
    """

    sigma: float
    n: float
    value: float
    lower: float
    tail_bound: float
    k_max: int
    partial: float


@dataclass(frozen=True)
class SpectralProfile:
    sigma: float
    c_sigma: float
    phi: dict = field(default_factory=dict)
    k_max: int = 0
    tail_bound: float = 0.0

    def phi_sigma(self, n):
        return self.phi[n].value


def _weight_np(sigma):
    return lambda m: (1.0 + m * m) ** (-sigma)


def _level_tail(basis, sigma, first, far_level):
    """Enclose ``sum_{m >= first} level_sup(m) (1 + m^2)^{-sigma}``."""
    w = _weight_np(sigma)
    body = level_sum(lambda m: basis.level_sup(m) * w(m), first, far_level)

    def g(m):
        return basis.level_sup(m) * (1 + m * m) ** (-sigma)

    start = max(first, far_level + 1)
    lo, hi = series_tail(g, mpmath.mpf(start))
    return body + lo, body + hi


def _grid_partial(basis, sigma, n, k_max, x):
    """``sum_{n < lambda_j <= k_max} |phi_j(x)|^2 (1 + lambda_j^2)^{-sigma}``."""
    lo_dim = basis.dim(n)
    hi_dim = basis.dim(k_max)
    if hi_dim <= lo_dim:
        return np.zeros(np.shape(x))
    v = basis.vander(x, hi_dim)[:, lo_dim:]
    lam = basis.lam(np.arange(lo_dim + 1, hi_dim + 1))
    return (np.abs(v) ** 2) @ ((1 + lam**2) ** (-sigma))


def default_k_max(n):
    """Smallest level with ``lambda >= max(4n, 64)``."""
    return int(math.ceil(max(4 * n, 64)))


def error_function_phi(basis, sigma, n, grid_size=512, k_max=None, far_level=1 << 20, rtol=1e-3):
    r"""Remainder function ``phi_sigma(n)``.

    Levels ``n < lambda <= k_max`` are evaluated on an equispaced grid of
    ``grid_size`` points (a lower estimate of the true supremum). Levels up
    to ``far_level`` are added through the level suprema, the remaining tail
    is enclosed by the integral test. ``rtol`` bounds the enclosure width of
    ``phi^2`` relative to ``phi^2``.
    """
    basis = get_basis(basis)
    if sigma <= basis.sigma_crit:
        raise DivergenceError(
            f"phi_sigma diverges for sigma={sigma} <= sigma_crit={basis.sigma_crit}",
            sup_sigma=basis.sigma_crit,
        )
    if k_max is None:
        k_max = default_k_max(n)
    k_max = int(k_max)
    grid = basis.grid(grid_size)
    partial = _grid_partial(basis, sigma, n, k_max, grid)
    partial_sup = float(partial.max()) if partial.size else 0.0
    partial_peak = float(_grid_partial(basis, sigma, n, k_max, np.array([basis.peak_point]))[0])
    first = int(math.floor(max(n, k_max))) + 1
    tail_lo, tail_hi = _level_tail(basis, sigma, first, max(far_level, first))
    hi2 = partial_sup + tail_hi
    lo2 = partial_peak + tail_lo
    if hi2 - lo2 > rtol * hi2:
        raise TruncationError(
            f"tail enclosure {hi2 - lo2:.3g} exceeds {rtol:g} of phi^2={hi2:.3g}; raise k_max or far_level"
        )
    value, lower = math.sqrt(hi2), math.sqrt(max(lo2, 0.0))
    return PhiValue(sigma, n, value, lower, value - lower, k_max, math.sqrt(partial_sup))


def c_sigma(basis, sigma, **kw):
    """Embedding constant ``C_sigma`` (upper estimate).

    Level 0 holds only ``phi_1 == 1``, so ``C_sigma^2 = 1 + phi_sigma(0)^2``.
    """
    return math.sqrt(1.0 + error_function_phi(basis, sigma, 0, **kw).value ** 2)


def spectral_profile(basis, sigma, degrees, **kw):
    basis = get_basis(basis)
    phi = {n: error_function_phi(basis, sigma, n, **kw) for n in degrees}
    return SpectralProfile(
        sigma=sigma,
        c_sigma=c_sigma(basis, sigma, **kw),
        phi=phi,
        k_max=max(p.k_max for p in phi.values()),
        tail_bound=max(p.tail_bound for p in phi.values()),
    )


def c_sigma_partial(basis, sigma, k_max, grid_size=512):
    """Grid supremum of ``sum_{lambda_j <= k_max} |phi_j|^2 (1 + lambda_j^2)^{-sigma}``.

    No convergence check; used to observe the critical exponent.
    """
    basis = get_basis(basis)
    x = basis.grid(grid_size)
    w = _weight_np(sigma)
    if isinstance(basis, FourierBasis):
        # |phi|^2 == 1, avoid a (grid x 2 k_max) matrix
        return 1.0 + level_sum(lambda m: 2 * w(m), 1, k_max)
    return float(np.max(1.0 + _grid_partial(basis, sigma, 0, k_max, x)))


def dyadic_tail_bound(c, d, sigma, lam):
    """Dyadic-block bound for ``sum_{lambda_j > lam} |phi_j(x)|^2 (1+lambda_j^2)^{-sigma}``.

    Requires ``sup_x sum_{lambda <= t}|phi|^2 <= c t^d`` for ``t >= lam``
    and ``lam >= 1``.
    """
    if sigma <= d / 2:
        raise DivergenceError("dyadic bound needs sigma > d/2", sup_sigma=d / 2)
    return c * 4.0**sigma / (1.0 - 2.0 ** (d - 2 * sigma)) * lam ** (d - 2 * sigma)


def dyadic_constant(c, d, sigma):
    """Constant in ``phi_sigma(n) <= K n^{-sigma + d/2}`` from the dyadic estimate."""
    return math.sqrt(c * 4.0**sigma / (1.0 - 2.0 ** (d - 2 * sigma)))


@dataclass(frozen=True)
class WeylFit:
    """Least-squares fit ``sup_x spectral(n, x) ~ c n^d`` in log-log scale."""

    d: float
    c: float
    grid_size: int
    n_range: tuple
    residual: float
    sup_values: tuple

    @property
    def sigma_crit(self):
        return self.d / 2

    def bound(self, n):
        """``c n^d`` widened by the maximal log residual."""
        return self.c * n**self.d * math.exp(self.residual)


def weyl_fit(basis, n_range, grid_size=512):
    basis = get_basis(basis)
    n_range = tuple(int(n) for n in n_range)
    if len(n_range) < 4:
        raise ValueError("weyl_fit needs at least 4 degrees")
    if min(n_range) < 1 or len(set(n_range)) < 2:
        raise DegenerateFitError(f"log-log fit needs distinct positive degrees, got {n_range}")
    x = basis.grid(grid_size)
    sups = np.array([np.max(spectral_function(basis, n, x)) for n in n_range])
    logn, logs = np.log(n_range), np.log(sups)
    if np.ptp(logs) < 1e-12:
        raise DegenerateFitError("spectral function is constant over the degree range")
    d, logc = np.polyfit(logn, logs, 1)
    resid = float(np.max(np.abs(logs - (logc + d * logn))))
    return WeylFit(float(d), float(math.exp(logc)), grid_size, n_range, resid, tuple(sups.tolist()))
