"""Projection, weighted least-squares quasi-interpolation and error bookkeeping.

Test functions are given by their coefficient sequences (:class:`CoeffFunction`).
The function that is actually sampled is the finite series truncated at
level ``k_max``; every L2 quantity is computed in coefficient space for that
series, and the certified tails relate it to the infinite expansion.
"""

from dataclasses import dataclass, field
import math

import mpmath
import numpy as np
import scipy.linalg

from ._series import level_sum, series_tail
from .basis import ChebyshevBasis, FourierBasis, error_function_phi, get_basis, reference_rule
from .errors import DivergenceError, IllConditionedError, NumericError, ShapeError
from .mzfamily import DEFAULT_FLOOR

__all__ = [
    "CoeffFunction",
    "PolyCoeffs",
    "ErrorBreakdown",
    "sobolev_function",
    "analytic_function",
    "hat_function",
    "polynomial_function",
    "make_function",
    "project",
    "project_blackbox",
    "quasi_interpolant",
    "sobolev_norm",
    "sobolev_norm_bounds",
    "error_chain",
]

NORM_LEVELS = 1 << 20


@dataclass(frozen=True, eq=False)
class CoeffFunction:
    """A function given by its basis coefficients.

    Coefficient magnitudes depend only on the level: ``mag0`` on level 0 and
    ``level_mag(m)`` on levels ``m = first, first + stride, ...`` (zero on the
    others). ``coeff(j)`` returns the signed coefficients for 1-based indices.
    ``level_mag`` must accept numpy arrays and mpmath scalars and be
    non-increasing. Finite (custom) functions set ``level_mag = None``.
    """

    basis: object
    kind: str
    params: dict
    coeff: object
    k_max: int
    mag0: float = 1.0
    level_mag: object = None
    stride: int = 1
    first: int = 1
    sup_sigma: float = math.inf
    closed_form: object = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.basis.dim(self.k_max)

    @property
    def series(self):
        """Coefficients of the truncated series, indices ``1..dim(k_max)``."""
        if "series" not in self._cache:
            c = np.asarray(self.coeff(np.arange(1, self.dim + 1)))
            c.flags.writeable = False
            self._cache["series"] = c
        return self._cache["series"]

    def coeffs(self, dim):
        if dim <= self.dim:
            return np.array(self.series[:dim])
        out = np.zeros(dim, dtype=self.series.dtype)
        out[: self.dim] = self.series
        return out

    @property
    def mean(self):
        """``I(f) = <f, phi_1>``."""
        return self.series[0]

    def evaluate(self, x):
        """Values of the truncated series (the function under test)."""
        v = self.basis.eval_series(self.series, x)
        return v.real if np.iscomplexobj(v) and self.is_real else v

    @property
    def is_real(self):
        if "real" not in self._cache:
            c = self.series
            if isinstance(self.basis, FourierBasis):
                # fhat(-m) == conj(fhat(m)); j = 2m holds +m, j = 2m + 1 holds -m
                real = bool(np.array_equal(c[2::2], np.conj(c[1::2])))
            else:
                real = not np.iscomplexobj(c)
            self._cache["real"] = real
        return self._cache["real"]

    def _levels_after(self, k):
        """First non-zero level strictly above ``k``."""
        m = max(k + 1, self.first)
        r = (m - self.first) % self.stride
        return m + (self.stride - r) % self.stride

    def _tail(self, term, k):
        """Enclose ``sum_{m > k} term(m)`` over the non-zero levels."""
        if self.level_mag is None:
            return 0.0, 0.0
        start = self._levels_after(k)
        return series_tail(term, mpmath.mpf(start), self.stride)

    @property
    def tail_l2(self):
        """Upper bound of ``||f - f_K||_2``."""
        if "tail_l2" not in self._cache:
            size = self.basis.level_size
            self._cache["tail_l2"] = math.sqrt(self._tail(lambda m: size * self.level_mag(m) ** 2, self.k_max)[1])
        return self._cache["tail_l2"]

    @property
    def tail_sup_bound(self):
        """Upper bound of ``sup |f - f_K|``."""
        if "tail_sup" not in self._cache:
            size, b = self.basis.level_size, self.basis
            self._cache["tail_sup"] = self._tail(lambda m: size * self.level_mag(m) * b.mode_sup(m), self.k_max)[1]
        return self._cache["tail_sup"]


@dataclass(frozen=True, eq=False)
class PolyCoeffs:
    """Element of ``P_n`` by its coefficients in canonical order."""

    n: float
    a: np.ndarray

    def evaluate(self, basis, x):
        basis = get_basis(basis)
        if len(self.a) != basis.dim(self.n):
            raise ShapeError("coefficient length does not match dim P_n")
        return basis.eval_series(self.a, x)


# ---------------------------------------------------------------------------
# catalog


def _level_of(basis, j):
    return basis.lam(j)


def sobolev_function(basis, sigma, eps=0.05, k_max=4096):
    """``fhat(j) = (1 + lambda_j)^{-sigma - 1/2 - eps}``; lies in ``H^s`` for ``s < sigma + eps``."""
    basis = get_basis(basis)
    s = sigma + 0.5 + eps
    return CoeffFunction(
        basis,
        "sobolev",
        {"sigma": sigma, "eps": eps},
        lambda j: (1.0 + _level_of(basis, j)) ** (-s),
        k_max,
        mag0=1.0,
        level_mag=lambda m: (1 + m) ** (-s),
        sup_sigma=sigma + eps,
    )


def analytic_function(basis, a=1.25, k_max=None):
    """``fhat(j) = r^{lambda_j} / sqrt(a^2 - 1)`` with ``r = a - sqrt(a^2 - 1)``.

    On the torus this is ``1 / (a - cos 2 pi x)``, analytic in the strip
    ``|Im z| < log(1/r) / (2 pi)``.
    """
    if a <= 1:
        raise ValueError("analytic(a) needs a > 1")
    basis = get_basis(basis)
    q = math.sqrt(a * a - 1)
    r = a - q
    if k_max is None:
        # r^K sqrt(2K+1) below 1e-20 of the leading coefficient
        k_max = int(math.ceil(math.log(1e-20) / math.log(r)))
        while r**k_max * math.sqrt(2 * k_max + 1) > 1e-20:
            k_max += 1
    closed = None
    if isinstance(basis, FourierBasis):
        closed = lambda x: 1.0 / (a - np.cos(2 * np.pi * np.asarray(x)))
    elif isinstance(basis, ChebyshevBasis):
        closed = lambda x: (1 + math.sqrt(2) * ((1 - r * np.asarray(x)) / (1 - 2 * r * np.asarray(x) + r * r) - 1)) / q
    return CoeffFunction(
        basis,
        "analytic",
        {"a": a, "r": r},
        lambda j: r ** _level_of(basis, j) / q,
        k_max,
        mag0=1.0 / q,
        level_mag=lambda m: r**m / q,
        closed_form=closed,
    )


def hat_function(basis, k_max=4096):
    """Triangle wave with ``|fhat| ~ lambda^{-2}`` on odd levels.

    fourier: ``|x|`` on ``(-1/2, 1/2]``; chebyshev: ``arccos(x) / pi``, the
    same wave transplanted through ``x = cos(theta)``; legendre: the
    Chebyshev coefficient sequence reused on the Legendre basis (no closed
    form). Lies in ``H^s`` for ``s < 3/2``.
    """
    basis = get_basis(basis)
    if isinstance(basis, FourierBasis):
        c0, c1 = 0.25, 1.0 / math.pi**2
        closed = lambda x: np.abs(np.asarray(x, dtype=float))
    else:
        c0, c1 = 0.5, 2 * math.sqrt(2) / math.pi**2
        closed = (lambda x: np.arccos(np.asarray(x, dtype=float)) / np.pi) if isinstance(basis, ChebyshevBasis) else None

    def coeff(j):
        m = _level_of(basis, j)
        out = np.where(m % 2 == 1, -c1 / np.maximum(m, 1) ** 2, 0.0)
        return np.where(m == 0, c0, out)

    return CoeffFunction(
        basis,
        "hat",
        {},
        coeff,
        k_max,
        mag0=c0,
        level_mag=lambda m: c1 / m**2,
        stride=2,
        first=1,
        sup_sigma=1.5,
        closed_form=closed,
    )


def polynomial_function(basis, coeffs):
    """Finite expansion ``sum_j coeffs[j-1] phi_j``."""
    basis = get_basis(basis)
    coeffs = np.asarray(coeffs)
    dim = len(coeffs)
    n = int(basis.lam(dim)) if dim else 0
    full = np.zeros(basis.dim(n), dtype=coeffs.dtype)
    full[:dim] = coeffs

    def coeff(j):
        j = np.asarray(j)
        out = np.zeros(j.shape, dtype=full.dtype)
        inside = j <= len(full)
        out[inside] = full[j[inside] - 1]
        return out

    return CoeffFunction(basis, "custom", {}, coeff, n, mag0=abs(full[0]) if dim else 0.0)


def make_function(basis, kind, **params):
    """Catalog lookup by name: ``sobolev``, ``analytic``, ``hat``."""
    kinds = {"sobolev": sobolev_function, "analytic": analytic_function, "hat": hat_function}
    try:
        return kinds[kind](basis, **params)
    except KeyError:
        raise ValueError(f"unknown test function kind {kind!r}") from None


# ---------------------------------------------------------------------------
# operations


def project(f, n):
    """Orthogonal projection ``P_n f``: truncation to ``lambda_j <= n``."""
    return PolyCoeffs(n, f.coeffs(f.basis.dim(n)))


def project_blackbox(basis, func, n):
    """Approximate ``P_n f`` for a callable ``f`` via the reference rule.

    Uses a rule resolving modes up to ``4n``; the result is approximate.
    """
    basis = get_basis(basis)
    x, w = reference_rule(basis, 4 * max(int(n), 1))
    v = basis.vander(x, basis.dim(n))
    a = v.conj().T @ (w * np.asarray(func(x)))
    if not basis.is_complex:
        a = a.real
    return PolyCoeffs(n, a)


def quasi_interpolant(gram, samples, floor=DEFAULT_FLOOR):
    """Weighted least-squares fit ``a_n = T_n^{-1} U_n^* y_n`` with ``y_k = tau_k^{1/2} f(x_k)``."""
    samples = np.asarray(samples)
    if samples.shape != (gram.layer.size,):
        raise ShapeError(f"expected {gram.layer.size} samples, got shape {samples.shape}")
    if not gram.certified(floor):
        raise IllConditionedError(f"A_n = {gram.a_n:.3g} <= floor {floor:g} on layer n={gram.n}")
    y = np.sqrt(gram.layer.tau) * samples
    rhs = gram.u.conj().T @ y
    try:
        a = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram.t), rhs)
    except np.linalg.LinAlgError as err:
        raise IllConditionedError(f"Cholesky failed on layer n={gram.n}: {err}") from err
    res = gram.u.conj().T @ (gram.u @ a - y)
    if np.linalg.norm(res) > 1e-8 * np.linalg.norm(y):
        raise NumericError(f"normal-equation residual {np.linalg.norm(res):.3g} too large")
    if not gram.basis.is_complex and not np.iscomplexobj(samples):
        a = a.real
    return PolyCoeffs(gram.n, a)


def sobolev_norm_bounds(f, sigma, levels=NORM_LEVELS):
    """Enclosure ``(lo, hi)`` of ``||f||_{H^sigma}`` for the infinite expansion."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma >= f.sup_sigma:
        raise DivergenceError(
            f"{f.kind} function is not in H^{sigma}; need sigma < {f.sup_sigma}", sup_sigma=f.sup_sigma
        )
    if f.level_mag is None:
        lam = f.basis.lam(np.arange(1, f.dim + 1))
        v = float(np.sum(np.abs(f.series) ** 2 * (1 + lam**2) ** sigma))
        return math.sqrt(v), math.sqrt(v)
    size = f.basis.level_size

    def term_np(m):
        return size * f.level_mag(m) ** 2 * (1 + m * m) ** sigma

    def term(m):
        return size * f.level_mag(m) ** 2 * (1 + m * m) ** sigma

    first = f._levels_after(0)
    body = abs(f.mag0) ** 2 + level_sum(term_np, first, levels, f.stride)
    lo, hi = f._tail(term, levels)
    return math.sqrt(body + lo), math.sqrt(body + hi)


def sobolev_norm(f, sigma, levels=NORM_LEVELS):
    """Certified upper value of ``||f||_{H^sigma} = (sum |fhat_j|^2 (1 + lambda_j^2)^sigma)^{1/2}``."""
    key = ("norm", float(sigma), levels)
    if key not in f._cache:
        f._cache[key] = sobolev_norm_bounds(f, sigma, levels)[1]
    return f._cache[key]


@dataclass(frozen=True)
class ErrorBreakdown:
    """Measured errors and the bounds of the least-squares error chain."""

    n: float
    err_proj: float
    err_gap: float
    err_lsq: float
    sampled_residual: float
    bound_gap: float
    bound_chain: float
    bound_total: float
    norm: float
    phi: float
    kappa: float
    tail_l2: float
    pythagoras_defect: float

    @property
    def holds(self):
        tol = 1e-10
        return (
            self.err_gap**2 <= self.bound_gap + tol
            and self.err_gap**2 <= self.bound_chain + tol
            and self.err_lsq <= self.bound_total + self.tail_l2 + tol
        )


def error_chain(f, gram, p_n, sigma, phi=None, samples=None):
    """Measure ``||f - P_n f||``, ``||P_n f - p_n||``, ``||f - p_n||`` and their bounds.

    ``phi`` defaults to :func:`error_function_phi` at ``(sigma, n)``.
    ``samples`` are ``f`` at the layer nodes (recomputed if omitted).
    """
    dim = gram.dim
    if len(p_n.a) != dim:
        raise ShapeError("p_n does not live in the layer's P_n")
    fk = f.coeffs(max(dim, f.dim))
    e = fk.astype(complex)
    e[:dim] -= p_n.a
    err_lsq2 = float(np.vdot(e, e).real)
    err_proj2 = float(np.sum(np.abs(fk[dim:]) ** 2))
    err_gap2 = float(np.sum(np.abs(fk[:dim] - p_n.a) ** 2))
    if samples is None:
        samples = f.evaluate(gram.layer.nodes)
    y = np.sqrt(gram.layer.tau) * samples
    resid = float(np.sum(np.abs(y - gram.u @ fk[:dim]) ** 2))
    if phi is None:
        phi = error_function_phi(gram.basis, sigma, gram.n).value
    norm = sobolev_norm(f, sigma)
    kappa = gram.kappa
    defect = abs(err_lsq2 - err_proj2 - err_gap2) / max(err_lsq2, np.finfo(float).tiny)
    return ErrorBreakdown(
        n=gram.n,
        err_proj=math.sqrt(err_proj2),
        err_gap=math.sqrt(err_gap2),
        err_lsq=math.sqrt(err_lsq2),
        sampled_residual=resid,
        bound_gap=gram.b_n / gram.a_n**2 * resid,
        bound_chain=(kappa * norm * phi) ** 2,
        bound_total=math.sqrt(1 + kappa**2) * norm * phi,
        norm=norm,
        phi=phi,
        kappa=kappa,
        tail_l2=f.tail_l2,
        pythagoras_defect=defect,
    )
