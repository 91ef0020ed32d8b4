"""Sampling layers, design/Gram matrices and frame bounds.

A layer is the ``n``-th slice of a sampling family: nodes ``x_{n,k}`` and
positive weights ``tau_{n,k}``. Assembling a layer against a basis gives the
weighted design matrix ``U[k, l] = tau_k^{1/2} phi_l(x_k)`` and the Gram
matrix ``T = U^* U`` whose extreme eigenvalues are the frame bounds
``A_n <= B_n``. Certification is empirical: generators promise nothing,
:func:`frame_report` is the ground truth.
"""

from dataclasses import dataclass
import csv
import io
import logging
import math

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .basis import FourierBasis, LegendreBasis, ChebyshevBasis, get_basis
from .errors import DomainError, NumericError, UnderdeterminedLayerError

__all__ = [
    "DEFAULT_FLOOR",
    "Layer",
    "generate_uniform",
    "generate_jittered",
    "generate_random",
    "GramSystem",
    "frame_bounds",
    "assemble",
    "FrameRow",
    "FrameReport",
    "LayerError",
    "frame_report",
    "write_nodes",
    "read_nodes",
]

logger = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-8
DENSE_MAX = 512


@dataclass(frozen=True, eq=False)
class Layer:
    """Nodes and strictly positive weights of one degree ``n``."""

    n: int
    nodes: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        tau = np.array(self.tau, dtype=float).ravel()
        if nodes.shape != tau.shape:
            raise ValueError("nodes and tau must have equal length")
        if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
            raise ValueError("weights tau must be strictly positive")
        nodes.flags.writeable = False
        tau.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "tau", tau)

    @property
    def size(self):
        return self.nodes.size

    def __eq__(self, other):
        return (
            isinstance(other, Layer)
            and self.n == other.n
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.tau, other.tau)
        )


def _n_nodes(oversampling, dim):
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    # guard against 2.0 * 9 -> 18.000000000000004
    return int(math.ceil(oversampling * dim - 1e-9))


def _uniform_parts(basis, n, oversampling):
    """Return ``(L, base, spacing, tau)`` where nodes are ``base`` in a chart."""
    dim = basis.dim(n)
    L = _n_nodes(oversampling, dim)
    if isinstance(basis, FourierBasis):
        return L, np.arange(L) / L, 1.0 / L, np.full(L, 1.0 / L)
    if isinstance(basis, ChebyshevBasis):
        theta = (np.arange(1, L + 1) - 0.5) * np.pi / L
        return L, theta, np.pi / L, np.full(L, 1.0 / L)
    x, w = np.polynomial.legendre.leggauss(L)
    # ascending x -> descending theta; chart in theta for jitter
    return L, np.arccos(x), np.pi / L, w / 2


def _to_domain(basis, chart):
    if isinstance(basis, FourierBasis):
        # wrap into [-1/2, 1/2)
        return np.mod(chart, 1.0) - 0.5
    return np.cos(np.clip(chart, 0.0, np.pi))


def generate_uniform(basis, n, oversampling=1.0):
    """Reference layer.

    fourier: ``L = ceil(oversampling (2n+1))`` nodes ``-1/2 + k/L``, ``tau = 1/L``.
    chebyshev: ``x = cos(theta)`` with ``theta = (k - 1/2) pi / L``, ``tau = 1/L``.
    legendre: ``L``-point Gauss-Legendre nodes, weights halved.
    """
    basis = get_basis(basis)
    L, chart, _, tau = _uniform_parts(basis, n, oversampling)
    return Layer(n, _to_domain(basis, chart), tau)


def _jitter_offsets(seed, n, size):
    """Uniform offsets in ``[-1, 1)`` from a counter-based generator keyed by ``(seed, n)``.

    Offset ``k`` is the ``k``-th draw of the Philox stream, so it depends only
    on ``(seed, n, k)``.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(n)])))
    return 2.0 * rng.random(size) - 1.0


def generate_jittered(basis, n, oversampling=1.0, jitter=0.25, seed=0):
    """Uniform layer with every node moved by at most ``jitter`` grid spacings.

    For the polynomial bases the displacement is applied in
    ``theta = arccos x`` (spacing ``pi / L``). Weights are those of
    :func:`generate_uniform`.
    """
    if not 0 <= jitter < 0.5:
        raise ValueError("jitter must lie in [0, 1/2)")
    basis = get_basis(basis)
    L, chart, h, tau = _uniform_parts(basis, n, oversampling)
    if jitter == 0:
        return Layer(n, _to_domain(basis, chart), tau)
    chart = chart + jitter * h * _jitter_offsets(seed, n, L)
    return Layer(n, _to_domain(basis, chart), tau)


def generate_random(basis, n, oversampling=4.0, seed=0):
    """Independent random nodes with density-compensating weights.

    fourier: uniform on the torus; chebyshev and legendre: arcsine
    distribution ``x = cos(pi U)``. Weights are ``(d mu / d nu)(x_k) / L``
    for the sampling law ``nu``, so ``E[sum tau] = 1``.
    """
    basis = get_basis(basis)
    L = _n_nodes(oversampling, basis.dim(n))
    u = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(n), 1]))).random(L)
    if isinstance(basis, FourierBasis):
        return Layer(n, u - 0.5, np.full(L, 1.0 / L))
    x = np.cos(np.pi * u)
    if isinstance(basis, LegendreBasis):
        tau = 0.5 * np.pi * np.sqrt(1.0 - x**2) / L
        keep = tau > 0
        return Layer(n, x[keep], tau[keep])
    return Layer(n, x, np.full(L, 1.0 / L))


# ---------------------------------------------------------------------------
# Gram system


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Weighted design matrix, Gram matrix and frame bounds of one layer."""

    basis: object
    layer: Layer
    u: np.ndarray
    t: np.ndarray
    a_n: float
    b_n: float

    @property
    def n(self):
        return self.layer.n

    @property
    def dim(self):
        return self.u.shape[1]

    @property
    def kappa(self):
        return self.b_n / self.a_n if self.a_n > 0 else math.inf

    def certified(self, floor=DEFAULT_FLOOR):
        return self.a_n > floor


def frame_bounds(t, dense_max=DENSE_MAX, rtol=1e-10):
    """Extreme eigenvalues ``(A, B)`` of a Hermitian PSD matrix.

    Dense solver up to ``dense_max``; above it Lanczos iteration (a Krylov
    accelerated power iteration) on ``T`` for ``B`` and on ``B I - T`` for
    ``A``, capped at ``10 dim`` iterations.
    """
    dim = t.shape[0]
    if dim <= dense_max:
        ev = scipy.linalg.eigvalsh(t)
        return float(ev[0]), float(ev[-1])
    v0 = np.ones(dim, dtype=t.dtype)
    kw = dict(k=1, which="LA", tol=rtol, maxiter=10 * dim, v0=v0, return_eigenvectors=False)
    b = float(scipy.sparse.linalg.eigsh(t, **kw)[0])
    shifted = scipy.sparse.linalg.LinearOperator(t.shape, matvec=lambda v: b * v - t @ v, dtype=t.dtype)
    c = float(scipy.sparse.linalg.eigsh(shifted, **kw)[0])
    return b - c, b


def _toeplitz_spread(basis, t):
    """Max over diagonals of the entry spread of a frequency-ordered Gram."""
    order = np.argsort(basis.modes(t.shape[0]), kind="stable")
    ts = t[np.ix_(order, order)]
    dim = ts.shape[0]
    spread = 0.0
    for off in range(-(dim - 1), dim):
        d = np.diagonal(ts, off)
        spread = max(spread, float(np.max(np.abs(d - d[0]))))
    return spread


def assemble(basis, layer, dense_max=DENSE_MAX):
    """Build ``U``, ``T = U^* U`` and the frame bounds of ``layer``."""
    basis = get_basis(basis)
    dim = basis.dim(layer.n)
    if layer.size < dim:
        raise UnderdeterminedLayerError(f"layer n={layer.n} has {layer.size} nodes < dim P_n = {dim}")
    v = basis.vander(layer.nodes, dim)
    if not np.all(np.isfinite(v)):
        raise NumericError(f"non-finite basis values on layer n={layer.n}")
    u = np.sqrt(layer.tau)[:, None] * v
    t = u.conj().T @ u
    t = (t + t.conj().T) / 2
    if isinstance(basis, FourierBasis):
        spread = _toeplitz_spread(basis, t)
        if spread > 1e-10:
            raise NumericError(f"fourier Gram is not Toeplitz (spread {spread:.3g})")
    a, b = frame_bounds(t, dense_max)
    return GramSystem(basis, layer, u, t, a, b)


@dataclass(frozen=True)
class FrameRow:
    n: int
    size: int
    a_n: float
    b_n: float
    kappa: float
    certified: bool


@dataclass(frozen=True)
class FrameReport:
    rows: tuple
    floor: float

    @property
    def a(self):
        return min(r.a_n for r in self.rows)

    @property
    def b(self):
        return max(r.b_n for r in self.rows)

    @property
    def kappa(self):
        return self.b / self.a if self.a > 0 else math.inf

    @property
    def failing(self):
        return [r.n for r in self.rows if not r.certified]


class LayerError(Exception):
    """Wraps an assembly failure with the index of the offending layer."""

    def __init__(self, index, err):
        super().__init__(f"layer {index}: {err}")
        self.index = index
        self.__cause__ = err


def frame_report(basis, layers, floor=DEFAULT_FLOOR):
    """Per-layer and global frame bounds; layers with ``A_n <= floor`` are flagged."""
    basis = get_basis(basis)
    if not layers:
        raise ValueError("frame_report needs at least one layer")
    rows = []
    for i, layer in enumerate(layers):
        try:
            g = assemble(basis, layer)
        except Exception as err:
            raise LayerError(i, err) from err
        rows.append(FrameRow(layer.n, layer.size, g.a_n, g.b_n, g.kappa, g.certified(floor)))
    return FrameReport(tuple(rows), floor)


# ---------------------------------------------------------------------------
# node files: header n,k,x,tau; k is 1-based within each layer


def fmt(v):
    """17 significant digits; round-trips float64 exactly."""
    return format(float(v), ".17g")


def write_nodes(layers, path_or_buf):
    rows = ["n,k,x,tau"]
    for layer in layers:
        for k, (x, t) in enumerate(zip(layer.nodes, layer.tau), start=1):
            rows.append(f"{layer.n},{k},{fmt(x)},{fmt(t)}")
    text = "\n".join(rows) + "\n"
    if isinstance(path_or_buf, io.TextIOBase):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_nodes(path_or_buf, basis=None):
    """Parse a node file into layers ordered by ``n``.

    Zero-weight nodes are dropped with a warning; negative weights, nodes
    outside the basis domain or layers with fewer nodes than ``dim P_n``
    raise.
    """
    if isinstance(path_or_buf, io.TextIOBase):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["n", "k", "x", "tau"]:
        raise ValueError("node file must start with header 'n,k,x,tau'")
    groups = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields")
        n, _, x, t = int(row[0]), int(row[1]), float(row[2]), float(row[3])
        groups.setdefault(n, ([], []))
        groups[n][0].append(x)
        groups[n][1].append(t)
    basis = get_basis(basis) if basis is not None else None
    layers = []
    for n in sorted(groups):
        x, t = np.array(groups[n][0]), np.array(groups[n][1])
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError(f"layer n={n}: negative or non-finite weight")
        zero = t == 0
        if np.any(zero):
            logger.warning("layer n=%d: dropping %d zero-weight node(s)", n, int(zero.sum()))
            x, t = x[~zero], t[~zero]
        if basis is not None:
            try:
                basis.check_points(x)
            except DomainError as err:
                raise DomainError(f"layer n={n}: {err}") from None
            if x.size < basis.dim(n):
                raise UnderdeterminedLayerError(f"layer n={n} has {x.size} nodes < dim P_n = {basis.dim(n)}")
        layers.append(Layer(n, x, t))
    return layers
