"""Quadrature rules from the dual frame of a sampling layer.

The weights are ``w_k = tau_k^{1/2} conj((U c)_k)`` where ``T c = e_1``.
With inner products linear in the first argument this equals
``tau_k^{1/2} <e_k, 1>`` for the dual frame ``e_k = S^{-1}(tau_k^{1/2} k_{x_k})``,
and the rule integrates every element of ``P_n`` exactly. The dual frame is
never formed; one Hermitian solve per layer suffices. Weights may be
negative or complex; nothing is post-processed.
"""

from dataclasses import dataclass
import csv
import io
import math

import numpy as np
import scipy.linalg

from .basis import error_function_phi
from .errors import IllConditionedError, ShapeError
from .mzfamily import DEFAULT_FLOOR, Layer, fmt
from .approx import sobolev_norm

__all__ = [
    "QuadRule",
    "QuadReport",
    "dual_weights",
    "integrate",
    "quad_error_report",
    "write_rules",
    "read_rules",
]


@dataclass(frozen=True, eq=False)
class QuadRule:
    basis: object
    layer: Layer
    w: np.ndarray
    exactness_defect: float
    dual_energy: float
    a_n: float
    b_n: float

    @property
    def n(self):
        return self.layer.n

    @property
    def kappa(self):
        return self.b_n / self.a_n

    @property
    def max_imag(self):
        return float(np.max(np.abs(np.imag(self.w)))) if self.w.size else 0.0


def dual_weights(gram, floor=DEFAULT_FLOOR):
    """Dual-frame quadrature weights for the layer of ``gram``."""
    if not gram.certified(floor):
        raise IllConditionedError(f"A_n = {gram.a_n:.3g} <= floor {floor:g} on layer n={gram.n}")
    e1 = np.zeros(gram.dim)
    e1[0] = 1.0
    try:
        c = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram.t), e1)
    except np.linalg.LinAlgError as err:
        raise IllConditionedError(f"Cholesky failed on layer n={gram.n}: {err}") from err
    sqtau = np.sqrt(gram.layer.tau)
    w = sqtau * np.conj(gram.u @ c)
    if not gram.basis.is_complex:
        w = w.real
    v = gram.u / sqtau[:, None]
    moments = v.T @ w
    moments[0] -= 1.0
    defect = float(np.max(np.abs(moments)))
    energy = float(np.sum(np.abs(w) ** 2 / gram.layer.tau))
    return QuadRule(gram.basis, gram.layer, w, defect, energy, gram.a_n, gram.b_n)


def integrate(rule, samples):
    """``I_n(f) = sum_k f(x_k) w_k``."""
    samples = np.asarray(samples)
    if samples.shape != rule.w.shape:
        raise ShapeError(f"expected {rule.w.size} samples, got shape {samples.shape}")
    return samples @ rule.w


@dataclass(frozen=True)
class QuadReport:
    n: float
    exact: complex
    approx: complex
    error: float
    bound_sobolev: float
    bound_best: float
    sup_tail: float
    stability_lhs: float
    stability_rhs: float
    norm: float
    phi: float
    kappa: float
    tail_sup: float

    @property
    def holds(self):
        tol = 1e-10
        return (
            self.error <= self.bound_sobolev + (1 + math.sqrt(self.kappa)) * self.tail_sup + tol
            and self.error <= self.bound_best + tol
            and self.stability_lhs <= self.stability_rhs + tol
        )


def quad_error_report(f, rule, sigma, phi=None, samples=None, grid_size=4096):
    """Quadrature error and its bounds for a catalog function.

    ``bound_best`` uses ``P_n f`` as the competitor in the best-approximation
    bound, with its sup norm taken over an equispaced grid plus the nodes.
    """
    basis = rule.basis
    if samples is None:
        samples = f.evaluate(rule.layer.nodes)
    approx = integrate(rule, samples)
    exact = f.mean
    err = float(abs(exact - approx))
    dim = basis.dim(rule.n)
    tail = f.coeffs(max(f.dim, dim))
    tail[:dim] = 0
    pts = np.concatenate([basis.grid(grid_size), rule.layer.nodes])
    sup_tail = float(np.max(np.abs(basis.eval_series(tail, pts))))
    if phi is None:
        phi = error_function_phi(basis, sigma, rule.n).value
    norm = sobolev_norm(f, sigma)
    kap = rule.kappa
    return QuadReport(
        n=rule.n,
        exact=exact,
        approx=approx,
        error=err,
        bound_sobolev=(1 + math.sqrt(kap)) * norm * phi,
        bound_best=(1 + math.sqrt(kap)) * sup_tail,
        sup_tail=sup_tail,
        stability_lhs=float(abs(approx) ** 2),
        stability_rhs=float(np.sum(np.abs(samples) ** 2 * rule.layer.tau)) / rule.a_n,
        norm=norm,
        phi=phi,
        kappa=kap,
        tail_sup=f.tail_sup_bound,
    )


# ---------------------------------------------------------------------------
# rule files: header n,k,x,w_re,w_im


def write_rules(rules, path_or_buf):
    lines = ["n,k,x,w_re,w_im"]
    for rule in rules:
        w = np.asarray(rule.w, dtype=complex)
        for k, (x, wk) in enumerate(zip(rule.layer.nodes, w), start=1):
            lines.append(f"{rule.n},{k},{fmt(x)},{fmt(wk.real)},{fmt(wk.imag)}")
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_buf, io.TextIOBase):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_rules(path_or_buf):
    """Return ``{n: (nodes, weights)}`` with complex weights."""
    if isinstance(path_or_buf, io.TextIOBase):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["n", "k", "x", "w_re", "w_im"]:
        raise ValueError("rule file must start with header 'n,k,x,w_re,w_im'")
    out = {}
    for row in reader:
        if not row:
            continue
        n = int(row[0])
        xs, ws = out.setdefault(n, ([], []))
        xs.append(float(row[2]))
        ws.append(complex(float(row[3]), float(row[4])))
    return {n: (np.array(xs), np.array(ws)) for n, (xs, ws) in sorted(out.items())}
