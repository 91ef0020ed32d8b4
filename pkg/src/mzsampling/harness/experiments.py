"""Convergence sweeps over degree schedules and rate fitting."""

from dataclasses import dataclass, field
from functools import lru_cache
import logging
import math

import numpy as np

from ..approx import error_chain, make_function, quasi_interpolant
from ..basis import dyadic_constant, error_function_phi, get_basis, weyl_fit
from ..errors import DegenerateFitError, MZError
from ..mzfamily import (
    assemble,
    fmt,
    frame_report,
    generate_jittered,
    generate_random,
    generate_uniform,
    read_nodes,
)
from ..quadrature import dual_weights, quad_error_report

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = (
    "n",
    "L_n",
    "A_n",
    "B_n",
    "kappa_n",
    "err_proj",
    "err_lsq",
    "bound_eq14",
    "quad_err",
    "bound_eq19",
    "defect",
    "certified",
)
FRAME_COLUMNS = ("n", "L_n", "A_n", "B_n", "kappa_n", "certified")
WEYL_COLUMNS = ("n", "sup_spectral", "weyl_bound", "phi_sigma", "phi_tail_bound", "dyadic_bound")
FIT_COLUMNS = ("quantity", "kind", "slope", "intercept", "residual", "points")


@dataclass(frozen=True)
class RateFit:
    """OLS fit of ``log10 err`` against ``log10 n`` (algebraic) or ``n`` (geometric)."""

    kind: str
    slope: float
    intercept: float
    residual: float
    points: int


def fit_rate(ns, errs, kind="algebraic", noise_floor=1e-13):
    """Fit a convergence rate, dropping rows below ``noise_floor``."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = np.isfinite(errs) & (errs >= noise_floor) & (ns > 0)
    if keep.sum() < 2:
        raise DegenerateFitError(f"only {int(keep.sum())} usable rows for the rate fit")
    x = np.log10(ns[keep]) if kind == "algebraic" else ns[keep]
    y = np.log10(errs[keep])
    slope, icept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (icept + slope * x))))
    return RateFit(kind, float(slope), float(icept), resid, int(keep.sum()))


def make_layers(cfg):
    """Layers for every degree of the schedule, keyed by ``n``."""
    basis = get_basis(cfg.basis)
    if cfg.generator == "file":
        layers = {lay.n: lay for lay in read_nodes(cfg.node_file, basis)}
        missing = [n for n in cfg.degrees if n not in layers]
        if missing:
            raise MZError(f"node file has no layers for n={missing}")
        return {n: layers[n] for n in cfg.degrees}
    out = {}
    for n in cfg.degrees:
        if cfg.generator == "uniform":
            out[n] = generate_uniform(basis, n, cfg.oversampling)
        elif cfg.generator == "jittered":
            out[n] = generate_jittered(basis, n, cfg.oversampling, cfg.jitter, cfg.seed)
        else:
            out[n] = generate_random(basis, n, cfg.oversampling, cfg.seed)
    return out


def catalog_function(cfg):
    """The catalog test function named by ``cfg.function``."""
    basis = get_basis(cfg.basis)
    if cfg.function == "analytic":
        return make_function(basis, "analytic", a=cfg.a, k_max=cfg.k_max)
    if cfg.function == "sobolev":
        return make_function(basis, "sobolev", sigma=cfg.fsigma, eps=cfg.eps, k_max=cfg.k_max or 4096)
    return make_function(basis, "hat", k_max=cfg.k_max or 4096)


@lru_cache(maxsize=1024)
def _phi(basis_name, sigma, n, grid_size):
    # shared by every sweep over the same basis and schedule
    return error_function_phi(get_basis(basis_name), sigma, n, grid_size=grid_size).value


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    uncertified: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def _row(cfg, basis, f, layer):
    """One report row; returns ``(row, violations)``."""
    nan = math.nan
    row = dict.fromkeys(CONVERGENCE_COLUMNS, nan)
    row.update(n=layer.n, L_n=layer.size, certified=0)
    gram = assemble(basis, layer)
    row.update(A_n=gram.a_n, B_n=gram.b_n, kappa_n=gram.kappa)
    if not gram.certified(cfg.floor):
        return row, []
    row["certified"] = 1
    phi = _phi(basis.name, cfg.sigma, layer.n, cfg.grid_size)
    samples = f.evaluate(layer.nodes)
    p = quasi_interpolant(gram, samples, cfg.floor)
    chain = error_chain(f, gram, p, cfg.sigma, phi=phi, samples=samples)
    rule = dual_weights(gram, cfg.floor)
    quad = quad_error_report(f, rule, cfg.sigma, phi=phi, samples=samples, grid_size=cfg.sup_grid)
    row.update(
        err_proj=chain.err_proj,
        err_lsq=chain.err_lsq,
        bound_eq14=chain.bound_total,
        quad_err=quad.error,
        bound_eq19=quad.bound_sobolev,
        defect=rule.exactness_defect,
    )
    tol = cfg.tol
    bad = []
    checks = {
        "gap": chain.err_gap**2 <= chain.bound_gap + tol,
        "gap_sobolev": chain.err_gap**2 <= chain.bound_chain + tol,
        "lsq_sobolev": chain.err_lsq <= chain.bound_total + chain.tail_l2 + tol,
        "lsq_sup": chain.err_lsq
        <= math.sqrt(1 + gram.kappa**2) * quad.sup_tail + chain.tail_l2 + tol,
        "quad_sobolev": quad.error <= quad.bound_sobolev + (1 + math.sqrt(quad.kappa)) * quad.tail_sup + tol,
        "quad_sup": quad.error <= quad.bound_best + tol,
        "stability": quad.stability_lhs <= quad.stability_rhs + tol,
        "dual_energy": rule.dual_energy <= 1 / gram.a_n + tol,
    }
    bad.extend(f"n={layer.n}: {name}" for name, good in checks.items() if not good)
    if cfg.generator == "uniform" and not np.allclose(rule.w, layer.tau, rtol=0, atol=1e-12):
        bad.append(f"n={layer.n}: uniform rule differs from tau")
    return row, bad


def _convergence(cfg, fit_columns):
    basis = get_basis(cfg.basis)
    f = catalog_function(cfg)
    layers = make_layers(cfg)
    report = ConvergenceReport()
    for n in cfg.degrees:
        row, bad = _row(cfg, basis, f, layers[n])
        report.rows.append(row)
        report.violations.extend(bad)
        if not row["certified"]:
            logger.warning("layer n=%d not certified (A_n=%.3g)", n, row["A_n"])
            report.uncertified.append(n)
    ns = [r["n"] for r in report.rows]
    for col in fit_columns:
        try:
            report.fits[col] = fit_rate(ns, [r[col] for r in report.rows], cfg.rate_kind, cfg.noise_floor)
        except DegenerateFitError as err:
            logger.warning("no rate fit for %s: %s", col, err)
    return report


def run_approx_experiment(cfg):
    """Least-squares sweep: error chain and bounds per degree, fitted rates."""
    return _convergence(cfg, ("err_proj", "err_lsq"))


def run_quad_experiment(cfg):
    """Quadrature sweep: dual-frame rules, errors and bounds per degree."""
    return _convergence(cfg, ("quad_err",))


def run_frame(cfg):
    basis = get_basis(cfg.basis)
    layers = make_layers(cfg)
    return frame_report(basis, [layers[n] for n in cfg.degrees], cfg.floor)


@dataclass
class WeylReport:
    fit: object
    rows: list
    sigma: float
    dyadic: float
    violations: list


def run_weyl_experiment(cfg, slack=0.1):
    """Weyl fit, ``phi_sigma`` table and the dyadic-block comparison column."""
    basis = get_basis(cfg.basis)
    fit = weyl_fit(basis, cfg.degrees, cfg.grid_size)
    c_eff = fit.c * math.exp(fit.residual)
    k = dyadic_constant(c_eff, fit.d, cfg.sigma)
    rows, bad = [], []
    for n, sup in zip(fit.n_range, fit.sup_values):
        phi = error_function_phi(basis, cfg.sigma, n, grid_size=cfg.grid_size)
        dyadic = k * n ** (-cfg.sigma + fit.d / 2)
        rows.append(
            dict(n=n, sup_spectral=sup, weyl_bound=fit.bound(n), phi_sigma=phi.value, phi_tail_bound=phi.tail_bound, dyadic_bound=dyadic)
        )
        if phi.value > dyadic * (1 + slack):
            bad.append(f"n={n}: phi_sigma above dyadic bound")
        if sup > fit.bound(n) * (1 + 1e-12):
            bad.append(f"n={n}: spectral sup above Weyl fit")
    return WeylReport(fit, rows, cfg.sigma, k, bad)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def render_csv(columns, rows):
    """CSV text with a header and rows ordered by ``n``."""
    lines = [",".join(columns)]
    for row in sorted(rows, key=lambda r: r["n"]):
        lines.append(",".join(_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def render_fits(fits):
    lines = [",".join(FIT_COLUMNS)]
    for name, fit in fits.items():
        lines.append(",".join([name, fit.kind, fmt(fit.slope), fmt(fit.intercept), fmt(fit.residual), str(fit.points)]))
    return "\n".join(lines) + "\n"


def frame_rows(report):
    return [
        dict(n=r.n, L_n=r.size, A_n=r.a_n, B_n=r.b_n, kappa_n=r.kappa, certified=int(r.certified))
        for r in report.rows
    ]


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
