"""Monte-Carlo engine for random-gap experiments.

Each sample is evaluated by a pure function of ``(config, index)`` and the
results are reduced in index order, so a run is reproducible bit-for-bit
regardless of how many worker processes evaluate it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .coprime import GraphSymbol, nrcf
from .errors import DomainError, GapcertError
from .gap import gap_metric
from .hinfnorm import hinf_norm
from .lti import StateSpace, is_stable
from .perf import bpc, closed_loop_Q, t_norm
from .sampling import GaussianSpec, PlantFamily, realize_plant, sample_theta

MC_GAP_TOL = 1e-4
DEFAULT_GAMMAS = (0.75, 1.0, 1.5, 2.0, 3.0, 5.0)


@dataclass(frozen=True)
class SampleRecord:
    index: int
    theta: tuple
    gap: float
    gap_lower: float
    stable: bool
    flagged: bool
    bpc: float
    tnorm: float
    note: str = ""


@dataclass(frozen=True)
class Proportion:
    p: float
    se: float
    n: int


@dataclass
class GapStatistics:
    samples: list
    e_gap_hat: float
    l_gap_hat: float
    alpha_hat: float
    seed: int

    @property
    def gaps(self) -> np.ndarray:
        return np.array([s.gap for s in self.samples])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.samples])


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    family: PlantFamily
    controller: StateSpace
    theta: GaussianSpec
    samples: int = 10_000
    seed: int = 0
    beta: float = 0.01
    epsilon: float = 0.05
    gamma_grid: tuple = DEFAULT_GAMMAS
    gap_tol: float = MC_GAP_TOL
    lipschitz_quantile: float = 1.0
    theta0: tuple | None = None
    name: str = "experiment"

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError("samples must be at least 1")
        if self.theta.p < self.family.p:
            raise DomainError(f"theta has dimension {self.theta.p}, family needs {self.family.p}")
        if not 0 < self.lipschitz_quantile <= 1:
            raise DomainError("lipschitz_quantile must lie in (0, 1]")
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    stats: GapStatistics
    nominal: dict
    estimates: dict
    bounds: dict
    checks: dict
    histogram: dict = field(default_factory=dict)

    def summary(self) -> dict:
        cfg = self.config
        return {
            "name": cfg.name,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "theta": {"mu": list(cfg.theta.mu), "sigma": cfg.theta.sigma},
            "nominal": self.nominal,
            "estimates": self.estimates,
            "bounds": {k: v.as_dict() for k, v in self.bounds.items()},
            "checks": self.checks,
            "histogram": self.histogram,
        }


# ------------------------------------------------------------------ sampling


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get("GAPCERT_THREADS", "")
    try:
        return max(1, int(raw)) if raw else default
    except ValueError as exc:
        raise DomainError(f"GAPCERT_THREADS must be an integer, got {raw!r}") from exc


def _evaluate(nominal_gs: GraphSymbol, controller: StateSpace | None, index: int, theta,
              family: PlantFamily, tol: float) -> SampleRecord:
    theta = tuple(float(t) for t in theta)
    P = realize_plant(family, theta)
    stable = is_stable(P)
    b = tn = float("nan")
    if controller is not None:
        b = bpc(P, controller)
        tn = t_norm(P, controller) if b > 0 else float("inf")
    if not stable:
        return SampleRecord(index, theta, 1.0, 1.0, False, True, b, tn, "unstable plant")
    try:
        res = gap_metric(nominal_gs, nrcf(P), tol, certify=False)
    except GapcertError as exc:
        return SampleRecord(index, theta, 1.0, 1.0, True, True, b, tn, f"gap failed: {exc}")
    return SampleRecord(index, theta, res.value, res.lower, True, res.flagged, b, tn, res.note)


def _evaluate_chunk(args):
    nominal_gs, controller, family, tol, start, thetas = args
    return [_evaluate(nominal_gs, controller, start + k, th, family, tol) for k, th in enumerate(thetas)]


def evaluate_samples(family: PlantFamily, thetas, controller=None, tol: float = MC_GAP_TOL,
                     threads: int | None = None) -> list:
    """Per-sample records, in index order, for the given parameters."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    nominal_gs = nrcf(family.nominal)
    threads = threads_from_env() if threads is None else max(1, int(threads))
    n = len(thetas)
    if threads == 1 or n < 2:
        return _evaluate_chunk((nominal_gs, controller, family, tol, 0, thetas))
    size = max(1, math.ceil(n / (4 * threads)))
    jobs = [(nominal_gs, controller, family, tol, s, thetas[s:s + size]) for s in range(0, n, size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunks = list(pool.map(_evaluate_chunk, jobs))
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: r.index)
    return records


# ---------------------------------------------------------------- estimators


def estimate_lipschitz(thetas, values, n_pairs: int | None = None, quantile: float = 1.0,
                       seed: int = 0) -> float:
    """Lipschitz estimate from random sample pairs.

    Draws ``n_pairs`` (default ``10 N``) index pairs, forms
    ``|v_i - v_j| / ||theta_i - theta_j||`` and returns the ``quantile`` of
    the ratios; ``quantile=1`` is the largest observed ratio. Pairs closer
    than ``1e-9`` are skipped.
    """
    thetas = np.asarray(thetas, dtype=float)
    thetas = thetas.reshape(len(thetas), -1)
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2 or len(thetas) != n:
        raise DomainError("need at least two samples with matching parameters")
    n_pairs = 10 * n if n_pairs is None else int(n_pairs)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, n_pairs)
    j = rng.integers(0, n, n_pairs)
    d = np.linalg.norm(thetas[i] - thetas[j], axis=1)
    ok = d >= 1e-9
    if not ok.any():
        raise DomainError("all sampled pairs are degenerate")
    ratios = np.abs(values[i] - values[j])[ok] / d[ok]
    if quantile >= 1.0:
        return float(ratios.max())
    return float(np.quantile(ratios, quantile))


def empirical_probability(values, threshold: float, strict: bool = True) -> Proportion:
    """Fraction of ``values`` below ``threshold`` with its binomial standard error."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("values must be nonempty")
    hits = values < threshold if strict else values <= threshold
    p = float(np.mean(hits))
    return Proportion(p, math.sqrt(p * (1.0 - p) / values.size), int(values.size))


def mean_with_se(values) -> tuple:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), se


def gap_statistics(records: list, seed: int, lipschitz_quantile: float = 1.0) -> GapStatistics:
    gaps = np.array([r.gap for r in records])
    thetas = np.array([r.theta for r in records])
    # The saturated value 1 is a convention, not a Lipschitz function value.
    keep = np.array([not r.flagged for r in records])
    try:
        L = estimate_lipschitz(thetas[keep], gaps[keep], quantile=lipschitz_quantile, seed=seed)
    except DomainError:
        L = float("nan")
    return GapStatistics(records, float(gaps.mean()), L, float(gaps.max()), seed)


def gap_sampling(family: PlantFamily, thetas, tol: float = MC_GAP_TOL, seed: int = 0,
                 controller=None, lipschitz_quantile: float = 1.0, threads: int | None = None) -> GapStatistics:
    """Gap to the family's nominal plant for every parameter sample."""
    records = evaluate_samples(family, thetas, controller, tol, threads)
    return gap_statistics(records, seed, lipschitz_quantile)


@dataclass(frozen=True)
class FQEstimate:
    mean: float
    lipschitz: float
    n_used: int
    n_excluded: int


def estimate_fQ(family: PlantFamily, controller: StateSpace, thetas, quantile: float = 1.0,
                seed: int = 0) -> FQEstimate:
    """Mean and Lipschitz estimate of ``||Q(P(theta), C)||_inf`` over stabilized samples."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    vals, used = [], []
    for th in thetas:
        Q = closed_loop_Q(realize_plant(family, th), controller)
        if is_stable(Q):
            vals.append(hinf_norm(Q, 1e-7))
            used.append(th)
    return _fq_from(np.array(used), np.array(vals), len(thetas), quantile, seed)


def _fq_from(thetas, vals, total, quantile, seed) -> FQEstimate:
    if vals.size == 0:
        return FQEstimate(float("nan"), float("nan"), 0, total)
    L = estimate_lipschitz(thetas, vals, quantile=quantile, seed=seed) if vals.size >= 2 else 0.0
    return FQEstimate(float(vals.mean()), L, int(vals.size), total - int(vals.size))


def histogram(values, bins: int = 40) -> dict:
    """Density histogram on ``[0, 1]``."""
    density, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(0.0, 1.0), density=True)
    return {"edges": edges.tolist(), "density": density.tolist()}


# ---------------------------------------------------------------- experiments


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Sample, evaluate and certify one experiment."""
    cfg = config
    fam, C, spec = cfg.family, cfg.controller, cfg.theta
    sigma, p = spec.sigma, spec.p
    thetas = sample_theta(spec, cfg.samples, cfg.seed)
    records = evaluate_samples(fam, thetas, C, cfg.gap_tol, threads)
    stats = gap_statistics(records, cfg.seed, cfg.lipschitz_quantile)
    gaps = stats.gaps
    n = len(records)

    b_nom = bpc(fam.nominal, C)
    T_bar = t_norm(fam.nominal, C) if b_nom > 0 else float("inf")
    mu = np.asarray(spec.mu)
    P_mu = realize_plant(fam, mu)
    gap_mu = gap_metric(fam.nominal, P_mu, 1e-6).value if is_stable(P_mu) else 1.0
    theta0 = np.zeros(p) if cfg.theta0 is None else np.asarray(cfg.theta0, dtype=float)
    nominal = {"b": b_nom, "T_bar": T_bar, "gap_at_mu": gap_mu, "dist_mu_theta0": float(np.linalg.norm(mu - theta0))}

    L = stats.l_gap_hat
    E = stats.e_gap_hat
    e_gap_se = mean_with_se(gaps)[1]
    p_stab = empirical_probability(gaps, b_nom)
    plant_stable = np.array([r.stable for r in records])
    tn = np.array([r.tnorm for r in records])
    # Averaged over loops the nominal controller stabilizes, whether or not the
    # open-loop plant is stable.
    t_ok = np.isfinite(tn)
    e_t, e_t_se = mean_with_se(tn[t_ok])
    fq_vals = np.array([1.0 / r.bpc for r in records if r.bpc > 0])
    fq_th = np.array([r.theta for r in records if r.bpc > 0]).reshape(len(fq_vals), -1)
    fq = _fq_from(fq_th, fq_vals, n, cfg.lipschitz_quantile, cfg.seed)
    below = gaps < 1.0
    inv_vals = 1.0 / (1.0 - gaps[below])
    e_inv, e_inv_se = mean_with_se(inv_vals)

    estimates = {
        "e_gap": E,
        "e_gap_se": e_gap_se,
        "l_gap": L,
        "alpha_hat": stats.alpha_hat,
        "p_gap_below_b": p_stab.p,
        "p_gap_below_b_se": p_stab.se,
        "p_plant_stable": float(plant_stable.mean()),
        "n_flagged": int(sum(r.flagged for r in records)),
        "e_tnorm": e_t,
        "e_tnorm_se": e_t_se,
        "n_tnorm": int(t_ok.sum()),
        "e_fQ": fq.mean,
        "l_fQ": fq.lipschitz,
        "n_fQ": fq.n_used,
        "e_inv_gap": e_inv,
        "e_inv_gap_se": e_inv_se,
    }

    rep = {}
    finite_L = math.isfinite(L) and L > 0
    if finite_L:
        rep["stability"] = bounds.stability_prob_lb(E, b_nom, sigma, L)
        C_gap = bounds.expected_gap_ub(gap_mu, L, sigma, p)
        rep["expected_gap"] = bounds.BoundReport(
            "expected_gap_ub", {"gap_at_mu": gap_mu, "L": L, "sigma": sigma, "p": p}, C_gap, E <= C_gap)
        rep["expected_gap_anchor"] = bounds.BoundReport(
            "expected_gap_ub_anchor", {"L": L, "sigma": sigma, "p": p, "dist_mu_theta0": nominal["dist_mu_theta0"]},
            bounds.expected_gap_ub_anchor(L, sigma, p, nominal["dist_mu_theta0"]), True)
        rep["required_expected_gap"] = bounds.BoundReport(
            "required_expected_gap", {"beta": cfg.beta, "b": b_nom, "sigma": sigma, "L": L},
            bounds.required_expected_gap(cfg.beta, b_nom, sigma, L), E <= bounds.required_expected_gap(cfg.beta, b_nom, sigma, L))
        if C_gap < 1:
            rep["inv_gap_moment"] = bounds.BoundReport(
                "inv_gap_moment_ub", {"C_gap": C_gap, "sigma": sigma, "L": L},
                bounds.inv_gap_moment_ub(C_gap, sigma, L), True)
        if b_nom > 0:
            rep["expected_hinf"] = bounds.expected_hinf_report(b_nom, T_bar, gap_mu, L, sigma, p)
            eps_gap = bounds.deviation_eps(cfg.beta, sigma, L)
            eps_q = bounds.deviation_eps(cfg.beta, sigma, fq.lipschitz) if math.isfinite(fq.lipschitz) else float("nan")
            rep["deviation"] = bounds.BoundReport(
                "deviation_prob_ub",
                {"E_gap": E, "eps_gap": eps_gap, "E_fQ": fq.mean, "eps_Q": eps_q, "b": b_nom},
                bounds.deviation_prob_ub(E, eps_gap, fq.mean, eps_q, b_nom), math.isfinite(eps_q),
                "E_fQ and L_Q are Monte-Carlo estimates")
        for g in cfg.gamma_grid:
            rep[f"hinf_perf_prob@{g:g}"] = bounds.hinf_perf_prob_lb(g, T_bar, E, sigma, L)
            rep[f"hinf_perf_cert@{g:g}"] = bounds.hinf_perf_certificate(g, T_bar, E, sigma, L, cfg.beta)
    rep["scenario"] = bounds.scenario_certificate(stats.alpha_hat, b_nom, n, cfg.beta, cfg.epsilon)

    checks = {}
    if "stability" in rep:
        lb = rep["stability"].value
        checks["stability_conservative"] = bool(p_stab.p >= lb - 3 * p_stab.se)
    perf = {}
    for g in cfg.gamma_grid:
        key = f"hinf_perf_prob@{g:g}"
        if key in rep:
            emp = empirical_probability(tn, g, strict=False)
            perf[f"{g:g}"] = {"empirical": emp.p, "se": emp.se, "bound": rep[key].value,
                              "ok": bool(emp.p >= rep[key].value - 3 * emp.se)}
    if perf:
        checks["hinf_perf_conservative"] = perf
    if "inv_gap_moment" in rep and math.isfinite(e_inv):
        checks["inv_gap_conservative"] = bool(e_inv <= rep["inv_gap_moment"].value + 3 * e_inv_se)
    if "expected_gap" in rep:
        checks["expected_gap_conservative"] = bool(E <= rep["expected_gap"].value + 3 * e_gap_se)

    return ExperimentResult(cfg, stats, nominal, estimates, rep, checks, histogram(gaps))
