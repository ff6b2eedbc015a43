"""Scalar certificate calculators for random-gap robustness.

Notation: ``sigma`` is the isotropic standard deviation of the parameter,
``L`` a Lipschitz constant of the quantity being concentrated, ``b`` the
nominal stability margin and ``beta`` a violation probability. Logarithms are
natural.

Functions returning a plain float raise :class:`DomainError` on inputs outside
their domain. Functions returning a :class:`BoundReport` are total: when a
pre-condition fails they return ``valid=False`` and keep the raw value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict
    value: float
    valid: bool
    note: str = ""
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _positive(**kw):
    for k, v in kw.items():
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"{k} must be positive, got {v}")


def _open_unit(**kw):
    for k, v in kw.items():
        if not 0.0 < v < 1.0:
            raise DomainError(f"{k} must lie in (0, 1), got {v}")


def _tail(eps: float, scale: float) -> float:
    """``exp(-eps^2 / (2 scale^2))`` with the ``scale -> 0`` limit."""
    if scale == 0.0:
        return 0.0 if eps > 0 else 1.0
    return math.exp(-(eps**2) / (2.0 * scale**2))


# ------------------------------------------------------------ concentration


def coprime_stability_prob_lb(b: float, L_delta: float, sigma: float) -> float:
    """Lower bound on ``P(||Delta|| < b)`` for an ``L_delta``-Lipschitz factor perturbation."""
    _positive(b=b, L_delta=L_delta, sigma=sigma)
    return _clamp01(1.0 - _tail(b, L_delta * sigma))


def gap_tail_ub(eps: float, sigma: float, L: float) -> float:
    """Sub-Gaussian tail ``exp(-eps^2 / (2 sigma^2 L^2))``."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    _positive(sigma=sigma, L=L)
    return _clamp01(_tail(eps, sigma * L))


def jensen_norm_ub(sigma: float, p: int, offset: float = 0.0) -> float:
    """``sqrt(sigma^2 p + offset^2)`` bounding ``E||theta - theta0||``."""
    _positive(sigma=sigma)
    if p < 1 or offset < 0:
        raise DomainError("need p >= 1 and offset >= 0")
    return math.sqrt(sigma**2 * p + offset**2)


def expected_gap_ub(gap_at_mu: float, L: float, sigma: float, p: int) -> float:
    """``Gap(mu) + L sqrt(sigma^2 p)`` bounding ``E[Gap]``."""
    if not 0.0 <= gap_at_mu <= 1.0:
        raise DomainError("gap_at_mu must lie in [0, 1]")
    if L < 0:
        raise DomainError("L must be nonnegative")
    return gap_at_mu + L * jensen_norm_ub(sigma, p)


def expected_gap_ub_anchor(L: float, sigma: float, p: int, dist_mu_theta0: float) -> float:
    """``L sqrt(sigma^2 p + ||mu - theta0||^2)`` when the nominal is ``theta0``'s plant."""
    if L < 0:
        raise DomainError("L must be nonnegative")
    return L * jensen_norm_ub(sigma, p, dist_mu_theta0)


# --------------------------------------------------------------- stability


def stability_prob_lb(E_gap: float, b: float, sigma: float, L: float) -> BoundReport:
    """Lower bound on the probability that the nominal controller stabilizes.

    Requires ``E_gap < b``; with ``eps_tol = b - E_gap`` the value is
    ``1 - exp(-eps_tol^2 / (2 sigma^2 L^2))``.
    """
    inputs = {"E_gap": E_gap, "b": b, "sigma": sigma, "L": L}
    eps_tol = b - E_gap
    value = _clamp01(1.0 - _tail(abs(eps_tol), sigma * L))
    valid = eps_tol > 0
    note = "" if valid else "expected gap is not below the stability margin"
    return BoundReport("stability_prob_lb", inputs, value, valid, note, {"eps_tol": eps_tol})


def required_expected_gap(beta: float, b: float, sigma: float, L: float) -> float:
    """Largest ``E[Gap]`` certifying stabilization with probability ``1 - beta``.

    Negative output means no expected gap suffices.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0, 1]")
    return b - L * math.sqrt(2.0 * sigma**2 * math.log(1.0 / beta))


def deviation_eps(beta: float, sigma: float, L: float) -> float:
    """Concentration radius ``sqrt(2 sigma^2 L^2 log(2/beta))``.

    Serves both the gap (``L = L_gap``) and ``f_Q`` (``L = L_Q``).
    ``beta`` may exceed 1 as long as the logarithm stays positive.
    """
    if not 0.0 < beta < 2.0:
        raise DomainError("beta must lie in (0, 2)")
    return math.sqrt(2.0 * sigma**2 * L**2 * math.log(2.0 / beta))


def deviation_prob_ub(E_gap: float, eps_gap: float, E_fQ: float, eps_Q: float, b: float) -> float:
    """``(E_gap + eps_gap)(E_fQ + eps_Q) / b`` bounding the closed-loop deviation."""
    _positive(b=b)
    return (E_gap + eps_gap) * (E_fQ + eps_Q) / b


# ------------------------------------------------------------- performance


def perf_margin(gamma: float, T_bar: float, E_gap: float) -> float:
    """``(gamma - T_bar) / (1 + gamma) - E_gap``."""
    return (gamma - T_bar) / (1.0 + gamma) - E_gap


def hinf_perf_certificate(gamma: float, T_bar: float, E_gap: float, sigma: float, L: float,
                          beta: float) -> BoundReport:
    """Whether ``P(||T|| <= gamma) >= 1 - beta`` is certified.

    ``value`` is the slack ``gamma_bar``; the certificate holds iff it reaches
    ``sqrt(2 sigma^2 L^2 log(1/beta))``.
    """
    inputs = {"gamma": gamma, "T_bar": T_bar, "E_gap": E_gap, "sigma": sigma, "L": L, "beta": beta}
    gbar = perf_margin(gamma, T_bar, E_gap)
    need = math.sqrt(2.0 * sigma**2 * L**2 * math.log(1.0 / beta)) if 0 < beta < 1 else float("nan")
    valid = gamma > T_bar and 0 < beta < 1 and gbar >= need
    note = ""
    if gamma <= T_bar:
        note = "gamma does not exceed the nominal performance level"
    elif not 0 < beta < 1:
        note = "beta must lie in (0, 1)"
    elif not valid:
        note = "slack below the concentration radius"
    return BoundReport("hinf_perf_certificate", inputs, gbar, bool(valid), note, {"threshold": need})


def hinf_perf_prob_lb(gamma: float, T_bar: float, E_gap: float, sigma: float, L: float) -> BoundReport:
    """``1 - exp(-gamma_bar^2 / (2 sigma^2 L^2))``; 0 and invalid when ``gamma_bar <= 0``."""
    inputs = {"gamma": gamma, "T_bar": T_bar, "E_gap": E_gap, "sigma": sigma, "L": L}
    gbar = perf_margin(gamma, T_bar, E_gap)
    if gbar <= 0:
        return BoundReport("hinf_perf_prob_lb", inputs, 0.0, False, "non-positive slack", {"gamma_bar": gbar})
    return BoundReport("hinf_perf_prob_lb", inputs, _clamp01(1.0 - _tail(gbar, sigma * L)), True, "",
                       {"gamma_bar": gbar})


def reciprocal_moment_ub(mu: float, s: float) -> float:
    """Bound on ``E[1/(1-x)]`` for ``x`` sub-Gaussian with mean ``mu`` and parameter ``s``."""
    _open_unit(mu=mu)
    if s < 0:
        raise DomainError("s must be nonnegative")
    head = (1.0 + mu) / (1.0 - mu)
    v = 8.0 * s**2
    if v == 0.0:  # s = 0 or underflow: the tail term vanishes
        return head
    return head + (v / (1.0 - mu)) * math.exp(-((1.0 - mu) ** 2) / v)


def inv_gap_moment_ub(C_gap: float, sigma: float, L: float) -> float:
    """Bound on ``E[1/(1 - Gap)]`` given an expected-gap bound ``C_gap``."""
    return reciprocal_moment_ub(C_gap, sigma * L)


def expected_hinf_ub(b_bar: float, C_inv: float) -> float:
    """``(b_bar + 1) C_inv`` bounding ``E||T||_inf``."""
    if not 0.0 <= b_bar <= 1.0:
        raise DomainError("b_bar must lie in [0, 1]")
    if C_inv < 1.0:
        raise DomainError("C_inv must be at least 1")
    return (b_bar + 1.0) * C_inv


def expected_hinf_report(b_bar: float, T_bar: float, gap_at_mu: float, L: float, sigma: float,
                         p: int) -> BoundReport:
    """Full expected-performance chain from raw inputs.

    Requires ``T_bar <= b_bar`` and an expected-gap bound below 1.
    """
    inputs = {"b_bar": b_bar, "T_bar": T_bar, "gap_at_mu": gap_at_mu, "L": L, "sigma": sigma, "p": p}
    C_gap = expected_gap_ub(gap_at_mu, L, sigma, p)
    if C_gap >= 1.0:
        return BoundReport("expected_hinf_chain", inputs, float("inf"), False, "C_gap >= 1", {"C_gap": C_gap})
    C_inv = inv_gap_moment_ub(C_gap, sigma, L)
    value = expected_hinf_ub(b_bar, C_inv)
    valid = T_bar <= b_bar
    note = "" if valid else "nominal T norm exceeds the stability margin"
    return BoundReport("expected_hinf_chain", inputs, value, valid, note, {"C_gap": C_gap, "C_inv": C_inv})


# ----------------------------------------------------------------- scenario


def scenario_sample_size(beta: float, eps: float) -> int:
    """Smallest ``N`` with ``(1 - eps)^N <= beta``."""
    _open_unit(beta=beta, eps=eps)
    ratio = math.log(1.0 / beta) / math.log(1.0 / (1.0 - eps))
    # guard against ratios a few ulps above an integer
    return max(1, math.ceil(ratio * (1.0 - 1e-12)))


def scenario_certificate(alpha_hat: float, b: float, n: int, beta: float, eps: float) -> BoundReport:
    """Issued iff ``n`` meets the sample-size condition and ``alpha_hat < b``."""
    inputs = {"alpha_hat": alpha_hat, "b": b, "n": n, "beta": beta, "eps": eps}
    need = scenario_sample_size(beta, eps)
    enough = n >= need
    below = alpha_hat < b
    note = ""
    if not enough:
        note = f"need at least {need} samples"
    elif not below:
        note = "largest sampled gap is not below the stability margin"
    return BoundReport("scenario_certificate", inputs, 1.0 - eps, bool(enough and below), note,
                       {"n_required": need})


REGISTRY = {
    "coprime-stability": coprime_stability_prob_lb,
    "gap-tail": gap_tail_ub,
    "jensen": jensen_norm_ub,
    "expected-gap": expected_gap_ub,
    "expected-gap-anchor": expected_gap_ub_anchor,
    "stability-lb": stability_prob_lb,
    "required-expected-gap": required_expected_gap,
    "deviation-eps": deviation_eps,
    "deviation-prob": deviation_prob_ub,
    "hinf-perf": hinf_perf_certificate,
    "hinf-perf-prob": hinf_perf_prob_lb,
    "reciprocal-moment": reciprocal_moment_ub,
    "inv-gap-moment": inv_gap_moment_ub,
    "expected-hinf": expected_hinf_ub,
    "expected-hinf-chain": expected_hinf_report,
    "scenario-size": scenario_sample_size,
    "scenario-cert": scenario_certificate,
}


def evaluate(name: str, **inputs) -> BoundReport:
    """Evaluate a registered bound and wrap scalar results in a report."""
    if name not in REGISTRY:
        raise DomainError(f"unknown bound {name!r}; choose from {sorted(REGISTRY)}")
    out = REGISTRY[name](**inputs)
    if isinstance(out, BoundReport):
        return out
    value = float(out)
    return BoundReport(REGISTRY[name].__name__, dict(inputs), value, math.isfinite(value))


BY_REPORT_NAME = {f.__name__: f for f in REGISTRY.values()}
BY_REPORT_NAME["expected_hinf_chain"] = expected_hinf_report


def reevaluate(report: dict) -> float:
    """Recompute a serialized report's value from its recorded inputs."""
    fn = BY_REPORT_NAME[report["name"]]
    out = fn(**report["inputs"])
    return out.value if isinstance(out, BoundReport) else float(out)
