"""Law-invariant risk functionals built on quantiles and spectral weights.

Sign convention: a law describes a financial position's payoff, and a risk
functional returns the capital that makes it acceptable, so cash added to the
position reduces risk one for one: rho(Y + a) = rho(Y) - a.  All functionals
here are normalized (rho of a zero payoff is zero) and positively homogeneous.

The two envelope functionals, parameterized by C in (0, 1]:

  * upper envelope u_C: minus the spectral functional of the density-plus-atom
    measure from :func:`elicitrisk.spectral.uc_measure`;
  * lower envelope l_C: minus the expectile at tau = C / (C + 1), which also
    equals the infimum of the two-atom spectral family over its location p.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, Empirical, FiniteAtomic, dirac
from .spectral import (JSON_NORMALIZATION_TOL, SpectralMeasure, measure_from_json,
                       measure_to_json, mp_measure, nu, uc_measure)

__all__ = [
    "RiskFunctional",
    "VaR",
    "ES",
    "SpectralRisk",
    "InfOverFamily",
    "ExpectileRisk",
    "NegMean",
    "ExpectileSolution",
    "var",
    "es",
    "expectile",
    "u_C",
    "l_C",
    "min_nu_over_mp",
    "evaluate",
    "coherence_check",
    "CoherenceReport",
    "CoherenceViolation",
    "functional_from_json",
    "functional_to_json",
]


def _check_open_unit(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x!r}")
    return x


def _check_c(C: float) -> float:
    C = float(C)
    if not 0.0 < C <= 1.0:
        raise ValueError(f"C must lie in (0, 1], got {C!r}")
    return C


def var(d: Distribution, alpha: float) -> float:
    """Value at risk at level alpha: minus the alpha-quantile of the payoff."""
    alpha = _check_open_unit(alpha, "alpha")
    return -d.quantile(alpha)


def es(d: Distribution, alpha: float) -> float:
    """Expected shortfall: minus the mean of the quantile over (0, alpha].

    Evaluated through the spectral route with a unit atom at alpha, which is
    identical to -partial_quantile_integral(d, alpha) / alpha.
    """
    alpha = _check_open_unit(alpha, "alpha")
    return -nu(SpectralMeasure(atoms=[(alpha, 1.0)]), d)


@dataclass(frozen=True)
class ExpectileSolution:
    """Root of the asymmetric first-moment equation, with its CDF location."""

    mu: float
    tau: float
    p_star: float


def _psi(d: Distribution, tau: float, x: float) -> float:
    # tau * E(Y - x)^+ - (1 - tau) * E(x - Y)^+, strictly decreasing in x
    if isinstance(d, FiniteAtomic):
        diff = d._values - x
        up = float(np.dot(d._weights, np.clip(diff, 0.0, None)))
        down = float(np.dot(d._weights, np.clip(-diff, 0.0, None)))
    else:
        up = d.upper_partial_moment(x)
        down = d.lower_partial_moment(x)
    return tau * up - (1.0 - tau) * down


def expectile(d: Distribution, tau: float) -> ExpectileSolution:
    """Solve tau * E(Y - x)^+ = (1 - tau) * E(x - Y)^+ for x by bisection.

    The root is bracketed by the support and the bracket is narrowed to a
    width of about 1e-14 (scaled by the support magnitude); the returned
    midpoint is then checked against |psi(mu)| <= 1e-10 * (1 + |mu|).
    """
    tau = _check_open_unit(tau, "tau")
    lo = d.support_min()
    hi = d.support_max()
    if lo == hi:
        return ExpectileSolution(mu=lo, tau=tau, p_star=d.cdf(lo))
    width_tol = 1e-14 * max(1.0, abs(lo), abs(hi))
    for _ in range(200):
        if hi - lo <= width_tol:
            break
        mid = 0.5 * (lo + hi)
        if _psi(d, tau, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    resid = _psi(d, tau, mu)
    if abs(resid) > 1e-10 * (1.0 + abs(mu)):
        raise ArithmeticError(
            f"expectile bisection failed to converge: residual {resid!r} at {mu!r}")
    return ExpectileSolution(mu=mu, tau=tau, p_star=d.cdf(mu))


def u_C(d: Distribution, C: float) -> float:
    """Upper envelope: minus the spectral functional of the C-density measure.

    C = 1 collapses to minus the mean.
    """
    C = _check_c(C)
    return -nu(uc_measure(C), d)


def l_C(d: Distribution, C: float) -> float:
    """Lower envelope: minus the expectile at tau = C / (C + 1).

    Cross-checkable as the infimum over p of minus the two-atom spectral
    family evaluated on d; see :func:`min_nu_over_mp`.
    """
    C = _check_c(C)
    return -expectile(d, C / (C + 1.0)).mu


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def min_nu_over_mp(d: Distribution, C: float, width_tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section minimization of p -> nu(two-atom measure at p, d) on (0, 1).

    The objective is unimodal in p (it dips to the tau-expectile of d at the
    CDF value of that expectile), so golden-section search converges without
    derivatives.  Returns (argmin, min value).
    """
    C = _check_c(C)

    def f(p: float) -> float:
        return nu(mp_measure(p, C), d)

    a, b = 1e-9, 1.0 - 1e-9
    c1 = b - _GOLDEN * (b - a)
    c2 = a + _GOLDEN * (b - a)
    f1, f2 = f(c1), f(c2)
    while b - a > width_tol:
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = f(c2)
    p = 0.5 * (a + b)
    return p, f(p)


class RiskFunctional:
    """Base class for the evaluable risk functional variants."""

    def evaluate(self, d: Distribution) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class VaR(RiskFunctional):
    """Quantile-based functional; elicited by pinball-type scores."""

    alpha: float

    def __post_init__(self):
        _check_open_unit(self.alpha, "alpha")

    def evaluate(self, d: Distribution) -> float:
        return var(d, self.alpha)


@dataclass(frozen=True)
class ES(RiskFunctional):
    """Tail-average functional; coherent but without convex level sets."""

    alpha: float

    def __post_init__(self):
        _check_open_unit(self.alpha, "alpha")

    def evaluate(self, d: Distribution) -> float:
        return es(d, self.alpha)


@dataclass(frozen=True)
class SpectralRisk(RiskFunctional):
    """Minus the spectral functional of one fixed measure."""

    measure: SpectralMeasure

    def evaluate(self, d: Distribution) -> float:
        return -nu(self.measure, d)


@dataclass(frozen=True)
class InfOverFamily(RiskFunctional):
    """Minus the infimum of the spectral functional over a finite family."""

    measures: tuple[SpectralMeasure, ...]

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        if not self.measures:
            raise ValueError("the family must contain at least one measure")

    def evaluate(self, d: Distribution) -> float:
        return -min(nu(m, d) for m in self.measures)


@dataclass(frozen=True)
class ExpectileRisk(RiskFunctional):
    """Minus the tau-expectile; coherent exactly when tau <= 1/2."""

    tau: float

    def __post_init__(self):
        _check_open_unit(self.tau, "tau")

    def evaluate(self, d: Distribution) -> float:
        return -expectile(d, self.tau).mu


@dataclass(frozen=True)
class NegMean(RiskFunctional):
    """Minus the mean: the C = 1 corner of the envelope family."""

    def evaluate(self, d: Distribution) -> float:
        return -d.mean()


def evaluate(rf: RiskFunctional, d: Distribution) -> float:
    """Evaluate a risk functional on a law."""
    return rf.evaluate(d)


@dataclass(frozen=True)
class CoherenceViolation:
    """One recorded axiom failure with enough state to replay it."""

    axiom: str
    trial: int
    states_x: tuple[float, ...]
    states_y: tuple[float, ...] | None
    param: float | None
    lhs: float
    rhs: float


@dataclass
class CoherenceReport:
    """Outcome of randomized coherence testing on finite equal-weight spaces."""

    trials: int
    max_states: int
    tolerance: float
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def violations_for(self, axiom: str) -> list:
        return [v for v in self.violations if v.axiom == axiom]


_LAMBDAS = (0.0, 0.5, 2.0, 10.0)
_SHIFTS = (-1.0, 0.0, 3.0)


def coherence_check(rf: RiskFunctional, trials: int = 1000, seed: int = 0,
                    max_states: int = 8, tol: float = 1e-9) -> CoherenceReport:
    """Randomized search for coherence violations on joint finite spaces.

    Each trial draws a pair of payoffs as functions on 2 to ``max_states``
    equally likely states with values in [-10, 10], then checks
    subadditivity, positive homogeneity (factors 0, 0.5, 2, 10), cash
    translation (shifts -1, 0, 3) and monotonicity against a dominated
    payoff.  Trials are seeded individually from the base seed, so reports
    are reproducible.

    Note the granularity caveat: a quantile level below 1/max_states makes
    the quantile functional collapse to the worst-case payoff on these
    spaces, which is subadditive, so violation searches for such levels need
    a larger ``max_states``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if max_states < 2:
        raise ValueError("max_states must be at least 2")
    report = CoherenceReport(trials=trials, max_states=max_states, tolerance=tol)
    counts = {"subadditivity": 0, "homogeneity": 0, "translation": 0, "monotonicity": 0}

    def record(axiom, trial, sx, sy, param, lhs, rhs):
        report.violations.append(CoherenceViolation(
            axiom=axiom, trial=trial, states_x=tuple(sx),
            states_y=None if sy is None else tuple(sy),
            param=param, lhs=lhs, rhs=rhs))

    for k in range(trials):
        rng = np.random.default_rng((seed, k))
        n = int(rng.integers(2, max_states + 1))
        x = rng.uniform(-10.0, 10.0, n)
        y = rng.uniform(-10.0, 10.0, n)
        rx = rf.evaluate(Empirical(x))
        ry = rf.evaluate(Empirical(y))

        counts["subadditivity"] += 1
        rxy = rf.evaluate(Empirical(x + y))
        if rxy > rx + ry + tol:
            record("subadditivity", k, x, y, None, rxy, rx + ry)

        for lam in _LAMBDAS:
            counts["homogeneity"] += 1
            r = rf.evaluate(Empirical(lam * x))
            if abs(r - lam * rx) > tol:
                record("homogeneity", k, x, None, lam, r, lam * rx)

        for a in _SHIFTS:
            counts["translation"] += 1
            r = rf.evaluate(Empirical(x + a))
            if abs(r - (rx - a)) > tol:
                record("translation", k, x, None, a, r, rx - a)

        counts["monotonicity"] += 1
        z = x - rng.uniform(0.0, 5.0, n)  # dominated statewise by x
        rz = rf.evaluate(Empirical(z))
        if rx > rz + tol:
            record("monotonicity", k, x, z, None, rx, rz)

    report.checks = counts
    return report


def functional_from_json(spec, tol: float = JSON_NORMALIZATION_TOL) -> RiskFunctional:
    """Build a risk functional from a JSON object or string.

    Schema: {"type": "var" | "es" | "expectile" | "negmean", "level": x}
    or {"type": "spectral", "measure": <measure spec>}
    or {"type": "inf_family", "measures": [<measure spec>, ...]}.
    """
    if isinstance(spec, (str, bytes)):
        spec = json.loads(spec)
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("functional spec must be a JSON object with a 'type' key")
    kind = spec["type"]
    if kind == "negmean":
        return NegMean()
    if kind in ("var", "es", "expectile"):
        if "level" not in spec:
            raise ValueError(f"functional type {kind!r} needs a 'level'")
        level = float(spec["level"])
        return {"var": VaR, "es": ES, "expectile": ExpectileRisk}[kind](level)
    if kind == "spectral":
        if "measure" not in spec:
            raise ValueError("spectral functional needs a 'measure'")
        return SpectralRisk(measure_from_json(spec["measure"], tol=tol))
    if kind == "inf_family":
        measures = spec.get("measures")
        if not isinstance(measures, list) or not measures:
            raise ValueError("inf_family needs a nonempty 'measures' list")
        return InfOverFamily(tuple(measure_from_json(ms, tol=tol) for ms in measures))
    raise ValueError(f"unknown functional type {kind!r}")


def functional_to_json(rf: RiskFunctional) -> dict:
    """Inverse of functional_from_json, as a plain dict."""
    if isinstance(rf, VaR):
        return {"type": "var", "level": rf.alpha}
    if isinstance(rf, ES):
        return {"type": "es", "level": rf.alpha}
    if isinstance(rf, ExpectileRisk):
        return {"type": "expectile", "level": rf.tau}
    if isinstance(rf, NegMean):
        return {"type": "negmean"}
    if isinstance(rf, SpectralRisk):
        return {"type": "spectral", "measure": measure_to_json(rf.measure)}
    if isinstance(rf, InfOverFamily):
        return {"type": "inf_family", "measures": [measure_to_json(m) for m in rf.measures]}
    raise TypeError(f"cannot serialize {type(rf).__name__}")
