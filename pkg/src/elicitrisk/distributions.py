"""Probability laws on the real line with exact quantile machinery.

Atomic laws carry their cumulative weights explicitly, so quantiles, partial
quantile integrals and mixtures are exact up to float rounding.  The quantile
is the generalized inverse

    F^{-1}(v) = inf{x : F(x) >= v},

left-continuous and nondecreasing in v.  The only continuous family provided
is the uniform law, which covers every closed-form case the diagnostics need.
"""

from __future__ import annotations

import csv
from abc import ABC, abstractmethod

import numpy as np

__all__ = [
    "Distribution",
    "FiniteAtomic",
    "Empirical",
    "Uniform",
    "two_point",
    "dirac",
    "mix",
    "empirical_from_csv",
    "WEIGHT_TOL",
]

# Atom weights must sum to one within this tolerance at construction time.
WEIGHT_TOL = 1e-12


def _check_level(v: float) -> float:
    v = float(v)
    if not 0.0 < v <= 1.0:
        raise ValueError(f"quantile level must lie in (0, 1], got {v!r}")
    return v


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


class Distribution(ABC):
    """A real-valued probability law exposing its CDF and generalized inverse."""

    @abstractmethod
    def cdf(self, x: float) -> float:
        """Right-continuous distribution function F(x) = P(Y <= x)."""

    @abstractmethod
    def quantile(self, v: float) -> float:
        """Generalized inverse inf{x : F(x) >= v} for v in (0, 1]."""

    @abstractmethod
    def partial_quantile_integral(self, p: float) -> float:
        """Integral of the quantile function over (0, p], for p in [0, 1]."""

    def mean(self) -> float:
        """First moment, computed as the full quantile integral."""
        return self.partial_quantile_integral(1.0)

    @abstractmethod
    def support_min(self) -> float:
        """Essential infimum of the law."""

    @abstractmethod
    def support_max(self) -> float:
        """Essential supremum of the law."""

    @abstractmethod
    def upper_partial_moment(self, x: float) -> float:
        """E(Y - x)^+."""

    @abstractmethod
    def lower_partial_moment(self, x: float) -> float:
        """E(x - Y)^+."""

    @abstractmethod
    def shift(self, c: float) -> "Distribution":
        """Law of Y + c."""

    @abstractmethod
    def scale(self, lam: float) -> "Distribution":
        """Law of lam * Y for lam >= 0."""


def _canonical_atoms(values, weights):
    """Sort atoms, merge equal values, drop zero weights, validate the total."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.ndim != 1 or weights.ndim != 1 or values.size != weights.size:
        raise ValueError("values and weights must be 1D arrays of equal length")
    if values.size == 0:
        raise ValueError("an atomic law needs at least one atom")
    if not np.all(np.isfinite(values)):
        raise ValueError("atom values must be finite")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
        raise ValueError("atom weights must be finite and nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValueError(f"atom weights must sum to 1 within {WEIGHT_TOL}, got {total!r}")
    uniq, inverse = np.unique(values, return_inverse=True)
    merged = np.bincount(inverse, weights=weights, minlength=uniq.size)
    keep = merged > 0.0
    uniq, merged = uniq[keep], merged[keep]
    if uniq.size == 0:
        raise ValueError("all atoms have zero weight")
    cum = np.cumsum(merged)
    cum[-1] = 1.0  # pin the top so quantile(1.0) is always defined
    return uniq, cum


class FiniteAtomic(Distribution):
    """Law with finitely many atoms, stored as sorted values and cumulative weights.

    Parameters
    ----------
    values : array_like
        Atom locations.  Duplicates are merged (weights summed).
    weights : array_like
        Nonnegative weights summing to one within ``WEIGHT_TOL``.
    """

    def __init__(self, values, weights):
        vals, cum = _canonical_atoms(values, weights)
        self._values = vals
        self._cum = cum
        self._weights = np.diff(cum, prepend=0.0)

    @classmethod
    def _from_cum(cls, values: np.ndarray, cum: np.ndarray) -> "FiniteAtomic":
        # internal: values strictly increasing, cum nondecreasing with cum[-1] == 1.0
        obj = cls.__new__(cls)
        obj._values = np.asarray(values, dtype=float)
        obj._cum = np.asarray(cum, dtype=float)
        obj._weights = np.diff(obj._cum, prepend=0.0)
        return obj

    def atoms(self) -> list[tuple[float, float]]:
        """Canonical (value, weight) pairs."""
        return [(float(v), float(w)) for v, w in zip(self._values, self._weights)]

    @property
    def n_atoms(self) -> int:
        return int(self._values.size)

    def cdf(self, x: float) -> float:
        idx = int(np.searchsorted(self._values, float(x), side="right"))
        if idx == 0:
            return 0.0
        return float(self._cum[idx - 1])

    def quantile(self, v: float) -> float:
        v = _check_level(v)
        idx = int(np.searchsorted(self._cum, v, side="left"))
        return float(self._values[idx])

    def partial_quantile_integral(self, p: float) -> float:
        p = _check_prob(p)
        prev = np.concatenate(([0.0], self._cum[:-1]))
        seg = np.minimum(self._cum, p) - np.minimum(prev, p)
        return float(np.dot(self._values, seg))

    def support_min(self) -> float:
        return float(self._values[0])

    def support_max(self) -> float:
        return float(self._values[-1])

    def upper_partial_moment(self, x: float) -> float:
        diff = self._values - float(x)
        return float(np.dot(self._weights, np.clip(diff, 0.0, None)))

    def lower_partial_moment(self, x: float) -> float:
        diff = float(x) - self._values
        return float(np.dot(self._weights, np.clip(diff, 0.0, None)))

    def shift(self, c: float) -> "FiniteAtomic":
        return FiniteAtomic._from_cum(self._values + float(c), self._cum)

    def scale(self, lam: float) -> "FiniteAtomic":
        lam = float(lam)
        if lam < 0.0:
            raise ValueError("scale factor must be nonnegative")
        if lam == 0.0:
            return dirac(0.0)
        return FiniteAtomic._from_cum(self._values * lam, self._cum)

    def __repr__(self):
        pairs = ", ".join(f"({v:.6g}, {w:.6g})" for v, w in self.atoms()[:4])
        more = ", ..." if self.n_atoms > 4 else ""
        return f"FiniteAtomic([{pairs}{more}])"


class Empirical(FiniteAtomic):
    """Empirical law of a sample: each observation carries weight 1/n.

    Duplicated observations merge into heavier atoms; cumulative weights are
    the exact ratios k/n, so the top of the ladder is exactly one.
    """

    def __init__(self, samples):
        samples = np.sort(np.asarray(samples, dtype=float))
        if samples.size == 0:
            raise ValueError("empirical law needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        uniq, counts = np.unique(samples, return_counts=True)
        cum = np.cumsum(counts) / samples.size
        cum[-1] = 1.0
        self._values = uniq
        self._cum = cum
        self._weights = np.diff(cum, prepend=0.0)
        self.samples = samples

    def __repr__(self):
        return f"Empirical(n={self.samples.size}, range=[{self.samples[0]:.6g}, {self.samples[-1]:.6g}])"


def two_point(x1: float, x2: float, p: float) -> FiniteAtomic:
    """Law p * delta_{x1} + (1 - p) * delta_{x2} with x1 <= x2.

    Collapses to a single Dirac atom when x1 == x2 or p is 0 or 1.
    """
    x1, x2 = float(x1), float(x2)
    p = _check_prob(p)
    if x1 > x2:
        raise ValueError(f"two_point requires x1 <= x2, got {x1!r} > {x2!r}")
    if x1 == x2 or p == 1.0:
        return dirac(x1)
    if p == 0.0:
        return dirac(x2)
    return FiniteAtomic._from_cum(np.array([x1, x2]), np.array([p, 1.0]))


def dirac(a: float) -> FiniteAtomic:
    """Point mass at a."""
    return FiniteAtomic._from_cum(np.array([float(a)]), np.array([1.0]))


class Uniform(Distribution):
    """Uniform law on [a, b]."""

    def __init__(self, a: float, b: float):
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise ValueError(f"uniform law needs finite a < b, got [{a!r}, {b!r}]")
        self.a = a
        self.b = b

    def cdf(self, x: float) -> float:
        x = float(x)
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return 1.0
        return (x - self.a) / (self.b - self.a)

    def quantile(self, v: float) -> float:
        v = _check_level(v)
        return self.a + v * (self.b - self.a)

    def partial_quantile_integral(self, p: float) -> float:
        p = _check_prob(p)
        return self.a * p + 0.5 * (self.b - self.a) * p * p

    def support_min(self) -> float:
        return self.a

    def support_max(self) -> float:
        return self.b

    def upper_partial_moment(self, x: float) -> float:
        x = float(x)
        if x <= self.a:
            return self.mean() - x
        if x >= self.b:
            return 0.0
        return (self.b - x) ** 2 / (2.0 * (self.b - self.a))

    def lower_partial_moment(self, x: float) -> float:
        x = float(x)
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return x - self.mean()
        return (x - self.a) ** 2 / (2.0 * (self.b - self.a))

    def shift(self, c: float) -> "Uniform":
        return Uniform(self.a + float(c), self.b + float(c))

    def scale(self, lam: float):
        lam = float(lam)
        if lam < 0.0:
            raise ValueError("scale factor must be nonnegative")
        if lam == 0.0:
            return dirac(0.0)
        return Uniform(self.a * lam, self.b * lam)

    def __repr__(self):
        return f"Uniform({self.a:.6g}, {self.b:.6g})"


def mix(d0: Distribution, d1: Distribution, p: float) -> FiniteAtomic:
    """Mixture p * d0 + (1 - p) * d1 of two atomic laws.

    Continuous laws are rejected: mixtures are only needed on the atomic side
    of the diagnostics, where they stay exact.
    """
    p = _check_prob(p)
    if not isinstance(d0, FiniteAtomic) or not isinstance(d1, FiniteAtomic):
        raise ValueError("mix is defined for atomic laws only")
    values = np.concatenate((d0._values, d1._values))
    weights = np.concatenate((p * d0._weights, (1.0 - p) * d1._weights))
    return FiniteAtomic(values, weights)


def empirical_from_csv(path) -> Empirical:
    """Read an empirical law from a CSV file with a header and a column ``y``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "y" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a header row with a column named 'y'")
        samples = []
        for i, row in enumerate(reader, start=2):
            raw = row.get("y")
            if raw is None or raw.strip() == "":
                raise ValueError(f"{path}:{i}: missing value in column 'y'")
            try:
                samples.append(float(raw))
            except ValueError as exc:
                raise ValueError(f"{path}:{i}: could not parse {raw!r} as a real number") from exc
    if not samples:
        raise ValueError(f"{path}: no data rows")
    return Empirical(samples)
