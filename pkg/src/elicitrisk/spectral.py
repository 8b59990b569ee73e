"""Probability measures on [0, 1] and the tail-weighting functionals they induce.

A measure m here is a (possibly zero) atom at 0, finitely many atoms on
(0, 1], and optionally one parametric density on (0, 1).  Its spectral
function is

    g_m(u) = integral of 1/alpha over m restricted to [u, 1],

a left-continuous nonincreasing weight profile.  The induced functional on a
law Y is

    nu(m, Y) = E[g_m(V) F^{-1}(V)] + m({0}) * essinf(Y),   V ~ U(0, 1),

which equals the m-average of the lower tail means

    nu_via_U(m, Y) = integral of U_alpha(Y) m(dalpha),
    U_alpha(Y) = (1/alpha) * integral of F^{-1} over (0, alpha],  U_0 = essinf.

Both routes are implemented independently and cross-check each other.

The one parametric density provided has shape

    f_C(v) = 2 C (1 - C) v / (v + C(1 - v))^3   on (0, 1),  C in (0, 1],

total mass 1 - C; paired with an atom of weight C at 1 it yields the
spectral function C / (v + C(1 - v))^2, whose integral over (p, 1] is
C(1 - p) / (C(1 - p) + p): the lower envelope of the two-atom family below.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .distributions import Distribution, FiniteAtomic, Uniform

__all__ = [
    "UcDensity",
    "SpectralMeasure",
    "mp_measure",
    "uc_measure",
    "spectral_fn",
    "interval_mass",
    "nu",
    "nu_via_U",
    "uses_quadrature",
    "measure_from_json",
    "measure_to_json",
    "NORMALIZATION_TOL",
    "JSON_NORMALIZATION_TOL",
    "QUAD_TOL",
    "QUAD_LIMIT",
]

# Programmatic constructions must normalize to this accuracy; JSON input,
# typically hand-written decimals, gets the looser bound.
NORMALIZATION_TOL = 1e-10
JSON_NORMALIZATION_TOL = 1e-8

# Adaptive quadrature contract for the one path that needs it
# (continuous law paired with the parametric density).
QUAD_TOL = 1e-10
QUAD_LIMIT = 60


@dataclass(frozen=True)
class UcDensity:
    """Density 2C(1-C)v / (v + C(1-v))^3 on (0, 1), with mass 1 - C."""

    C: float

    def __post_init__(self):
        if not 0.0 < float(self.C) <= 1.0:
            raise ValueError(f"density parameter C must lie in (0, 1], got {self.C!r}")
        object.__setattr__(self, "C", float(self.C))

    def mass(self) -> float:
        return 1.0 - self.C

    def __call__(self, v):
        c = self.C
        h = c + (1.0 - c) * np.asarray(v, dtype=float)
        return 2.0 * c * (1.0 - c) * np.asarray(v, dtype=float) / h**3


class SpectralMeasure:
    """Probability measure on [0, 1]: atom at zero, atoms on (0, 1], optional density.

    Parameters
    ----------
    atom_at_zero : float
        Mass placed at level 0.
    atoms : iterable of (alpha, weight)
        Atoms with alpha in (0, 1] and positive weight.  Duplicate levels are
        merged.
    density : UcDensity or None
        Optional parametric density on (0, 1).
    tol : float
        Total mass must equal one within this tolerance.
    """

    def __init__(self, atom_at_zero: float = 0.0, atoms=(), density: UcDensity | None = None,
                 tol: float = NORMALIZATION_TOL):
        atom_at_zero = float(atom_at_zero)
        if not 0.0 <= atom_at_zero <= 1.0:
            raise ValueError(f"atom_at_zero must lie in [0, 1], got {atom_at_zero!r}")
        pairs = [(float(a), float(w)) for a, w in atoms]
        for a, w in pairs:
            if not 0.0 < a <= 1.0:
                raise ValueError(f"atom level must lie in (0, 1], got {a!r}")
            if not w > 0.0 or not math.isfinite(w):
                raise ValueError(f"atom weight must be positive and finite, got {w!r}")
        if density is not None and not isinstance(density, UcDensity):
            raise TypeError("density must be a UcDensity or None")

        merged: dict[float, float] = {}
        for a, w in pairs:
            merged[a] = merged.get(a, 0.0) + w
        levels = np.array(sorted(merged), dtype=float)
        weights = np.array([merged[a] for a in sorted(merged)], dtype=float)

        density_mass = density.mass() if density is not None else 0.0
        total = atom_at_zero + float(weights.sum()) + density_mass
        if abs(total - 1.0) > tol:
            raise ValueError(
                f"measure must normalize to 1 within {tol}, got total mass {total!r}")

        self.atom_at_zero = atom_at_zero
        self.density = density
        self._alphas = levels
        self._weights = weights
        # 1/alpha weighting, precomputed for the Fubini-style interval sums
        self._w_over_a = weights / levels if levels.size else levels

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self._alphas.tolist(), self._weights.tolist()))

    def __repr__(self):
        parts = []
        if self.atom_at_zero:
            parts.append(f"atom0={self.atom_at_zero:.6g}")
        if self._alphas.size:
            at = ", ".join(f"({a:.6g}, {w:.6g})" for a, w in self.atoms)
            parts.append(f"atoms=[{at}]")
        if self.density is not None:
            parts.append(f"density=UcDensity({self.density.C:.6g})")
        return f"SpectralMeasure({', '.join(parts)})"


def mp_measure(p: float, C: float) -> SpectralMeasure:
    """Two-atom measure with mass at p and at 1, tuned by the bound parameter C.

    The weights are p(1-C)/Z at level p and C/Z at level 1, Z = p(1-C) + C.
    For C = 1 this degenerates to the point mass at 1.
    """
    p, C = float(p), float(C)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if not 0.0 < C <= 1.0:
        raise ValueError(f"C must lie in (0, 1], got {C!r}")
    z = p * (1.0 - C) + C
    w1 = p * (1.0 - C) / z
    atoms = [(1.0, 1.0 - w1)]
    if w1 > 0.0:
        atoms.insert(0, (p, w1))
    return SpectralMeasure(atoms=atoms)


def uc_measure(C: float) -> SpectralMeasure:
    """Density f_C plus an atom of weight C at level 1 (point mass at 1 when C = 1)."""
    C = float(C)
    if not 0.0 < C <= 1.0:
        raise ValueError(f"C must lie in (0, 1], got {C!r}")
    if C == 1.0:
        return SpectralMeasure(atoms=[(1.0, 1.0)])
    return SpectralMeasure(atoms=[(1.0, C)], density=UcDensity(C))


def _density_spectral(density: UcDensity | None, u: float) -> float:
    # contribution of the density to g_m(u): C/h(u)^2 - C with h = C + (1-C)u
    if density is None or density.C == 1.0:
        return 0.0
    c = density.C
    h = c + (1.0 - c) * u
    return c / (h * h) - c


def _density_g_integral(density: UcDensity | None, p1: float, p2: float) -> float:
    # integral of the density part of g_m over (p1, p2]
    if density is None or density.C == 1.0 or p1 == p2:
        return 0.0
    c = density.C
    h1 = c + (1.0 - c) * p1
    h2 = c + (1.0 - c) * p2
    return c / (1.0 - c) * (1.0 / h1 - 1.0 / h2) - c * (p2 - p1)


def spectral_fn(m: SpectralMeasure, u: float) -> float:
    """g_m(u): total 1/alpha-weighted mass of m on [u, 1], for u in (0, 1]."""
    u = float(u)
    if not 0.0 < u <= 1.0:
        raise ValueError(f"u must lie in (0, 1], got {u!r}")
    idx = int(np.searchsorted(m._alphas, u, side="left"))
    atom_part = float(m._w_over_a[idx:].sum())
    return atom_part + _density_spectral(m.density, u)


def interval_mass(m: SpectralMeasure, p1: float, p2: float) -> float:
    """Integral of g_m over (p1, p2], plus the atom at zero when p1 == 0.

    Equals the 1/alpha-weighted overlap sum over the measure: each atom
    (alpha, w) with alpha >= p1 contributes w * (min(alpha, p2) - p1)^+ / alpha.
    """
    p1, p2 = float(p1), float(p2)
    if not 0.0 <= p1 <= p2 <= 1.0:
        raise ValueError(f"need 0 <= p1 <= p2 <= 1, got ({p1!r}, {p2!r})")
    out = _g_integral(m, p1, p2)
    if p1 == 0.0:
        out += m.atom_at_zero
    return out


def _g_integral(m: SpectralMeasure, p1: float, p2: float) -> float:
    # integral of g_m over (p1, p2], excluding any atom at zero
    if m._alphas.size:
        overlap = np.clip(np.minimum(m._alphas, p2) - p1, 0.0, None)
        atom_part = float(np.dot(m._w_over_a, overlap))
    else:
        atom_part = 0.0
    return atom_part + _density_g_integral(m.density, p1, p2)


def nu(m: SpectralMeasure, d: Distribution) -> float:
    """Spectral functional E[g_m(V) F^{-1}(V)] + m({0}) * essinf, V uniform.

    Exact for atomic laws: the quantile is constant on each cumulative-weight
    interval (c[i-1], c[i]], so the integral is a finite sum of interval
    masses.  For the uniform law the atom part is exact through partial
    quantile integrals; only the density part uses adaptive quadrature
    (absolute tolerance ``QUAD_TOL``, at most ``QUAD_LIMIT`` subintervals).
    """
    if isinstance(d, FiniteAtomic):
        cum = d._cum
        prev = np.concatenate(([0.0], cum[:-1]))
        if m._alphas.size:
            overlap = np.clip(
                np.minimum(m._alphas[None, :], cum[:, None]) - prev[:, None], 0.0, None)
            masses = overlap @ m._w_over_a
        else:
            masses = np.zeros_like(cum)
        if m.density is not None and m.density.C < 1.0:
            c = m.density.C
            h_prev = c + (1.0 - c) * prev
            h_cum = c + (1.0 - c) * cum
            masses = masses + (c / (1.0 - c) * (1.0 / h_prev - 1.0 / h_cum)
                               - c * (cum - prev))
        out = float(np.dot(d._values, masses))
        return out + m.atom_at_zero * d.support_min()
    if isinstance(d, Uniform):
        out = m.atom_at_zero * d.support_min()
        for a, w in zip(m._alphas, m._weights):
            out += w * d.partial_quantile_integral(a) / a
        if m.density is not None and m.density.C < 1.0:
            dens = m.density
            val, _ = quad(lambda v: _density_spectral(dens, v) * d.quantile(v),
                          0.0, 1.0, epsabs=QUAD_TOL, limit=QUAD_LIMIT)
            out += val
        return out
    raise TypeError(f"nu is not defined for {type(d).__name__}")


def nu_via_U(m: SpectralMeasure, d: Distribution) -> float:
    """Independent route: integrate the lower tail mean U_alpha(d) against m.

    Atoms evaluate exactly.  For an atomic law the density part also
    evaluates exactly: the partial quantile integral is piecewise affine in
    alpha, so each piece integrates against the density in closed form.
    """
    if not isinstance(d, (FiniteAtomic, Uniform)):
        raise TypeError(f"nu_via_U is not defined for {type(d).__name__}")
    out = m.atom_at_zero * d.support_min()
    for a, w in zip(m._alphas, m._weights):
        out += w * d.partial_quantile_integral(a) / a
    if m.density is None or m.density.C == 1.0:
        return out
    dens = m.density
    if isinstance(d, Uniform):
        val, _ = quad(lambda a: (d.partial_quantile_integral(a) / a) * float(dens(a)),
                      0.0, 1.0, epsabs=QUAD_TOL, limit=QUAD_LIMIT)
        return out + val
    c = dens.C
    cum = d._cum
    prev = np.concatenate(([0.0], cum[:-1]))
    pqi_prev = np.concatenate(([0.0], np.cumsum(d._weights * d._values)[:-1]))
    # On (c[i-1], c[i]] the tail integral is pqi_prev[i] + x[i] * (a - c[i-1]),
    # an affine function A + x*a with A = pqi_prev[i] - x[i] * c[i-1].
    h_prev = c + (1.0 - c) * prev
    h_cum = c + (1.0 - c) * cum
    # (A + x*a)/a * f_C(a) = (A + x*a) * 2C(1-C)/h(a)^3, so each piece reduces to
    # the closed-form integrals i0 of 2C(1-C)/h^3 and i1 of a * 2C(1-C)/h^3.
    i0 = c * (1.0 / h_prev**2 - 1.0 / h_cum**2)
    i1 = (2.0 * c / (1.0 - c)) * ((-1.0 / h_cum + c / (2.0 * h_cum**2))
                                  - (-1.0 / h_prev + c / (2.0 * h_prev**2)))
    a_coef = pqi_prev - d._values * prev
    val = float(np.dot(a_coef, i0) + np.dot(d._values, i1))
    return out + val


def uses_quadrature(m: SpectralMeasure, d: Distribution) -> bool:
    """True when evaluating nu(m, d) falls back to adaptive quadrature."""
    return (isinstance(d, Uniform) and m.density is not None and m.density.C < 1.0)


def measure_from_json(spec, tol: float = JSON_NORMALIZATION_TOL) -> SpectralMeasure:
    """Build a measure from a JSON object or string.

    Schema: {"atom0": w, "atoms": [[alpha, w], ...],
             "density": {"type": "uc", "C": c} | null}; all keys optional.
    """
    if isinstance(spec, (str, bytes)):
        spec = json.loads(spec)
    if not isinstance(spec, dict):
        raise ValueError("measure spec must be a JSON object")
    unknown = set(spec) - {"atom0", "atoms", "density"}
    if unknown:
        raise ValueError(f"unknown measure spec keys: {sorted(unknown)}")
    atom0 = spec.get("atom0", 0.0)
    atoms = spec.get("atoms", [])
    if not isinstance(atoms, list):
        raise ValueError("'atoms' must be a list of [alpha, weight] pairs")
    pairs = []
    for entry in atoms:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValueError(f"bad atom entry {entry!r}; expected [alpha, weight]")
        pairs.append((float(entry[0]), float(entry[1])))
    density_spec = spec.get("density")
    density = None
    if density_spec is not None:
        if not isinstance(density_spec, dict) or density_spec.get("type") != "uc":
            raise ValueError(f"unsupported density spec {density_spec!r}")
        density = UcDensity(float(density_spec["C"]))
    return SpectralMeasure(atom_at_zero=atom0, atoms=pairs, density=density, tol=tol)


def measure_to_json(m: SpectralMeasure) -> dict:
    """Inverse of measure_from_json, as a plain dict."""
    density = None
    if m.density is not None:
        density = {"type": "uc", "C": m.density.C}
    return {
        "atom0": m.atom_at_zero,
        "atoms": [[a, w] for a, w in m.atoms],
        "density": density,
    }
