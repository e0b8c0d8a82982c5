"""Deterministic sphere and ball quadrature, and limit extrapolation.

Sphere rules are normalized so the weights sum to 1 (they compute surface
*averages*); ball rules sum to the unit-ball volume omega_n. Low dimensions
use product rules that are exact on low-degree polynomials; n > 3 falls back
to a seeded scrambled-Sobol construction so reports stay reproducible.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from .errors import ExtrapolationDataError, UnsupportedDimensionError

#: defaults per dimension; n=2 is an angle count, n=3 (azimuth, polar)
DEFAULT_SPHERE_ORDER = {2: 256, 3: (16, 32)}
DEFAULT_QMC_COUNT = 4096


def unit_ball_volume(n):
    """Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sphere_surface_area(n):
    """Surface measure of S^(n-1), equal to n * omega_n."""
    return n * unit_ball_volume(n)


def energy_normalization(n, p):
    """The constant (n + p) / (n * omega_n) scaling ball averages."""
    return (n + p) / (n * unit_ball_volume(n))


@dataclass(frozen=True)
class QuadratureRule:
    """Immutable node/weight set on the unit sphere or ball."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str  # "sphere" | "ball"
    normalization: float

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=np.float64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self):
        return self.nodes.shape[1]

    def integrate(self, values):
        """Weighted sum of per-node values (leading axis = nodes)."""
        v = np.asarray(values, dtype=np.float64)
        return float(np.dot(self.weights, v)) if v.ndim == 1 else np.tensordot(self.weights, v, axes=(0, 0))


def sphere_nodes(n, order=None, seed=0):
    """Quadrature rule for surface averages over S^(n-1).

    n=2: uniform angles (order = count, default 256), built in antipodal
    pairs so node j + M/2 is exactly -node j for even counts.
    n=3: uniform azimuth x Gauss-Legendre in cos(polar), order = (azimuth,
    polar), default (16, 32).
    n>3: seeded scrambled Sobol mapped through the Gaussian construction.
    """
    if n < 2:
        raise UnsupportedDimensionError(f"sphere rules need n >= 2, got n={n}")
    if order is None:
        order = DEFAULT_SPHERE_ORDER.get(n, DEFAULT_QMC_COUNT)
    if n == 2:
        count = int(order)
        if count < 1:
            raise UnsupportedDimensionError("need at least one sphere node")
        if count % 2 == 0:
            theta = 2.0 * math.pi * np.arange(count // 2) / count
            half = np.column_stack([np.cos(theta), np.sin(theta)])
            nodes = np.vstack([half, -half])
        else:
            theta = 2.0 * math.pi * np.arange(count) / count
            nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(count, 1.0 / count)
    elif n == 3:
        n_az, n_pol = (int(order), 2 * int(order)) if np.isscalar(order) else (int(order[0]), int(order[1]))
        t, v = leggauss(n_pol)  # cos(polar) in [-1, 1], sum(v) = 2
        phi = 2.0 * math.pi * np.arange(n_az) / n_az
        s = np.sqrt(np.maximum(0.0, 1.0 - t**2))
        nodes = np.stack(
            [
                np.outer(s, np.cos(phi)).ravel(),
                np.outer(s, np.sin(phi)).ravel(),
                np.repeat(t, n_az),
            ],
            axis=1,
        )
        weights = np.repeat(v / 2.0, n_az) / n_az
    else:
        count = int(order)
        sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
        u = sampler.random(count)
        g = _gaussian_from_uniform(u)
        nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
        weights = np.full(count, 1.0 / count)
    return QuadratureRule(nodes=nodes, weights=weights, kind="sphere", normalization=1.0)


def ball_nodes(n, order=None, seed=0):
    """Quadrature rule integrating over the unit ball B_1(0) in R^n.

    For n >= 2 this is Gauss-Legendre in radius (with the r^(n-1) Jacobian
    folded into the weights) tensored with a sphere rule; order = (radial,
    sphere order). n=1 reduces to Gauss-Legendre on [-1, 1].
    """
    if n < 1:
        raise UnsupportedDimensionError(f"ball rules need n >= 1, got n={n}")
    if n == 1:
        count = int(order) if order is not None else 32
        x, w = leggauss(count)
        return QuadratureRule(nodes=x[:, None], weights=w, kind="ball", normalization=2.0)
    if order is None:
        radial, sphere_order = 16, {2: 192, 3: (16, 32)}.get(n, DEFAULT_QMC_COUNT)
    else:
        radial, sphere_order = int(order[0]), order[1]
    r, w = leggauss(int(radial))
    r = 0.5 * (r + 1.0)  # map to (0, 1)
    w = 0.5 * w
    sphere = sphere_nodes(n, sphere_order, seed=seed)
    surface = sphere_surface_area(n)
    nodes = (r[:, None, None] * sphere.nodes[None, :, :]).reshape(-1, n)
    weights = (w * r ** (n - 1))[:, None] * (surface * sphere.weights)[None, :]
    return QuadratureRule(
        nodes=nodes, weights=weights.ravel(), kind="ball", normalization=unit_ball_volume(n)
    )


def _gaussian_from_uniform(u):
    # inverse-CDF transform; clip away exact 0/1 from the Sobol stream
    from scipy.special import ndtri

    return ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))


@dataclass(frozen=True)
class ExtrapolationResult:
    limit: float
    order: float
    error: float
    fallback: bool  # True when the order fit was ill-conditioned


def extrapolate(pairs):
    """Fit value = L + c * h^q on the last three (h, value) pairs.

    h must be strictly decreasing. Returns the fitted limit L, the observed
    order q, and |c| * h_last^q as the error estimate (the size of the final
    correction). Near-constant tails short-circuit to (last value, 0, 0);
    an unresolvable order falls back to a first-order fit and is flagged.
    """
    pairs = [(float(h), float(v)) for h, v in pairs]
    if len(pairs) < 3:
        raise ExtrapolationDataError(f"need at least 3 (h, value) pairs, got {len(pairs)}")
    h = np.array([p[0] for p in pairs])
    if not np.all(np.diff(h) < 0):
        raise ExtrapolationDataError("h values must be strictly decreasing")
    v = np.array([p[1] for p in pairs])
    limit, order, err, fb = _fit_tail(h[-3:], v[-3:, None])
    return ExtrapolationResult(float(limit[0]), float(order[0]), float(err[0]), bool(fb[0]))


def extrapolate_fields(h, values):
    """Vectorized tail fit: values has shape (len(h), N); returns 4 arrays (N,)."""
    h = np.asarray(h, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if h.size < 3:
        raise ExtrapolationDataError("need at least 3 h values")
    return _fit_tail(h[-3:], values[-3:])


def _fit_tail(h, v):
    """Solve v_i = L + c h_i^q on three points, per column of v."""
    h1, h2, h3 = h
    d1 = v[0] - v[1]
    d2 = v[1] - v[2]
    scale = np.maximum(np.max(np.abs(v), axis=0), 1.0)
    const = (np.abs(d1) <= 1e-13 * scale) & (np.abs(d2) <= 1e-13 * scale)
    usable = (~const) & (d1 * d2 > 0)

    ratio = np.where(usable, d1 / np.where(d2 == 0, 1.0, d2), 2.0)
    q = _solve_order(float(h1), float(h2), float(h3), ratio)
    ok = usable & np.isfinite(q)
    q = np.where(ok, q, 1.0)  # first-order fallback
    denom = h2**q - h3**q
    c = d2 / np.where(denom == 0, 1.0, denom)
    limit = v[2] - c * h3**q
    err = np.abs(c) * h3**q

    limit = np.where(const, v[2], limit)
    q = np.where(const, 0.0, q)
    err = np.where(const, 0.0, err)
    fallback = (~const) & ~ok
    return limit, q, err, fallback


def _solve_order(h1, h2, h3, ratio):
    """Bisection for q in (h1^q - h2^q) / (h2^q - h3^q) = ratio (monotone in q)."""
    lo = np.full_like(ratio, 1e-3)
    hi = np.full_like(ratio, 16.0)

    def f(q):
        return (h1**q - h2**q) / (h2**q - h3**q) - ratio

    bad = f(lo) * f(hi) > 0  # no bracket
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        left = f(lo) * f(mid) <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
    q = 0.5 * (lo + hi)
    return np.where(bad, np.nan, q)


def rule_to_csv(rule, path):
    """Dump a rule's nodes and weights for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(rule.dim)] + ["weight"])
        for node, w in zip(rule.nodes, rule.weights):
            writer.writerow([repr(float(c)) for c in node] + [repr(float(w))])
