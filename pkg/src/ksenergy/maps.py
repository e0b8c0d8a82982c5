"""Maps from the domain into a target space, and their composed scalar fields.

A map is an analytic evaluation contract: the grid is only ever used for the
outer integration, while map values (including at off-grid quadrature and
stencil points) always come from the evaluator itself. That keeps
interpolation error out of both energy pipelines.

Evaluators are vectorized: they accept arrays shaped (..., n) and return
(..., rep_dim).
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, MapEvaluationError, StencilRangeError
from .grid import DomainGrid
from .spaces import TAU, CircleSpace, EuclideanSpace, MaxNormPlane, MetricSpace, QPointsSpace


@dataclass(frozen=True)
class MetricMap:
    """u: Omega -> X as a pure, deterministic, vectorized evaluator.

    margin is how far beyond the domain box the evaluator stays defined;
    built-in maps are global formulas (margin = inf).
    """

    target: MetricSpace
    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str
    margin: float = math.inf
    closed_forms: dict = field(default_factory=dict)

    def eval(self, x):
        x = np.asarray(x, dtype=np.float64)
        try:
            out = np.asarray(self.evaluator(x), dtype=np.float64)
        except Exception as exc:  # noqa: BLE001 - contract: wrap and attach x
            raise MapEvaluationError(f"map {self.label!r} failed at {x!r}", point=x) from exc
        if out.shape != x.shape[:-1] + (self.target.rep_dim,):
            raise MapEvaluationError(
                f"map {self.label!r} returned shape {out.shape} for input {x.shape}", point=x
            )
        return out


@dataclass(frozen=True)
class ComposedField:
    """x -> distance(u(x), anchor), cached on the grid nodes."""

    metric_map: MetricMap
    anchor: np.ndarray
    grid: DomainGrid
    values: np.ndarray  # (N,) at grid nodes

    def evaluate_at(self, x):
        """Analytic evaluation away from the grid (no interpolation)."""
        return self.metric_map.target.distance(self.metric_map.eval(x), self.anchor)


def compose_distance(metric_map, anchor, grid):
    """Build the composed field x -> d(u(x), anchor) cached at grid nodes."""
    anchor = metric_map.target.validate_point(anchor)
    values = metric_map.target.distance(metric_map.eval(grid.nodes), anchor)
    values.setflags(write=False)
    return ComposedField(metric_map=metric_map, anchor=anchor, grid=grid, values=values)


def fd_gradient(composed, x, delta):
    """Central-difference gradient of a composed field at point(s) x.

    Evaluates the underlying map directly at x +- delta * e_i. Raises
    StencilRangeError when the stencil leaves the evaluable region (domain
    box grown by the map's margin).
    """
    if delta <= 0:
        raise StencilRangeError(f"fd step must be positive, got {delta}")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    g = composed.grid
    margin = composed.metric_map.margin
    lo = g.lower - margin
    hi = g.upper + margin
    if np.any(pts - delta < lo) or np.any(pts + delta > hi):
        raise StencilRangeError(
            f"stencil of width {delta} leaves the evaluable region at some of {pts!r}"
        )
    n = g.dim
    out = np.empty(pts.shape, dtype=np.float64)
    for i in range(n):
        step = np.zeros(n)
        step[i] = delta
        out[:, i] = (composed.evaluate_at(pts + step) - composed.evaluate_at(pts - step)) / (
            2.0 * delta
        )
    return out[0] if single else out


# ---------------------------------------------------------------------------
# built-in map catalog
# ---------------------------------------------------------------------------


def _parse_matrix(text):
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";")]
        mat = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"malformed matrix spec {text!r}") from exc
    if mat.ndim != 2:
        raise ConfigError(f"malformed matrix spec {text!r}")
    return mat


def make_map(spec, space, domain_dim):
    """Build a catalog map onto the given target space.

    Specs: identity | constant | constant:v1,v2,... | linear:r11,r12;r21,r22
    | winding:k | qsplit | swirl:a
    """
    parts = str(spec).strip().split(":", 1)
    name = parts[0]
    arg = parts[1] if len(parts) > 1 else None

    if name == "identity":
        if isinstance(space, CircleSpace) or space.rep_dim != domain_dim:
            raise ConfigError(
                f"identity needs a vector target of dimension {domain_dim}, got {space.spec}"
            )
        return MetricMap(space, lambda x: np.array(x, dtype=np.float64, copy=True), "identity")

    if name == "constant":
        point = space.dense_point(0) if arg is None else np.array([float(v) for v in arg.split(",")])
        point = space.validate_point(point)

        def const_eval(x, point=point):
            return np.broadcast_to(point, x.shape[:-1] + (point.size,)).copy()

        return MetricMap(space, const_eval, f"constant:{','.join(repr(v) for v in point)}")

    if name == "linear":
        if arg is None:
            raise ConfigError("linear map needs a matrix, e.g. linear:1,0;0,2")
        mat = _parse_matrix(arg)
        if mat.shape != (space.rep_dim, domain_dim):
            raise ConfigError(
                f"matrix shape {mat.shape} incompatible with target {space.spec} "
                f"and domain dimension {domain_dim}"
            )
        if isinstance(space, (CircleSpace, QPointsSpace)):
            raise ConfigError(f"linear maps need a vector target, got {space.spec}")
        return MetricMap(space, lambda x, A=mat: x @ A.T, f"linear:{arg}", closed_forms={"matrix": mat})

    if name == "winding":
        if not isinstance(space, CircleSpace):
            raise ConfigError("winding maps into the circle target only")
        k = float(arg) if arg is not None else 2.0
        return MetricMap(
            space,
            lambda x, k=k: (k * x[..., :1]) % TAU,
            f"winding:{arg if arg is not None else '2'}",
            closed_forms={"winding": k},
        )

    if name == "qsplit":
        if not (isinstance(space, QPointsSpace) and space.Q == 2 and space.m == 1):
            raise ConfigError("qsplit maps into q:2:1 only")
        if domain_dim != 2:
            raise ConfigError("qsplit is defined on 2-d domains")

        def qsplit_eval(x):
            sheet = 1.0 + 0.25 * x[..., 0] + 0.5 * x[..., 1]
            return np.stack([sheet, -sheet], axis=-1)

        # sheets +-sigma with sigma = 1 + x1/4 + x2/2; grad sigma = (1/4, 1/2)
        return MetricMap(space, qsplit_eval, "qsplit", closed_forms={"sheet_gradient": (0.25, 0.5)})

    if name == "swirl":
        if not isinstance(space, EuclideanSpace) or isinstance(space, MaxNormPlane) or space.m != 2:
            raise ConfigError("swirl maps into euclidean:2 only")
        if domain_dim != 2:
            raise ConfigError("swirl is defined on 2-d domains")
        a = float(arg) if arg is not None else 0.3

        def swirl_eval(x, a=a):
            return np.stack(
                [x[..., 0] + a * np.sin(x[..., 1]), x[..., 1] + a * np.cos(x[..., 0])], axis=-1
            )

        return MetricMap(space, swirl_eval, f"swirl:{a!r}")

    raise ConfigError(f"unknown map spec {spec!r}")
