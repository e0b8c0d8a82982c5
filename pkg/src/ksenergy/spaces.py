"""Target metric spaces: distances plus an enumerated countable dense subset.

Every space works on fixed-length real vectors and exposes

* ``distance(a, b)`` -- broadcasting over leading axes,
* ``dense_point(k)`` / ``dense_points(count)`` -- a deterministic enumeration
  of a dense subset built from dyadic lattices,
* ``snap(points, depth)`` -- nearest member of the dense set on the depth-d
  dyadic sublattice (used to generate extra dense-set anchors on demand).

The dyadic enumeration orders points by cost = (binary depth of the
coordinates) + (dyadic shell of the max-norm radius), finest-near-origin
first within each cost. That keeps the covering radius on any fixed window
shrinking quickly with the prefix length while still reaching every dyadic
point of the plane eventually.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidPointError

TAU = 2.0 * math.pi


def _dyadic_block(m, depth, shell):
    """All x = j / 2^depth with exact depth/shell, sorted by (|x|^2, lex)."""
    half_extent = 2 ** (shell + depth)
    axis = np.arange(-half_extent, half_extent + 1)
    grids = np.meshgrid(*([axis] * m), indexing="ij")
    j = np.stack([g.ravel() for g in grids], axis=1)
    if shell >= 1:
        j = j[np.max(np.abs(j), axis=1) > half_extent // 2]
    if depth >= 1:
        j = j[np.any(j % 2 != 0, axis=1)]
    x = j / float(2**depth)
    order = np.lexsort([x[:, c] for c in range(m - 1, -1, -1)] + [np.einsum("ij,ij->i", x, x)])
    return x[order]


def _dyadic_lattice_prefix(m, count):
    """First `count` points of the cost-ordered dyadic enumeration of R^m."""
    blocks = []
    total = 0
    cost = 0
    while total < count:
        for shell in range(cost + 1):
            block = _dyadic_block(m, cost - shell, shell)
            blocks.append(block)
            total += len(block)
            if total >= count:
                break
        cost += 1
    return np.concatenate(blocks, axis=0)[:count]


class MetricSpace:
    """Base class; concrete spaces fill in kind, rep_dim and the operations."""

    kind = "abstract"
    rep_dim = 0

    def distance(self, a, b):
        raise NotImplementedError

    def dense_points(self, count):
        raise NotImplementedError

    def dense_point(self, k):
        return self.dense_points(k + 1)[k]

    def snap(self, points, depth):
        raise NotImplementedError

    def sample_points(self, count, rng):
        """Bounded sampler used by the axiom checker."""
        raise NotImplementedError

    def canonical(self, points):
        """Canonical representative (identity except for multiset spaces)."""
        return np.asarray(points, dtype=np.float64)

    def validate_point(self, a):
        a = np.asarray(a, dtype=np.float64)
        if a.shape[-1:] != (self.rep_dim,):
            raise InvalidPointError(
                f"{self.kind} expects points of dimension {self.rep_dim}, got shape {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise InvalidPointError(f"non-finite point for space {self.kind}")
        return a

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec}>"


class EuclideanSpace(MetricSpace):
    """R^m with the Euclidean distance; dense set = dyadic lattice."""

    def __init__(self, m):
        if m < 1:
            raise ConfigError("euclidean target needs dimension >= 1")
        self.m = int(m)
        self.rep_dim = self.m
        self.kind = "euclidean"
        self.spec = f"euclidean:{self.m}"
        self._prefix = np.empty((0, self.m))

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        return np.linalg.norm(a - b, axis=-1)

    def dense_points(self, count):
        if len(self._prefix) < count:
            self._prefix = _dyadic_lattice_prefix(self.m, count)
        return self._prefix[:count]

    def snap(self, points, depth):
        scale = float(2**depth)
        return np.round(np.asarray(points, dtype=np.float64) * scale) / scale

    def sample_points(self, count, rng):
        return rng.uniform(-2.0, 2.0, size=(count, self.m))


class MaxNormPlane(EuclideanSpace):
    """R^2 with the distance induced by the maximum norm."""

    def __init__(self):
        super().__init__(2)
        self.kind = "max_norm_plane"
        self.spec = "max_norm_plane"

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        return np.max(np.abs(a - b), axis=-1)


class CircleSpace(MetricSpace):
    """Unit circle parametrized by angle, with the geodesic (arc) distance."""

    rep_dim = 1
    kind = "circle"
    spec = "circle"

    def __init__(self):
        self._prefix = np.empty((0, 1))

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        d = np.abs(a - b)[..., 0] % TAU
        return np.minimum(d, TAU - d)

    def dense_points(self, count):
        if len(self._prefix) < count:
            angles = [0.0]
            level = 1
            while len(angles) < count:
                angles.extend(TAU * j / 2**level for j in range(1, 2**level, 2))
                level += 1
            self._prefix = np.array(angles)[:count, None]
        return self._prefix[:count]

    def snap(self, points, depth):
        scale = float(2**depth)
        frac = np.round(np.asarray(points, dtype=np.float64) / TAU * scale) % scale
        return frac / scale * TAU

    def sample_points(self, count, rng):
        return rng.uniform(0.0, TAU, size=(count, 1))


class QPointsSpace(MetricSpace):
    """Unordered Q-tuples of points in R^m with the l2-matching distance.

    distance^2 = min over pairings sigma of sum_i |a_i - b_sigma(i)|^2; points
    are represented as Q concatenated m-vectors, order irrelevant.
    """

    def __init__(self, Q, m):
        if Q < 1 or m < 1:
            raise ConfigError("q-points target needs Q >= 1 and m >= 1")
        if Q > 6:
            raise ConfigError("matching distance enumerates Q! pairings; Q > 6 unsupported")
        self.Q = int(Q)
        self.m = int(m)
        self.rep_dim = self.Q * self.m
        self.kind = "q_points"
        self.spec = f"q:{self.Q}:{self.m}"
        self._base = EuclideanSpace(m)
        self._prefix = np.empty((0, self.rep_dim))
        self._perms = list(itertools.permutations(range(self.Q)))

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        shape = np.broadcast_shapes(a.shape, b.shape)
        a = np.broadcast_to(a, shape).reshape(shape[:-1] + (self.Q, self.m))
        b = np.broadcast_to(b, shape).reshape(shape[:-1] + (self.Q, self.m))
        best = None
        for perm in self._perms:
            diff = a - b[..., perm, :]
            cost = np.sum(diff * diff, axis=(-2, -1))
            best = cost if best is None else np.minimum(best, cost)
        return np.sqrt(best)

    def _index_tuples(self):
        total = 0
        while True:
            yield from self._tuples_with_sum(self.Q, total, 0)
            total += 1

    @staticmethod
    def _tuples_with_sum(q, total, k_min):
        if q == 1:
            if total >= k_min:
                yield (total,)
            return
        for k in range(k_min, total // q + 1):
            for rest in QPointsSpace._tuples_with_sum(q - 1, total - k, k):
                yield (k, *rest)

    def dense_points(self, count):
        if len(self._prefix) < count:
            tuples = list(itertools.islice(self._index_tuples(), count))
            base = self._base.dense_points(max(max(t) for t in tuples) + 1)
            self._prefix = np.array([np.concatenate([base[k] for k in t]) for t in tuples])
        return self._prefix[:count]

    def canonical(self, points):
        """Sort the Q blocks lexicographically (batched stable sorts)."""
        pts = np.asarray(points, dtype=np.float64)
        blocks = pts.reshape(pts.shape[:-1] + (self.Q, self.m))
        for c in range(self.m - 1, -1, -1):
            order = np.argsort(blocks[..., c], axis=-1, kind="stable")
            blocks = np.take_along_axis(blocks, order[..., None], axis=-2)
        return blocks.reshape(pts.shape)

    def snap(self, points, depth):
        # block order is irrelevant to the matching distance, so no
        # canonicalization is needed here
        scale = float(2**depth)
        return np.round(np.asarray(points, dtype=np.float64) * scale) / scale

    def sample_points(self, count, rng):
        return self.canonical(rng.uniform(-2.0, 2.0, size=(count, self.rep_dim)))


def make_space(spec):
    """Parse a space spec string: euclidean:m | max_norm_plane | circle | q:Q:m."""
    parts = str(spec).strip().split(":")
    head = parts[0]
    try:
        if head == "euclidean":
            return EuclideanSpace(int(parts[1]))
        if head == "max_norm_plane" and len(parts) == 1:
            return MaxNormPlane()
        if head == "circle" and len(parts) == 1:
            return CircleSpace()
        if head == "q":
            return QPointsSpace(int(parts[1]), int(parts[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed space spec {spec!r}") from exc
    raise ConfigError(f"unknown space spec {spec!r}")


@dataclass
class AxiomReport:
    space: str
    samples: int
    seed: int
    tolerance: float
    violations: dict = field(default_factory=dict)

    @property
    def total_violations(self):
        return sum(self.violations.values())


def verify_metric_axioms(space, samples, seed, tolerance=1e-12):
    """Check the metric axioms on random triples from the bounded sampler.

    Counts violations beyond `tolerance` of: nonnegativity, d(a,a)=0,
    positivity for visibly distinct points, symmetry, and the triangle
    inequality. Exact metrics should report zero everywhere.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    a = space.sample_points(samples, rng)
    b = space.sample_points(samples, rng)
    c = space.sample_points(samples, rng)
    d_ab = space.distance(a, b)
    d_ba = space.distance(b, a)
    d_bc = space.distance(b, c)
    d_ac = space.distance(a, c)
    d_aa = space.distance(a, a)

    distinct = np.max(np.abs(space.canonical(a) - space.canonical(b)), axis=-1) > 1e-6
    report = AxiomReport(space=space.spec, samples=samples, seed=seed, tolerance=tolerance)
    report.violations = {
        "nonnegativity": int(np.sum(d_ab < -tolerance)),
        "identity": int(np.sum(d_aa > tolerance)),
        "positivity": int(np.sum(distinct & (d_ab <= tolerance))),
        "symmetry": int(np.sum(np.abs(d_ab - d_ba) > tolerance)),
        "triangle": int(np.sum(d_ac - d_ab - d_bc > tolerance)),
    }
    return report
