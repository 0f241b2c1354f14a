"""Classical correlation polytopes: vertices, LP membership, facets, face counts.

Facets are found by brute force over affinely independent vertex subsets
spanning a supporting hyperplane, which is only sensible for small
dimensions (see the ``max_dim`` guard). Non-full-dimensional point sets are
handled in coordinates of their affine hull; returned halfspaces are
expressed in the original coordinates with normals inside the hull's
direction space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import bits
from ._config import GEOM_TOL
from .correlation import ExperimentShape
from .errors import DegeneratePolytopeError, GuardError, StructuralError

_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise StructuralError("a point set needs a nonempty (N, D) array")
        keys = np.round(pts / GEOM_TOL).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        pts = pts[np.sort(first)]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def to_dict(self):
        return {"dimension": self.dimension, "vertices": self.points.tolist()}

    @classmethod
    def from_dict(cls, data):
        ps = cls(data["vertices"])
        if ps.dimension != int(data["dimension"]):
            raise StructuralError("vertex length does not match the declared dimension")
        return ps


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``<normal, x> <= offset``; offset is scaled to +-1 unless it vanishes."""

    normal: np.ndarray
    offset: float
    vertices: tuple = ()

    def value(self, x):
        return float(np.asarray(x, dtype=float) @ self.normal)

    def contains(self, x, tol=GEOM_TOL):
        return self.value(x) <= self.offset + tol

    def to_dict(self):
        return {"normal": [float(a) for a in self.normal], "offset": float(self.offset)}


@dataclass(frozen=True, eq=False)
class MembershipCertificate:
    inside: bool
    weights: np.ndarray | None = None
    separator: Halfspace | None = None
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class AffineHull:
    """Affine hull ``origin + span(basis)``; ``basis`` has orthonormal columns."""

    origin: np.ndarray
    basis: np.ndarray

    @property
    def dimension(self):
        return self.basis.shape[1]

    def project(self, x):
        return (np.asarray(x, dtype=float) - self.origin) @ self.basis

    def lift(self, u):
        return self.origin + np.asarray(u, dtype=float) @ self.basis.T

    def residual(self, x):
        d = np.asarray(x, dtype=float) - self.origin
        return d - (d @ self.basis) @ self.basis.T


def _as_points(vertices):
    return vertices if isinstance(vertices, PointSet) else PointSet(vertices)


def affine_hull(vertices, tol=GEOM_TOL):
    pts = _as_points(vertices).points
    origin = pts.mean(axis=0)
    centered = pts - origin
    if len(pts) == 1:
        return AffineHull(origin, np.zeros((pts.shape[1], 0)))
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(sv[0]) if sv.size else 1.0)
    rank = int(np.sum(sv > tol * scale))
    return AffineHull(origin, vt[:rank].T.copy())


def correlation_vertices(n):
    """Distinct full-correlation vectors of all deterministic +-1 assignments."""
    if not 1 <= n <= 5:
        raise GuardError(f"correlation_vertices is guarded to 1 <= n <= 5, got {n}")
    svals = bits.bit_matrix(n)
    assignments = np.array(list(itertools.product([1, -1], repeat=2 * n))).reshape(-1, n, 2)
    xi = assignments[:, np.arange(n)[None, :], svals].prod(axis=2)
    return PointSet(xi.astype(float))


def probability_vertices(shape):
    """0/1 probability vectors of all classical configurations.

    Coordinates follow the flattened ``CorrelationTable.probs`` layout.
    """
    if not isinstance(shape, ExperimentShape):
        shape = ExperimentShape(*shape)
    dim = (shape.m * shape.v) ** shape.n
    if dim > 4096:
        raise GuardError(f"probability space of dimension {dim} exceeds the 4096 guard")
    n, m = shape.n, shape.m
    out = []
    for cfg in itertools.product(range(shape.v), repeat=n * m):
        c = np.array(cfg).reshape(n, m)
        vec = np.zeros(shape.array_shape)
        for s in itertools.product(range(m), repeat=n):
            a = tuple(c[k, s[k]] for k in range(n))
            vec[s + a] = 1.0
        out.append(vec.ravel())
    return PointSet(np.array(out))


def _normalized(normal, offset, tol=GEOM_TOL):
    if abs(offset) > tol:
        scale = abs(offset)
        return normal / scale, float(np.sign(offset))
    scale = np.max(np.abs(normal))
    return normal / scale, 0.0


def _polar_max(w, u):
    """``max <b, u>`` subject to ``w b <= 1``; returns (value, b)."""
    res = linprog(
        -np.asarray(u, dtype=float), A_ub=w, b_ub=np.ones(len(w)),
        bounds=[(None, None)] * w.shape[1], method="highs", options=_HIGHS_OPTIONS,
    )
    if res.status != 0:
        raise RuntimeError(f"polar LP failed: {res.message}")
    return -float(res.fun), res.x


def lp_membership(x, vertices, tol=GEOM_TOL):
    """Decide ``x in conv(vertices)`` with a certificate either way.

    Inside: convex weights reproducing ``x``. Outside: a halfspace valid on
    every vertex and violated by ``x``, scaled so that the maximum over the
    vertices equals the offset.
    """
    ps = _as_points(vertices)
    pts = ps.points
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != ps.dimension:
        raise StructuralError(f"point has dimension {x.size}, polytope has {ps.dimension}")
    nv, d = pts.shape
    # min t  s.t. |pts^T w - x| <= t, w >= 0, sum w = 1
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    ones = np.ones((d, 1))
    a_ub = np.vstack([np.hstack([pts.T, -ones]), np.hstack([-pts.T, -ones])])
    b_ub = np.concatenate([x, -x])
    a_eq = np.hstack([np.ones((1, nv)), np.zeros((1, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (nv + 1), method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    w = np.clip(res.x[:nv], 0.0, None)
    w = w / w.sum()
    residual = float(np.max(np.abs(w @ pts - x)))
    if residual <= tol:
        return MembershipCertificate(True, weights=w, residual=residual)
    return MembershipCertificate(False, separator=separating_halfspace(x, ps, tol), residual=residual)


def separating_halfspace(x, vertices, tol=GEOM_TOL):
    """Halfspace containing the polytope that ``x`` violates (or ``None``)."""
    ps = _as_points(vertices)
    hull = affine_hull(ps, tol)
    off_hull = hull.residual(x)
    if np.linalg.norm(off_hull) > tol:
        normal = off_hull
        offset = float(normal @ hull.origin)
    else:
        w = hull.project(ps.points)
        value, b = _polar_max(w, hull.project(x))
        if value <= 1.0 + tol:
            return None
        normal = hull.basis @ b
        offset = 1.0 + float(normal @ hull.origin)
    normal, offset = _normalized(normal, offset)
    tight = tuple(int(i) for i in np.nonzero(np.abs(ps.points @ normal - offset) <= 1e-7)[0])
    return Halfspace(normal, offset, tight)


def _gauge(w, u):
    if not np.any(np.abs(u) > 1e-14):
        return 0.0
    return _polar_max(w, u)[0]


def facet_enumeration(vertices, max_dim=8, max_vertices=64, project=False, tol=GEOM_TOL):
    """All facets of ``conv(vertices)`` by hyperplanes through vertex subsets.

    A facet hyperplane contains ``D`` linearly independent (hull-centered)
    vertices, all of which pairwise share a proper face. Pairs sharing a
    face are found first with one small LP each (the midpoint must lie on
    the relative boundary); subsets are then grown depth-first inside that
    compatibility graph and every complete subset is tested for support.
    """
    ps = _as_points(vertices)
    hull = affine_hull(ps, tol)
    k = hull.dimension
    if k < ps.dimension and not project:
        raise DegeneratePolytopeError(
            f"point set spans an affine subspace of dimension {k} < {ps.dimension}; "
            "pass project=True to enumerate facets inside the affine hull",
            hull=hull,
        )
    if k == 0:
        raise DegeneratePolytopeError("a single point has no facets", hull=hull)
    if k > max_dim or len(ps) > max_vertices:
        raise GuardError(
            f"brute-force facet enumeration is guarded to dimension <= {max_dim} and "
            f"<= {max_vertices} vertices (got {k}, {len(ps)})"
        )
    w = hull.project(ps.points)
    nv = len(w)
    compatible = np.eye(nv, dtype=bool)
    for i, j in itertools.combinations(range(nv), 2):
        if _gauge(w, (w[i] + w[j]) / 2) >= 1.0 - 1e-9:
            compatible[i, j] = compatible[j, i] = True

    found = {}

    def grow(chosen, basis, candidates):
        if len(chosen) == k:
            b = np.linalg.solve(w[chosen], np.ones(k))
            vals = w @ b
            if np.all(vals <= 1.0 + tol):
                tight = tuple(int(i) for i in np.nonzero(np.abs(vals - 1.0) <= 1e-7)[0])
                found.setdefault(tight, b)
            return
        need = k - len(chosen)
        cand = [c for c in candidates if c > (chosen[-1] if chosen else -1)]
        for pos, c in enumerate(cand):
            if len(cand) - pos < need:
                break
            vec = w[c]
            resid = vec - basis @ (basis.T @ vec) if basis.shape[1] else vec
            norm = np.linalg.norm(resid)
            if norm <= 1e-9:
                continue
            new_basis = np.hstack([basis, (resid / norm)[:, None]])
            new_cand = [x for x in cand[pos + 1 :] if compatible[c, x]]
            grow(chosen + [c], new_basis, new_cand)

    grow([], np.zeros((k, 0)), list(range(nv)))

    facets = []
    for tight, b in found.items():
        normal = hull.basis @ b
        offset = 1.0 + float(normal @ hull.origin)
        normal, offset = _normalized(normal, offset)
        facets.append(Halfspace(normal, offset, tight))
    facets.sort(key=lambda h: (tuple(np.round(h.normal, 9)), h.offset))
    return facets


def classify_by_facets(x, facets, tol=GEOM_TOL):
    return all(h.contains(x, tol) for h in facets)


@dataclass(frozen=True)
class EulerResult:
    f_vector: tuple
    alternating_sum: int
    expected: int
    holds: bool


def _affine_rank(pts, tol=GEOM_TOL):
    if len(pts) <= 1:
        return 0
    return int(np.linalg.matrix_rank(pts[1:] - pts[0], tol=tol * 10))


def face_lattice(vertices, tol=GEOM_TOL):
    """Vertex sets of all proper nonempty faces, keyed by face dimension."""
    ps = _as_points(vertices)
    facets = facet_enumeration(ps, max_dim=4, project=True, tol=tol)
    faces = {frozenset(h.vertices) for h in facets}
    frontier = set(faces)
    while frontier:
        new = set()
        for a in frontier:
            for b in faces:
                c = a & b
                if c and c not in faces:
                    new.add(c)
        faces |= new
        frontier = new
    by_dim = {}
    for face in faces:
        dim = _affine_rank(ps.points[sorted(face)], tol)
        by_dim.setdefault(dim, []).append(tuple(sorted(face)))
    return by_dim


def euler_check(vertices, tol=GEOM_TOL):
    """Face counts ``f_j`` and the relation ``sum_j (-1)**j f_j = 1 - (-1)**D``."""
    ps = _as_points(vertices)
    d = affine_hull(ps, tol).dimension
    if d > 4:
        raise GuardError(f"face-lattice enumeration is guarded to dimension <= 4, got {d}")
    by_dim = face_lattice(ps, tol)
    f = tuple(len(by_dim.get(j, [])) for j in range(d))
    alt = sum((-1) ** j * fj for j, fj in enumerate(f))
    expected = 1 - (-1) ** d
    return EulerResult(f, alt, expected, alt == expected)
