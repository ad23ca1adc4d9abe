"""Polygon pairs, vertex classification, and the disjoint partition at scale R.

A domain pair is a simple polygon (the region of interest) sitting inside
another simple polygon whose boundary reflects heat. The work here is entirely
combinatorial-geometric: split the inner boundary wherever it meets outer
vertices, tag each sub-edge as open (interior) or on the reflecting wall,
classify every vertex by the wedge pattern the region occupies around it, and
cut the region into sectors, edge strips, cusps, and a core so that the model
expansion can be summed piece by piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


class NotSimple(Exception):
    """Polygon edges cross or touch where they should not."""


class NotContained(Exception):
    """Inner polygon is not a subset of the outer one."""


class AmbiguousEdge(Exception):
    """An inner edge skims the outer boundary without lying on it."""


class UnsupportedVertex(Exception):
    """Vertex wedge pattern outside the supported catalogue."""


class DegenerateGeometry(Exception):
    """Zero-length edges, vanishing radii, or similar collapse."""


class InvalidDims(Exception):
    """Dimensions out of range (e.g. cusp height exceeding its radius)."""


class Point(NamedTuple):
    x: float
    y: float


class EdgeKind(Enum):
    OPEN = "open"
    NEUMANN = "neumann"


class VertexKind(Enum):
    OPEN = "open"
    NN = "nn"
    NON = "non"
    NOON = "noon"
    GENERALIZED = "generalized"


class NoonOrientation(Enum):
    MIDDLE_INTERIOR = "middle_interior"
    FLANKS_INTERIOR = "flanks_interior"


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _seg_point_dist(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    s = ((px - ax) * dx + (py - ay) * dy) / L2
    s = min(1.0, max(0.0, s))
    return math.hypot(px - (ax + s * dx), py - (ay + s * dy))


def _segments_cross(p1, p2, p3, p4, tol):
    """True when the open interiors of segments p1p2 and p3p4 intersect."""
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True
    return False


class Polygon:
    """Simple polygon, normalized to counterclockwise orientation.

    Consecutive duplicate points raise DegenerateGeometry; collinear runs are
    merged away; any remaining self-intersection or self-touching raises
    NotSimple.
    """

    def __init__(self, vertices):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise DegenerateGeometry("polygon needs at least 3 planar points")
        if not np.all(np.isfinite(pts)):
            raise DegenerateGeometry("polygon coordinates must be finite")

        scale = float(np.max(np.abs(pts))) or 1.0
        dup_tol = 1e-14 * scale

        # drop consecutive duplicates (closing repeat included)
        keep = [0]
        for i in range(1, len(pts)):
            if math.hypot(*(pts[i] - pts[keep[-1]])) > dup_tol:
                keep.append(i)
        if math.hypot(*(pts[keep[-1]] - pts[keep[0]])) <= dup_tol and len(keep) > 1:
            keep.pop()
        pts = pts[keep]
        if len(pts) < 3:
            raise DegenerateGeometry("fewer than 3 distinct vertices")

        # counterclockwise
        if _signed_area(pts) < 0.0:
            pts = pts[::-1].copy()

        # merge collinear continuations; flag zero-angle spikes
        out = []
        n = len(pts)
        for i in range(n):
            a, b, c = pts[(i - 1) % n], pts[i], pts[(i + 1) % n]
            cross = _orient(*a, *b, *c)
            l1 = math.hypot(*(b - a))
            l2 = math.hypot(*(c - b))
            if abs(cross) <= 1e-12 * l1 * l2:
                if (b - a) @ (c - b) < 0.0:
                    raise NotSimple(f"zero-angle spike at vertex {i}")
                continue  # straight continuation, drop b
            out.append(b)
        pts = np.asarray(out)
        if len(pts) < 3:
            raise DegenerateGeometry("polygon collapsed after collinear merge")

        self.vertices = pts
        self._check_simple()
        self.area = _signed_area(pts)
        self.perimeter = float(
            sum(math.hypot(*(pts[(i + 1) % len(pts)] - pts[i])) for i in range(len(pts)))
        )
        self.bbox = (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def _check_simple(self):
        pts = self.vertices
        n = len(pts)
        scale = max(self.bbox_diag_static(pts), 1e-300)
        tol = 1e-12 * scale * scale
        touch_tol = 1e-12 * scale
        for i in range(n):
            a1, a2 = pts[i], pts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                b1, b2 = pts[j], pts[(j + 1) % n]
                if _segments_cross(a1, a2, b1, b2, tol):
                    raise NotSimple(f"edges {i} and {j} cross")
                # non-adjacent edges must not even touch
                for p in (b1, b2):
                    if _seg_point_dist(*p, *a1, *a2) <= touch_tol:
                        raise NotSimple(f"vertex touches edge {i}")
                for p in (a1, a2):
                    if _seg_point_dist(*p, *b1, *b2) <= touch_tol:
                        raise NotSimple(f"vertex touches edge {j}")

    @staticmethod
    def bbox_diag_static(pts):
        return float(
            math.hypot(
                pts[:, 0].max() - pts[:, 0].min(), pts[:, 1].max() - pts[:, 1].min()
            )
        )

    @property
    def bbox_diag(self):
        return math.hypot(self.bbox[2] - self.bbox[0], self.bbox[3] - self.bbox[1])

    def __len__(self):
        return len(self.vertices)

    def point(self, i) -> Point:
        v = self.vertices[i % len(self.vertices)]
        return Point(float(v[0]), float(v[1]))

    def edges(self):
        n = len(self.vertices)
        return [(self.point(i), self.point(i + 1)) for i in range(n)]

    def boundary_distance(self, p) -> float:
        px, py = p
        return min(
            _seg_point_dist(px, py, *a, *b) for a, b in self.edges()
        )

    def contains(self, p, eps: float) -> str:
        """'inside', 'boundary' (within eps of an edge), or 'outside'."""
        if self.boundary_distance(p) <= eps:
            return "boundary"
        px, py = p
        crossings = 0
        pts = self.vertices
        n = len(pts)
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            if (y1 > py) != (y2 > py):
                xs = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if xs > px:
                    crossings += 1
        return "inside" if crossings % 2 else "outside"

    def interior_angle(self, i) -> float:
        """Angle swept inside the polygon at vertex i, in (0, 2*pi)."""
        v = self.vertices[i % len(self.vertices)]
        nxt = self.vertices[(i + 1) % len(self.vertices)]
        prv = self.vertices[(i - 1) % len(self.vertices)]
        a_next = math.atan2(nxt[1] - v[1], nxt[0] - v[0])
        a_prev = math.atan2(prv[1] - v[1], prv[0] - v[0])
        ang = (a_prev - a_next) % TWO_PI
        return ang if ang > 0.0 else TWO_PI

    def triangulate(self):
        """Ear-clipping triangulation; returns vertex index triples."""
        pts = self.vertices
        idx = list(range(len(pts)))
        tris = []
        scale = self.bbox_diag
        area_tol = 1e-14 * scale * scale
        guard = 0
        while len(idx) > 3:
            guard += 1
            if guard > 2 * len(pts) * len(pts):
                raise DegenerateGeometry("ear clipping failed to converge")
            n = len(idx)
            clipped = False
            for k in range(n):
                i0, i1, i2 = idx[(k - 1) % n], idx[k], idx[(k + 1) % n]
                a, b, c = pts[i0], pts[i1], pts[i2]
                if _orient(*a, *b, *c) <= area_tol:
                    continue  # reflex or flat corner
                ok = True
                for j in idx:
                    if j in (i0, i1, i2):
                        continue
                    p = pts[j]
                    if (
                        _orient(*a, *b, *p) >= -area_tol
                        and _orient(*b, *c, *p) >= -area_tol
                        and _orient(*c, *a, *p) >= -area_tol
                    ):
                        ok = False
                        break
                if ok:
                    tris.append((i0, i1, i2))
                    idx.pop(k)
                    clipped = True
                    break
            if not clipped:
                raise DegenerateGeometry("no ear found; polygon may be degenerate")
        tris.append(tuple(idx))
        return tris


def _signed_area(pts) -> float:
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def points_in_polygon(poly: Polygon, xy) -> np.ndarray:
    """Vectorized crossing-number test; boundary points land on either side."""
    xy = np.asarray(xy, dtype=float)
    px = xy[:, 0][:, None]
    py = xy[:, 1][:, None]
    v = poly.vertices
    x1 = v[None, :, 0]
    y1 = v[None, :, 1]
    x2 = np.roll(v[:, 0], -1)[None, :]
    y2 = np.roll(v[:, 1], -1)[None, :]
    straddle = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    hits = straddle & (xs > px)
    return (hits.sum(axis=1) % 2).astype(bool)


def as_axis_rectangle(poly: Polygon):
    """(x0, y0, width, height) when the polygon is an axis-aligned rectangle."""
    if len(poly) != 4:
        return None
    v = poly.vertices
    tol = 1e-12 * max(poly.bbox_diag, 1e-300)
    for i in range(4):
        dx = abs(v[(i + 1) % 4, 0] - v[i, 0])
        dy = abs(v[(i + 1) % 4, 1] - v[i, 1])
        if dx > tol and dy > tol:
            return None
    x0, y0, x1, y1 = poly.bbox
    return (x0, y0, x1 - x0, y1 - y0)


# ---------------------------------------------------------------------------
# domain pairs


@dataclass(frozen=True)
class Edge:
    a: Point
    b: Point
    a_idx: int
    b_idx: int
    kind: EdgeKind

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)

    def direction(self):
        L = self.length
        return ((self.b.x - self.a.x) / L, (self.b.y - self.a.y) / L)


@dataclass
class DomainPair:
    outer: Polygon
    inner: Polygon
    eps: float
    edges: list
    vertices: list  # boundary vertices of the inner region, in boundary order


def build_domain_pair(outer_vertices, inner_vertices, eps: float | None = None) -> DomainPair:
    """Assemble and validate a region inside a reflecting polygonal domain.

    The inner boundary is split at every outer vertex lying on it, and each
    resulting sub-edge is tagged as lying on the outer boundary (reflecting)
    or strictly interior (open). eps defaults to 1e-9 times the outer bounding
    box diagonal and controls every on-boundary decision.
    """
    outer = Polygon(outer_vertices)
    inner = Polygon(inner_vertices)
    if eps is None:
        eps = 1e-9 * outer.bbox_diag
    if not 0.0 < eps < 1e-2 * outer.bbox_diag:
        raise DegenerateGeometry(f"eps {eps} unreasonable for this geometry")

    # containment: vertices, then proper edge crossings, then edge samples
    for i in range(len(inner)):
        if outer.contains(inner.point(i), eps) == "outside":
            raise NotContained(f"inner vertex {i} lies outside")
    o_pts = outer.vertices
    i_pts = inner.vertices
    scale = outer.bbox_diag
    cross_tol = 1e-12 * scale * scale
    for i in range(len(inner)):
        a = i_pts[i]
        b = i_pts[(i + 1) % len(inner)]
        for j in range(len(outer)):
            c = o_pts[j]
            d = o_pts[(j + 1) % len(outer)]
            if _segments_cross(a, b, c, d, cross_tol):
                raise NotContained(f"inner edge {i} crosses outer edge {j}")
        for s in (0.25, 0.5, 0.75):
            p = (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
            if outer.contains(p, eps) == "outside":
                raise NotContained(f"inner edge {i} leaves the outer polygon")

    # boundary vertex set: inner vertices plus outer vertices on the inner boundary
    verts: list[Point] = []
    inserts: dict[int, list[tuple[float, Point]]] = {}
    for j in range(len(outer)):
        w = outer.point(j)
        if inner.boundary_distance(w) > eps:
            continue
        if any(math.hypot(w.x - q[0], w.y - q[1]) <= eps for q in i_pts):
            continue  # coincides with an inner vertex
        for i in range(len(inner)):
            a = i_pts[i]
            b = i_pts[(i + 1) % len(inner)]
            if _seg_point_dist(w.x, w.y, *a, *b) <= eps:
                dx, dy = b[0] - a[0], b[1] - a[1]
                s = ((w.x - a[0]) * dx + (w.y - a[1]) * dy) / (dx * dx + dy * dy)
                if eps / max(1e-300, math.hypot(dx, dy)) < s < 1.0 - eps / max(
                    1e-300, math.hypot(dx, dy)
                ):
                    inserts.setdefault(i, []).append((s, w))
                    break

    edges: list[Edge] = []
    chain: list[Point] = []
    for i in range(len(inner)):
        chain.append(inner.point(i))
        for s, w in sorted(inserts.get(i, [])):
            chain.append(w)
    n = len(chain)
    verts = chain

    def _tag(a: Point, b: Point) -> EdgeKind:
        for j in range(len(outer)):
            c = outer.point(j)
            d = outer.point(j + 1)
            if (
                _seg_point_dist(a.x, a.y, c.x, c.y, d.x, d.y) <= eps
                and _seg_point_dist(b.x, b.y, c.x, c.y, d.x, d.y) <= eps
            ):
                return EdgeKind.NEUMANN
        clear = True
        for s in (0.25, 0.5, 0.75):
            p = (a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
            if outer.boundary_distance(p) <= eps:
                clear = False
                break
        if clear:
            return EdgeKind.OPEN
        raise AmbiguousEdge(
            f"edge ({a.x:.6g},{a.y:.6g})-({b.x:.6g},{b.y:.6g}) skims the outer "
            "boundary without lying on a single outer edge"
        )

    for i in range(n):
        a = chain[i]
        b = chain[(i + 1) % n]
        edges.append(Edge(a, b, i, (i + 1) % n, _tag(a, b)))

    return DomainPair(outer=outer, inner=inner, eps=eps, edges=edges, vertices=verts)


# ---------------------------------------------------------------------------
# vertex classification


@dataclass(frozen=True)
class ClassifiedVertex:
    index: int
    location: Point
    kind: VertexKind
    base_angle: float
    wedges: tuple  # (lam, rho) pairs, angles relative to base_angle
    on_boundary: bool
    sigma: float | None = None
    gamma: float | None = None
    beta: float | None = None
    alpha: float | None = None
    orientation: NoonOrientation | None = None
    exterior_gaps: tuple = ()
    incident_edges: tuple = ()
    open_rays: int = 2

    @property
    def wedge_total(self) -> float:
        return sum(r - l for l, r in self.wedges)

    def sector_area(self, radius: float) -> float:
        return 0.5 * self.wedge_total * radius * radius

    def angles(self) -> tuple:
        if self.kind is VertexKind.OPEN:
            return (self.gamma,)
        if self.kind is VertexKind.NN:
            return (self.gamma,)
        if self.kind is VertexKind.NON:
            return (self.gamma, self.beta)
        if self.kind is VertexKind.NOON:
            return (self.gamma, self.beta, self.alpha)
        return (self.sigma,) + tuple(a for w in self.wedges for a in w)


def _match_wedges(sigma: float, wedges, edge_kinds, angle_tol: float):
    """Map an occupancy pattern to a vertex kind.

    wedges: ordered (lam, rho) intervals of the opening [0, sigma] covered by
    the region; edge_kinds: map from each wedge endpoint angle to the kind of
    the incident edge there. Returns (kind, gamma, beta, alpha, orientation)
    or raises UnsupportedVertex when the pattern has no single-vertex name.
    """
    def at(v, target):
        return abs(v - target) <= angle_tol

    def kind_at(ang):
        for a, k in edge_kinds:
            if at(ang, a):
                return k
        return None

    if len(wedges) == 1:
        lo, hi = wedges[0]
        left_kind = kind_at(lo)
        right_kind = kind_at(hi)
        if at(lo, 0.0) and at(hi, sigma):
            if left_kind is not EdgeKind.NEUMANN or right_kind is not EdgeKind.NEUMANN:
                raise UnsupportedVertex("full opening bounded by non-reflecting edges")
            return (VertexKind.NN, sigma, None, None, None)
        if at(lo, 0.0):
            if left_kind is not EdgeKind.NEUMANN or right_kind is not EdgeKind.OPEN:
                raise UnsupportedVertex("half-open wedge with inconsistent edge kinds")
            return (VertexKind.NON, hi, sigma - hi, None, None)
        if at(hi, sigma):
            if right_kind is not EdgeKind.NEUMANN or left_kind is not EdgeKind.OPEN:
                raise UnsupportedVertex("half-open wedge with inconsistent edge kinds")
            return (VertexKind.NON, sigma - lo, lo, None, None)
        if left_kind is not EdgeKind.OPEN or right_kind is not EdgeKind.OPEN:
            raise UnsupportedVertex("interior wedge with reflecting sides")
        return (
            VertexKind.NOON,
            hi - lo,
            sigma - hi,
            lo,
            NoonOrientation.MIDDLE_INTERIOR,
        )
    if len(wedges) == 2:
        (l1, r1), (l2, r2) = wedges
        if at(l1, 0.0) and at(r2, sigma):
            if kind_at(l1) is EdgeKind.NEUMANN and kind_at(r2) is EdgeKind.NEUMANN \
                    and kind_at(r1) is EdgeKind.OPEN and kind_at(l2) is EdgeKind.OPEN:
                return (
                    VertexKind.NOON,
                    l2 - r1,
                    sigma - l2,
                    r1,
                    NoonOrientation.FLANKS_INTERIOR,
                )
    return (VertexKind.GENERALIZED, None, None, None, None)


def classify_vertices(pair: DomainPair, allow_generalized: bool = False):
    """Classify every boundary vertex of the region by its wedge pattern."""
    out = []
    outer, inner, eps = pair.outer, pair.inner, pair.eps
    incident: dict[int, list] = {}
    for e_i, e in enumerate(pair.edges):
        incident.setdefault(e.a_idx, []).append(e_i)
        incident.setdefault(e.b_idx, []).append(e_i)

    inner_pts = inner.vertices

    for v_i, v in enumerate(pair.vertices):
        edge_ids = tuple(sorted(incident.get(v_i, ())))
        inc = [pair.edges[e_i] for e_i in edge_ids]
        min_len = min(e.length for e in inc)
        on_bdry = outer.boundary_distance(v) <= eps

        if not on_bdry:
            if len(inc) != 2 or any(e.kind is not EdgeKind.OPEN for e in inc):
                raise UnsupportedVertex(
                    f"interior vertex {v_i} must join exactly two open edges"
                )
            match = [
                i for i in range(len(inner_pts))
                if math.hypot(v.x - inner_pts[i, 0], v.y - inner_pts[i, 1]) <= eps
            ]
            if not match:
                raise UnsupportedVertex(f"interior vertex {v_i} is not a region corner")
            i = match[0]
            gamma = inner.interior_angle(i)
            nxt = inner.point(i + 1)
            base = math.atan2(nxt.y - v.y, nxt.x - v.x)
            out.append(
                ClassifiedVertex(
                    index=v_i,
                    location=v,
                    kind=VertexKind.OPEN,
                    base_angle=base,
                    wedges=((0.0, gamma),),
                    on_boundary=False,
                    gamma=gamma,
                    incident_edges=edge_ids,
                    open_rays=2,
                )
            )
            continue

        # opening of the outer boundary at this point
        o_pts = outer.vertices
        o_match = [
            j for j in range(len(o_pts))
            if math.hypot(v.x - o_pts[j, 0], v.y - o_pts[j, 1]) <= eps
        ]
        if o_match:
            j = o_match[0]
            sigma = outer.interior_angle(j)
            nxt = outer.point(j + 1)
            base = math.atan2(nxt.y - v.y, nxt.x - v.x)
        else:
            sigma = math.pi
            hit = None
            for a, b in outer.edges():
                if _seg_point_dist(v.x, v.y, a.x, a.y, b.x, b.y) <= eps:
                    hit = (a, b)
                    break
            if hit is None:
                raise UnsupportedVertex(f"vertex {v_i} floats near the outer boundary")
            a, b = hit
            base = math.atan2(b.y - a.y, b.x - a.x)

        angle_tol = max(1e-9, 4.0 * eps / min_len)

        rays = []
        for e_i in edge_ids:
            e = pair.edges[e_i]
            other = e.b if e.a_idx == v_i else e.a
            phi = (math.atan2(other.y - v.y, other.x - v.x) - base) % TWO_PI
            if phi > sigma + angle_tol and phi > TWO_PI - angle_tol:
                phi = 0.0
            if phi > sigma + angle_tol:
                raise UnsupportedVertex(
                    f"edge at vertex {v_i} leaves the outer opening"
                )
            phi = min(max(phi, 0.0), sigma)
            if abs(phi) <= angle_tol:
                phi = 0.0
            if abs(phi - sigma) <= angle_tol:
                phi = sigma
            rays.append((phi, e.kind))
        rays.sort()
        for (p1, _), (p2, _) in zip(rays, rays[1:]):
            if p2 - p1 <= angle_tol:
                raise UnsupportedVertex(f"coincident edges at vertex {v_i}")

        # occupancy probe between consecutive rays (and against 0 / sigma)
        bounds = [0.0] + [p for p, _ in rays] + [sigma]
        bounds = sorted(set(bounds))
        r_probe = 1e-3 * min_len
        occupied = []
        for lo, hi in zip(bounds, bounds[1:]):
            if hi - lo <= angle_tol:
                continue
            mid = base + 0.5 * (lo + hi)
            state = None
            r = r_probe
            for _ in range(4):
                p = (v.x + r * math.cos(mid), v.y + r * math.sin(mid))
                state = inner.contains(p, 0.1 * min(eps, r))
                if state != "boundary":
                    break
                r *= 3.0
            if state == "boundary":
                raise UnsupportedVertex(f"occupancy probe stuck on boundary at vertex {v_i}")
            occupied.append((lo, hi, state == "inside"))

        wedges = []
        for lo, hi, occ in occupied:
            if not occ:
                continue
            if wedges and abs(wedges[-1][1] - lo) <= angle_tol:
                raise UnsupportedVertex(
                    f"region covers both sides of an edge at vertex {v_i}"
                )
            wedges.append((lo, hi))
        if not wedges:
            raise UnsupportedVertex(f"region vanishes at its own vertex {v_i}")

        # every wedge side must be an actual incident edge (0/sigma sides must
        # be reflecting edges, which the splitting step guarantees exist)
        ray_angles = [p for p, _ in rays]
        for lo, hi in wedges:
            for side in (lo, hi):
                if not any(abs(side - p) <= angle_tol for p in ray_angles):
                    raise UnsupportedVertex(
                        f"wedge side at vertex {v_i} has no incident edge"
                    )

        kind, gamma, beta, alpha, orientation = _match_wedges(
            sigma, wedges, rays, angle_tol
        )
        if kind is VertexKind.GENERALIZED and not allow_generalized:
            raise UnsupportedVertex(
                f"vertex {v_i} has a generalized wedge pattern "
                f"({len(wedges)} wedges); enable generalized vertices to proceed"
            )

        gaps = []
        cursor = 0.0
        for lo, hi in wedges:
            if lo - cursor > angle_tol:
                gaps.append(lo - cursor)
            cursor = hi
        if sigma - cursor > angle_tol:
            gaps.append(sigma - cursor)

        open_rays = 2 * len(wedges)
        if abs(wedges[0][0]) <= angle_tol:
            open_rays -= 1
        if abs(wedges[-1][1] - sigma) <= angle_tol:
            open_rays -= 1

        out.append(
            ClassifiedVertex(
                index=v_i,
                location=v,
                kind=kind,
                base_angle=base,
                wedges=tuple(wedges),
                on_boundary=True,
                sigma=sigma,
                gamma=gamma,
                beta=beta,
                alpha=alpha,
                orientation=orientation,
                exterior_gaps=tuple(gaps),
                incident_edges=edge_ids,
                open_rays=open_rays,
            )
        )
    return out


# ---------------------------------------------------------------------------
# partition into model pieces


def cusp_area(R: float, delta: float) -> float:
    """Area of {0 < x < R, 0 < y < delta, x^2 + y^2 > R^2}."""
    if not (R > 0.0 and 0.0 < delta <= R):
        raise InvalidDims(f"need 0 < delta <= R, got R={R}, delta={delta}")
    return (
        R * delta
        - 0.5 * delta * math.sqrt(R * R - delta * delta)
        - 0.5 * R * R * math.asin(delta / R)
    )


@dataclass(frozen=True)
class SectorPiece:
    vertex: ClassifiedVertex
    radius: float

    @property
    def area(self) -> float:
        return self.vertex.sector_area(self.radius)

    def contains(self, p) -> bool:
        v = self.vertex.location
        dx, dy = p[0] - v.x, p[1] - v.y
        if math.hypot(dx, dy) >= self.radius:
            return False
        phi = (math.atan2(dy, dx) - self.vertex.base_angle) % TWO_PI
        return any(l < phi < r for l, r in self.vertex.wedges)


@dataclass(frozen=True)
class RectanglePiece:
    edge: Edge
    width: float
    height: float
    kind: EdgeKind
    inset: float  # distance from each edge endpoint (the sector radius)

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, p) -> bool:
        a = self.edge.a
        tx, ty = self.edge.direction()
        xi = (p[0] - a.x) * tx + (p[1] - a.y) * ty
        eta = -(p[0] - a.x) * ty + (p[1] - a.y) * tx
        return self.inset < xi < self.inset + self.width and 0.0 < eta < self.height


@dataclass(frozen=True)
class CuspPiece:
    vertex: Point
    edge: Edge
    radius: float
    height: float
    kind: EdgeKind

    @property
    def area(self) -> float:
        return cusp_area(self.radius, self.height)

    def contains(self, p) -> bool:
        tx, ty = self.edge.direction()
        if (self.vertex.x, self.vertex.y) == (self.edge.b.x, self.edge.b.y):
            ax, ay = -tx, -ty
        else:
            ax, ay = tx, ty
        xi = (p[0] - self.vertex.x) * ax + (p[1] - self.vertex.y) * ay
        eta = -(p[0] - self.vertex.x) * ty + (p[1] - self.vertex.y) * tx
        return (
            0.0 < xi < self.radius
            and 0.0 < eta < self.height
            and xi * xi + eta * eta > self.radius * self.radius
        )


@dataclass(frozen=True)
class CorePiece:
    area: float

    def contains(self, p) -> bool:  # decided by elimination in the checks
        return False


@dataclass
class PartitionSpec:
    R: float
    R1: float
    R2: float
    delta: float
    delta1: float
    delta2: float | None
    pieces: list
    classified: list


def partition(pair: DomainPair, allow_generalized: bool = False) -> PartitionSpec:
    """Cut the region into sectors, edge strips, cusps, and a core.

    The sector radius R is half the closest distance among all vertices (both
    polygons pooled), shrunk further so open corners stay clear of the outer
    boundary; the strip height delta is R scaled by the worst sine among
    region corner half-angles and exterior gap half-angles.
    """
    classified = classify_vertices(pair, allow_generalized)
    eps = pair.eps

    pool = [(
        float(p[0]), float(p[1])
    ) for p in pair.vertices]
    for j in range(len(pair.outer)):
        w = pair.outer.point(j)
        if all(math.hypot(w.x - q[0], w.y - q[1]) > eps for q in pool):
            pool.append((w.x, w.y))
    r1 = 0.5 * min(
        math.hypot(p[0] - q[0], p[1] - q[1])
        for i, p in enumerate(pool)
        for q in pool[i + 1:]
    )
    open_dists = [
        pair.outer.boundary_distance(cv.location)
        for cv in classified
        if not cv.on_boundary
    ]
    r2 = 0.5 * min(open_dists) if open_dists else math.inf
    R = min(r1, r2)
    if not R > 10.0 * eps:
        raise DegenerateGeometry(f"sector radius {R} collapses at eps {eps}")

    sin1 = min(
        math.sin(0.5 * min(pair.inner.interior_angle(i), TWO_PI))
        for i in range(len(pair.inner))
    )
    delta1 = R * sin1
    gap_sines = [
        math.sin(0.5 * g) for cv in classified for g in cv.exterior_gaps
    ]
    delta2 = R * min(gap_sines) if gap_sines else None
    delta = min(delta1, delta2) if delta2 is not None else delta1
    if not delta > 0.0:
        raise DegenerateGeometry("strip height collapsed to zero")

    pieces: list = []
    for cv in classified:
        pieces.append(SectorPiece(vertex=cv, radius=R))
    for e in pair.edges:
        w = e.length - 2.0 * R
        if w < -eps:
            raise DegenerateGeometry(
                f"edge of length {e.length} shorter than two sector radii"
            )
        pieces.append(
            RectanglePiece(edge=e, width=max(w, 0.0), height=delta, kind=e.kind, inset=R)
        )
        for v_pt in (e.a, e.b):
            pieces.append(
                CuspPiece(vertex=v_pt, edge=e, radius=R, height=delta, kind=e.kind)
            )
    covered = sum(p.area for p in pieces)
    core = pair.inner.area - covered
    if core < -1e-9 * pair.inner.area:
        raise DegenerateGeometry(f"piece areas exceed the region area by {-core}")
    pieces.append(CorePiece(area=core))

    return PartitionSpec(
        R=R,
        R1=r1,
        R2=r2,
        delta=delta,
        delta1=delta1,
        delta2=delta2,
        pieces=pieces,
        classified=classified,
    )
