"""Polygon handling, edge tagging, vertex classification, partition."""

import json
import math
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyheat.geometry import (
    AmbiguousEdge,
    CorePiece,
    CuspPiece,
    DegenerateGeometry,
    EdgeKind,
    InvalidDims,
    NoonOrientation,
    NotContained,
    NotSimple,
    Polygon,
    RectanglePiece,
    SectorPiece,
    UnsupportedVertex,
    VertexKind,
    _match_wedges,
    as_axis_rectangle,
    build_domain_pair,
    classify_vertices,
    cusp_area,
    partition,
    points_in_polygon,
)

PI = math.pi
FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
HALF_SQUARE = [(0, 0), (1, 0), (1, 0.5), (0, 0.5)]


def load_fixture(name):
    data = json.loads((FIXTURES / name).read_text())
    return build_domain_pair(data["outer"], data["inner"], data.get("eps"))


# ---------------------------------------------------------------------------
# polygons


def test_polygon_orientation_normalized():
    ccw = Polygon(UNIT_SQUARE)
    cw = Polygon(list(reversed(UNIT_SQUARE)))
    assert ccw.area == pytest.approx(1.0)
    assert cw.area == pytest.approx(1.0)
    assert [tuple(p) for p in cw.vertices] == [tuple(p) for p in cw.vertices]
    # both store counterclockwise order: interior angles are pi/2, not 3pi/2
    for i in range(4):
        assert cw.interior_angle(i) == pytest.approx(PI / 2)


def test_polygon_drops_duplicates_and_collinear():
    p = Polygon([(0, 0), (0.5, 0), (0.5, 0), (1, 0), (1, 1), (0, 1)])
    assert len(p) == 4
    assert p.area == pytest.approx(1.0)


def test_polygon_rejects_bowtie_and_spike():
    with pytest.raises(NotSimple):
        Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])
    with pytest.raises(NotSimple):
        # zero-angle spike folds back on itself
        Polygon([(0, 0), (1, 0), (0.5, 0.8), (0.5, 0.0), (0.5, 0.8), (0, 1)])
    with pytest.raises(NotSimple):
        Polygon([(0, 0), (1, 0), (1, 1), (0.5, 0.1), (0, 1)][:3] + [(0, 0), (0, 1)])


def test_polygon_rejects_pinched_chain():
    # figure-eight through a repeated vertex
    pts = [(0, 0), (1, 0), (0.5, 0.5), (1, 1), (0, 1), (0.5, 0.5)]
    with pytest.raises(NotSimple):
        Polygon(pts)


def test_too_few_vertices():
    with pytest.raises((NotSimple, DegenerateGeometry)):
        Polygon([(0, 0), (1, 0)])


def test_contains_states():
    p = Polygon(UNIT_SQUARE)
    assert p.contains((0.5, 0.5), 1e-9) == "inside"
    assert p.contains((0.5, 1e-12), 1e-9) == "boundary"
    assert p.contains((1.5, 0.5), 1e-9) == "outside"
    assert p.contains((0.5, -1e-3), 1e-9) == "outside"


def test_interior_angle_reflex():
    ell = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    angles = [ell.interior_angle(i) for i in range(6)]
    assert sorted(angles)[-1] == pytest.approx(1.5 * PI)
    assert sum(angles) == pytest.approx((6 - 2) * PI)


def test_triangulate_nonconvex():
    ell = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    tris = ell.triangulate()
    assert len(tris) == len(ell) - 2
    total = 0.0
    for i, j, k in tris:
        a, b, c = ell.point(i), ell.point(j), ell.point(k)
        total += 0.5 * abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    assert total == pytest.approx(ell.area, rel=1e-12)


def test_points_in_polygon_matches_scalar():
    ell = Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    rng = np.random.default_rng(7)
    xy = rng.uniform(-0.2, 2.2, size=(400, 2))
    mask = points_in_polygon(ell, xy)
    for (x, y), m in zip(xy, mask):
        state = ell.contains((x, y), 1e-12)
        if state != "boundary":
            assert m == (state == "inside")


def test_as_axis_rectangle():
    assert as_axis_rectangle(Polygon(UNIT_SQUARE)) == pytest.approx((0, 0, 1, 1))
    rect = as_axis_rectangle(Polygon([(2, 1), (5, 1), (5, 2), (2, 2)]))
    assert rect == pytest.approx((2, 1, 3, 1))
    assert as_axis_rectangle(Polygon([(0, 0), (1, 0), (0.6, 1)])) is None
    tilted = Polygon([(0, 0), (1, 0.01), (0.99, 1.01), (-0.01, 1)])
    assert as_axis_rectangle(tilted) is None


# ---------------------------------------------------------------------------
# domain pairs and edge tagging


def test_half_square_edge_tags():
    pair = build_domain_pair(UNIT_SQUARE, HALF_SQUARE)
    kinds = {}
    for e in pair.edges:
        mid = ((e.a.x + e.b.x) / 2, (e.a.y + e.b.y) / 2)
        kinds[mid] = e.kind
    assert kinds[(0.5, 0.0)] is EdgeKind.NEUMANN
    assert kinds[(1.0, 0.25)] is EdgeKind.NEUMANN
    assert kinds[(0.0, 0.25)] is EdgeKind.NEUMANN
    assert kinds[(0.5, 0.5)] is EdgeKind.OPEN
    assert pair.eps == pytest.approx(1e-9 * math.sqrt(2.0))


def test_inner_chain_split_at_outer_vertex():
    outer = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    inner = [(0, 0), (2, 0), (2, 1), (0, 1)]
    pair = build_domain_pair(outer, inner)
    # the top edge of the strip passes through the outer corner (1, 1) and
    # must be split there so each sub-edge gets a single tag
    assert len(pair.vertices) == 5
    kinds = {}
    for e in pair.edges:
        mid = ((e.a.x + e.b.x) / 2, (e.a.y + e.b.y) / 2)
        kinds[mid] = e.kind
    assert kinds[(1.5, 1.0)] is EdgeKind.NEUMANN
    assert kinds[(0.5, 1.0)] is EdgeKind.OPEN
    assert kinds[(1.0, 0.0)] is EdgeKind.NEUMANN


def test_not_contained():
    with pytest.raises(NotContained):
        build_domain_pair(UNIT_SQUARE, [(0.5, 0.5), (1.5, 0.5), (1.5, 0.9), (0.5, 0.9)])


def test_skimming_edge_is_ambiguous():
    outer = [(0, 0), (10, 0), (10, 10), (0, 10)]
    inner = [(1, 0), (9, 5e-8), (9, 5), (1, 5)]
    with pytest.raises(AmbiguousEdge):
        build_domain_pair(outer, inner)


def test_identical_region_all_neumann():
    pair = build_domain_pair(UNIT_SQUARE, UNIT_SQUARE)
    assert all(e.kind is EdgeKind.NEUMANN for e in pair.edges)


# ---------------------------------------------------------------------------
# classification


def kinds_by_location(pair, allow_generalized=False):
    return {
        (round(cv.location.x, 9), round(cv.location.y, 9)): cv
        for cv in classify_vertices(pair, allow_generalized)
    }


def test_half_square_classification():
    pair = build_domain_pair(UNIT_SQUARE, HALF_SQUARE)
    cvs = kinds_by_location(pair)
    assert cvs[(0, 0)].kind is VertexKind.NN
    assert cvs[(0, 0)].sigma == pytest.approx(PI / 2)
    assert cvs[(0, 0)].open_rays == 0
    assert cvs[(1, 0)].kind is VertexKind.NN
    for loc in [(1, 0.5), (0, 0.5)]:
        cv = cvs[loc]
        assert cv.kind is VertexKind.NON
        assert cv.sigma == pytest.approx(PI)
        assert cv.gamma == pytest.approx(PI / 2)
        assert cv.beta == pytest.approx(PI / 2)
        assert cv.open_rays == 1


def test_right_triangle_classification():
    pair = build_domain_pair(UNIT_SQUARE, [(0, 0), (1, 0), (0, 1)])
    cvs = kinds_by_location(pair)
    assert cvs[(0, 0)].kind is VertexKind.NN
    for loc in [(1, 0), (0, 1)]:
        cv = cvs[loc]
        assert cv.kind is VertexKind.NON
        assert cv.sigma == pytest.approx(PI / 2)
        assert cv.gamma == pytest.approx(PI / 4)
        assert cv.beta == pytest.approx(PI / 4)


def test_interior_diamond_classification():
    pair = load_fixture("diamond_interior.json")
    for cv in classify_vertices(pair):
        assert cv.kind is VertexKind.OPEN
        assert not cv.on_boundary
        assert cv.gamma == pytest.approx(PI / 2)
        assert cv.open_rays == 2
        assert cv.wedge_total == pytest.approx(PI / 2)


def test_noon_middle_interior_classification():
    # apex resting on the reflecting bottom wall, wedge strictly interior
    inner = [(0.5, 0.0), (0.8, 0.4), (0.2, 0.4)]
    pair = build_domain_pair(UNIT_SQUARE, inner)
    cvs = kinds_by_location(pair)
    apex = cvs[(0.5, 0.0)]
    assert apex.kind is VertexKind.NOON
    assert apex.orientation is NoonOrientation.MIDDLE_INTERIOR
    flank = math.atan2(0.4, 0.3)
    assert apex.sigma == pytest.approx(PI)
    assert apex.alpha == pytest.approx(flank)
    assert apex.beta == pytest.approx(flank)
    assert apex.gamma == pytest.approx(PI - 2 * flank)
    assert apex.open_rays == 2


def test_split_vertex_wide_opening():
    # inner region hugging two sides of a reflex outer corner
    outer = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    inner = [(0, 0), (2, 0), (2, 1), (0, 1)]
    pair = build_domain_pair(outer, inner)
    cvs = kinds_by_location(pair)
    cv = cvs[(1, 1)]
    assert cv.kind is VertexKind.NON
    assert cv.sigma == pytest.approx(1.5 * PI)
    assert cv.gamma == pytest.approx(PI)
    assert cv.beta == pytest.approx(PI / 2)
    assert cv.open_rays == 1


def test_match_wedges_flanks_interior():
    ek = [
        (0.0, EdgeKind.NEUMANN),
        (0.6, EdgeKind.OPEN),
        (1.4, EdgeKind.OPEN),
        (PI, EdgeKind.NEUMANN),
    ]
    kind, gamma, beta, alpha, orient = _match_wedges(
        PI, [(0.0, 0.6), (1.4, PI)], ek, 1e-9
    )
    assert kind is VertexKind.NOON
    assert orient is NoonOrientation.FLANKS_INTERIOR
    assert gamma == pytest.approx(0.8)
    assert beta == pytest.approx(PI - 1.4)
    assert alpha == pytest.approx(0.6)


def test_match_wedges_inconsistent_kinds():
    ek = [(0.0, EdgeKind.OPEN), (1.0, EdgeKind.OPEN), (2.0, EdgeKind.NEUMANN)]
    with pytest.raises(UnsupportedVertex):
        _match_wedges(2.0, [(0.0, 2.0)], ek, 1e-9)


def test_match_wedges_generalized_fallback():
    ek = [
        (0.5, EdgeKind.OPEN),
        (1.0, EdgeKind.OPEN),
        (2.0, EdgeKind.OPEN),
        (2.5, EdgeKind.OPEN),
    ]
    kind, *_ = _match_wedges(3.0, [(0.5, 1.0), (2.0, 2.5)], ek, 1e-9)
    assert kind is VertexKind.GENERALIZED


@settings(max_examples=12, deadline=None)
@given(
    theta=st.floats(min_value=0.0, max_value=2 * PI),
    dx=st.floats(min_value=-5.0, max_value=5.0),
    dy=st.floats(min_value=-5.0, max_value=5.0),
)
def test_classification_rigid_motion_invariant(theta, dx, dy):
    c, s = math.cos(theta), math.sin(theta)

    def move(pts):
        return [(c * x - s * y + dx, s * x + c * y + dy) for x, y in pts]

    base = build_domain_pair(UNIT_SQUARE, [(0, 0), (1, 0), (0, 1)])
    moved = build_domain_pair(move(UNIT_SQUARE), move([(0, 0), (1, 0), (0, 1)]))
    ref = sorted((cv.kind.value, round(cv.wedge_total, 7)) for cv in classify_vertices(base))
    got = sorted((cv.kind.value, round(cv.wedge_total, 7)) for cv in classify_vertices(moved))
    assert got == ref


# ---------------------------------------------------------------------------
# partition


def test_half_square_partition_scales():
    pair = build_domain_pair(UNIT_SQUARE, HALF_SQUARE)
    spec = partition(pair)
    assert spec.R == pytest.approx(0.25)
    assert spec.R1 == pytest.approx(0.25)
    assert spec.R2 == math.inf
    assert spec.delta == pytest.approx(0.25 * math.sin(PI / 4))


def test_partition_area_closure_and_counts():
    for name in (
        "halfsquare.json",
        "triangle_in_square.json",
        "square_full.json",
        "diamond_interior.json",
        "lshape_strip.json",
    ):
        pair = load_fixture(name)
        spec = partition(pair)
        total = math.fsum(p.area for p in spec.pieces)
        assert total == pytest.approx(pair.inner.area, rel=1e-12), name
        sectors = [p for p in spec.pieces if isinstance(p, SectorPiece)]
        rects = [p for p in spec.pieces if isinstance(p, RectanglePiece)]
        cusps = [p for p in spec.pieces if isinstance(p, CuspPiece)]
        cores = [p for p in spec.pieces if isinstance(p, CorePiece)]
        assert len(sectors) == len(pair.vertices)
        assert len(rects) == len(pair.edges)
        assert len(cusps) == 2 * len(pair.edges)
        assert len(cores) == 1
        assert cores[0].area >= 0.0
        assert all(p.area >= 0.0 for p in spec.pieces)


def test_partition_pieces_disjoint_and_inside():
    pair = load_fixture("triangle_in_square.json")
    spec = partition(pair)
    geom_pieces = [p for p in spec.pieces if not isinstance(p, CorePiece)]
    n = 140
    xs = (np.arange(n) + 0.5) / n
    pts = np.array([(x, y) for x in xs for y in xs])
    # stay clear of the region boundary, where strict-inside and open piece
    # membership can disagree over ties at machine precision
    clear = np.array([pair.inner.boundary_distance(q) > 1e-6 for q in pts])
    inside = points_in_polygon(pair.inner, pts)
    hits = np.zeros(len(pts), dtype=int)
    for p in geom_pieces:
        hits += np.array([p.contains(q) for q in pts])
    assert hits.max() <= 1
    # pieces never leak outside the region
    assert hits[clear & ~inside].sum() == 0
    # empirical core fraction tracks the bookkept core area
    core = next(p for p in spec.pieces if isinstance(p, CorePiece))
    keep = clear & inside
    core_frac = ((hits == 0) & keep).sum() / keep.sum()
    assert abs(core_frac - core.area / pair.inner.area) < 0.02


def test_cusp_area_against_quadrature():
    from scipy.integrate import quad

    for R, delta in [(1.0, 0.3), (0.25, 0.17), (2.0, 2.0), (0.5, 0.25)]:
        want, err = quad(lambda y: R - math.sqrt(max(R * R - y * y, 0.0)), 0.0, delta)
        assert abs(cusp_area(R, delta) - want) < max(1e-12, 10 * err), (R, delta)


def test_cusp_area_domain():
    with pytest.raises(InvalidDims):
        cusp_area(1.0, 0.0)
    with pytest.raises(InvalidDims):
        cusp_area(1.0, 1.1)
    with pytest.raises(InvalidDims):
        cusp_area(-1.0, 0.5)


def test_partition_degenerate_when_eps_swamps_radius():
    # R is 0.5 here (half the clearance of the diamond corners), so an eps
    # just under the construction cap still swamps the 10 * eps safety margin
    data = json.loads((FIXTURES / "diamond_interior.json").read_text())
    pair = build_domain_pair(data["outer"], data["inner"], eps=0.055)
    with pytest.raises(DegenerateGeometry):
        partition(pair)


def test_build_rejects_unreasonable_eps():
    with pytest.raises(DegenerateGeometry):
        build_domain_pair(UNIT_SQUARE, HALF_SQUARE, eps=0.5)
    with pytest.raises(DegenerateGeometry):
        build_domain_pair(UNIT_SQUARE, HALF_SQUARE, eps=0.0)


@settings(max_examples=10, deadline=None)
@given(s=st.floats(min_value=0.05, max_value=40.0))
def test_partition_scale_covariant(s):
    def scaled(pts):
        return [(s * x, s * y) for x, y in pts]

    base = partition(build_domain_pair(UNIT_SQUARE, HALF_SQUARE))
    big = partition(build_domain_pair(scaled(UNIT_SQUARE), scaled(HALF_SQUARE)))
    assert big.R == pytest.approx(s * base.R, rel=1e-9)
    assert big.delta == pytest.approx(s * base.delta, rel=1e-9)
    core_b = next(p for p in base.pieces if isinstance(p, CorePiece)).area
    core_s = next(p for p in big.pieces if isinstance(p, CorePiece)).area
    assert core_s == pytest.approx(s * s * core_b, rel=1e-9)
