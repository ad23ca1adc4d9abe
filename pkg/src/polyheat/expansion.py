"""Assemble the small-time heat content expansion and its self-consistency checks.

The expansion of the heat content of a region inside a reflecting polygonal
domain reads

    area - (open boundary length) / sqrt(pi) * sqrt(t) + (corner sum) * t

up to exponentially small remainders. The corner sum collects one coefficient
per region vertex according to its classification. The checks in this module
re-derive the same three numbers by different routes: summing the model pieces
of the radius-R partition, swapping the region for its complement (which must
flip nothing at orders sqrt(t) and t), and unfolding across a reflecting side
(which must exactly double everything).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import MultiPolygon as _ShMulti
from shapely.geometry import Polygon as _ShPolygon

from .corners import (
    DEFAULT_QUAD,
    CoefficientValue,
    QuadratureSpec,
    coeff_a,
    coeff_b,
    coeff_c,
    cusp_term,
    generalized_vertex_coeff,
)
from .geometry import (
    ClassifiedVertex,
    CorePiece,
    CuspPiece,
    DomainPair,
    EdgeKind,
    Point,
    RectanglePiece,
    SectorPiece,
    VertexKind,
    as_axis_rectangle,
    build_domain_pair,
    classify_vertices,
    partition,
)

SQRT_PI = math.sqrt(math.pi)


class CancellationFailure(Exception):
    """Piece-sum identity failed beyond tolerance."""


class ComplementNotPolygonal(Exception):
    """Outer-minus-inner is not a single simple polygon."""


class NotRectangle(Exception):
    """Operation requires an axis-aligned rectangular outer domain."""


class UnknownPieceKind(Exception):
    """Partition piece not in the model catalogue."""


@dataclass(frozen=True)
class VertexTerm:
    kind: str
    location: Point
    angles: tuple
    value: float
    err: float


@dataclass(frozen=True)
class ExpansionCoefficients:
    c0: float
    c_half: float
    c1: float
    c1_err: float
    per_vertex: tuple


def expansion_coefficients(
    pair: DomainPair,
    spec: QuadratureSpec = DEFAULT_QUAD,
    allow_generalized: bool = False,
) -> ExpansionCoefficients:
    """Constant, sqrt(t), and t coefficients for a classified domain pair."""
    classified = classify_vertices(pair, allow_generalized)
    c0 = pair.inner.area
    open_len = sum(e.length for e in pair.edges if e.kind is EdgeKind.OPEN)
    c_half = -open_len / SQRT_PI

    terms = []
    c1 = 0.0
    c1_err = 0.0
    for cv in classified:
        val = _vertex_coefficient(cv, spec)
        terms.append(
            VertexTerm(
                kind=cv.kind.value,
                location=cv.location,
                angles=cv.angles(),
                value=val.value,
                err=val.err_est,
            )
        )
        c1 += val.value
        c1_err += val.err_est
    return ExpansionCoefficients(
        c0=c0, c_half=c_half, c1=c1, c1_err=c1_err, per_vertex=tuple(terms)
    )


def _vertex_coefficient(cv: ClassifiedVertex, spec: QuadratureSpec) -> CoefficientValue:
    if cv.kind is VertexKind.OPEN:
        return coeff_a(cv.gamma, spec)
    if cv.kind is VertexKind.NN:
        return CoefficientValue(0.0, 0.0)
    if cv.kind is VertexKind.NON:
        return coeff_b(cv.gamma, cv.beta, spec)
    if cv.kind is VertexKind.NOON:
        return coeff_c(cv.gamma, cv.beta, cv.alpha, spec)
    if cv.kind is VertexKind.GENERALIZED:
        rays, val = generalized_vertex_coeff(cv.sigma, cv.wedges, spec)
        if rays != cv.open_rays:
            raise CancellationFailure(
                f"open ray count mismatch at vertex {cv.index}: "
                f"classifier says {cv.open_rays}, coefficient says {rays}"
            )
        return val
    raise UnknownPieceKind(f"vertex kind {cv.kind!r}")


def eval_expansion(coeffs: ExpansionCoefficients, t):
    """Evaluate c0 + c_half sqrt(t) + c1 t (t may be an array)."""
    t = np.asarray(t, dtype=float)
    out = coeffs.c0 + coeffs.c_half * np.sqrt(t) + coeffs.c1 * t
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# model pieces


@dataclass(frozen=True)
class PieceContribution:
    piece: object
    area: float
    t_half_coeff: float
    t_coeff: float
    cusp_sign: int
    cusp_value: float  # evaluated remainder magnitude at the requested time
    value: float  # full model value at the requested time

    @property
    def terms(self):
        return (self.area, self.t_half_coeff, self.t_coeff, self.cusp_sign)


def model_piece_contribution(
    piece,
    R: float,
    delta: float,
    t: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> PieceContribution:
    """Heat content of one partition piece in the model expansion.

    Each piece contributes area + t_half * sqrt(t) + t_coeff * t plus a signed
    multiple of the circular-arc remainder at radius R. Reflecting pieces keep
    their full mass at this order; open pieces lose boundary mass; sectors at
    region corners carry the corner coefficient and over-count the arc
    exchange that their flanking cusps pay back.
    """
    t_half = 0.0
    t_co = 0.0
    t_err = 0.0
    sign = 0
    if isinstance(piece, CorePiece):
        area = piece.area
    elif isinstance(piece, RectanglePiece):
        area = piece.area
        if piece.kind is EdgeKind.OPEN:
            t_half = -piece.width / SQRT_PI
    elif isinstance(piece, CuspPiece):
        area = piece.area
        if piece.kind is EdgeKind.OPEN:
            sign = -1
    elif isinstance(piece, SectorPiece):
        area = piece.area
        cv = piece.vertex
        coeff = _vertex_coefficient(cv, spec)
        t_half = -cv.open_rays * R / SQRT_PI
        t_co = coeff.value
        t_err = coeff.err_est
        sign = cv.open_rays
    else:
        raise UnknownPieceKind(f"piece {type(piece).__name__}")
    e_val = cusp_term(R, t, spec) if sign else 0.0
    value = area + t_half * math.sqrt(t) + t_co * t + sign * e_val
    return PieceContribution(
        piece=piece,
        area=area,
        t_half_coeff=t_half,
        t_coeff=t_co,
        cusp_sign=sign,
        cusp_value=e_val,
        value=value,
    )


@dataclass(frozen=True)
class PieceSumReport:
    ok: bool
    area_diff: float
    t_half_diff: float
    t_coeff_diff: float
    cusp_sign_total: int
    per_vertex_cusp: dict
    n_pieces: int
    R: float
    delta: float


def piece_sum_check(
    pair: DomainPair,
    spec: QuadratureSpec = DEFAULT_QUAD,
    allow_generalized: bool = False,
    t: float = 1e-3,
    tol: float = 1e-9,
) -> PieceSumReport:
    """Verify that the partition pieces reproduce the global expansion.

    Sums area, sqrt(t), and t coefficients over all model pieces and compares
    with expansion_coefficients; additionally checks that the signed arc
    corrections cancel within every vertex group. Raises CancellationFailure
    on any mismatch beyond tol.
    """
    parts = partition(pair, allow_generalized)
    coeffs = expansion_coefficients(pair, spec, allow_generalized)
    contribs = [
        model_piece_contribution(p, parts.R, parts.delta, t, spec)
        for p in parts.pieces
    ]

    area_sum = math.fsum(c.area for c in contribs)
    t_half_sum = math.fsum(c.t_half_coeff for c in contribs)
    t_coeff_sum = math.fsum(c.t_coeff for c in contribs)
    sign_sum = sum(c.cusp_sign for c in contribs)

    per_vertex: dict = {}
    for c in contribs:
        if c.cusp_sign == 0:
            continue
        if isinstance(c.piece, SectorPiece):
            key = (c.piece.vertex.location.x, c.piece.vertex.location.y)
        else:
            key = (c.piece.vertex.x, c.piece.vertex.y)
        per_vertex[key] = per_vertex.get(key, 0) + c.cusp_sign

    scale = max(1.0, abs(coeffs.c0))
    area_diff = abs(area_sum - coeffs.c0)
    t_half_diff = abs(t_half_sum - coeffs.c_half)
    t_coeff_diff = abs(t_coeff_sum - coeffs.c1)
    bad_vertices = {k: v for k, v in per_vertex.items() if v != 0}

    ok = (
        area_diff <= tol * scale
        and t_half_diff <= tol * max(1.0, abs(coeffs.c_half))
        and t_coeff_diff <= max(tol, 4.0 * coeffs.c1_err)
        and sign_sum == 0
        and not bad_vertices
    )
    report = PieceSumReport(
        ok=ok,
        area_diff=area_diff,
        t_half_diff=t_half_diff,
        t_coeff_diff=t_coeff_diff,
        cusp_sign_total=sign_sum,
        per_vertex_cusp=per_vertex,
        n_pieces=len(contribs),
        R=parts.R,
        delta=parts.delta,
    )
    if not ok:
        raise CancellationFailure(
            f"piece sum mismatch: area {area_diff:.3e}, sqrt-t {t_half_diff:.3e}, "
            f"t {t_coeff_diff:.3e}, uncancelled vertices {bad_vertices}"
        )
    return report


# ---------------------------------------------------------------------------
# complement and unfolding checks


def _shapely_to_vertex_lists(geom):
    if isinstance(geom, _ShPolygon):
        comps = [geom]
    elif isinstance(geom, _ShMulti):
        comps = list(geom.geoms)
    else:
        raise ComplementNotPolygonal(f"unexpected geometry {geom.geom_type}")
    out = []
    for g in comps:
        if g.is_empty:
            continue
        if list(g.interiors):
            raise ComplementNotPolygonal("geometry has holes")
        coords = list(g.exterior.coords)[:-1]
        out.append(coords)
    if not out:
        raise ComplementNotPolygonal("geometry is empty")
    return out


def expansion_for_components(
    outer_vertices,
    inner_vertex_lists,
    spec: QuadratureSpec = DEFAULT_QUAD,
    eps: float | None = None,
    allow_generalized: bool = False,
) -> ExpansionCoefficients:
    """Sum the expansion over several disjoint inner components.

    Components may touch each other (or themselves) only at isolated points;
    each is processed as its own domain pair against the shared outer domain
    and the coefficients add.
    """
    c0 = c_half = c1 = c1_err = 0.0
    per_vertex = []
    for verts in inner_vertex_lists:
        sub = build_domain_pair(outer_vertices, verts, eps=eps)
        co = expansion_coefficients(sub, spec, allow_generalized)
        c0 += co.c0
        c_half += co.c_half
        c1 += co.c1
        c1_err += co.c1_err
        per_vertex.extend(co.per_vertex)
    return ExpansionCoefficients(
        c0=c0, c_half=c_half, c1=c1, c1_err=c1_err, per_vertex=tuple(per_vertex)
    )


@dataclass(frozen=True)
class IsoflowReport:
    ok: bool
    coeffs: ExpansionCoefficients
    complement_coeffs: ExpansionCoefficients
    c_half_diff: float
    c1_diff: float
    area_closure: float


def isoflow_check(
    pair: DomainPair,
    spec: QuadratureSpec = DEFAULT_QUAD,
    tol: float = 1e-8,
) -> IsoflowReport:
    """Heat flows out of the region exactly as it flows into the complement.

    Replacing the region by outer-minus-region must leave the sqrt(t) and t
    coefficients unchanged (the constant term becomes the complement area).
    The complement is required to be a single hole-free polygon.
    """
    sh_outer = _ShPolygon(pair.outer.vertices)
    sh_inner = _ShPolygon(pair.inner.vertices)
    comp = sh_outer.difference(sh_inner)
    lists = _shapely_to_vertex_lists(comp)
    if len(lists) != 1:
        raise ComplementNotPolygonal(
            f"complement splits into {len(lists)} components"
        )
    comp_pair = build_domain_pair(
        pair.outer.vertices, lists[0], eps=pair.eps
    )
    co1 = expansion_coefficients(pair, spec)
    co2 = expansion_coefficients(comp_pair, spec)
    c_half_diff = abs(co1.c_half - co2.c_half)
    c1_diff = abs(co1.c1 - co2.c1)
    area_closure = abs(co1.c0 + co2.c0 - pair.outer.area)
    ok = (
        c_half_diff <= tol
        and c1_diff <= max(tol, 4.0 * (co1.c1_err + co2.c1_err))
        and area_closure <= tol * max(1.0, pair.outer.area)
    )
    return IsoflowReport(
        ok=ok,
        coeffs=co1,
        complement_coeffs=co2,
        c_half_diff=c_half_diff,
        c1_diff=c1_diff,
        area_closure=area_closure,
    )


@dataclass(frozen=True)
class ReflectReport:
    ok: bool
    coeffs: ExpansionCoefficients
    doubled_coeffs: ExpansionCoefficients
    c0_diff: float
    c_half_diff: float
    c1_diff: float
    n_components: int


def reflect_and_double(
    pair: DomainPair,
    edge_index: int,
    spec: QuadratureSpec = DEFAULT_QUAD,
    tol: float = 1e-8,
) -> ReflectReport:
    """Unfold a rectangular domain across one reflecting side.

    Mirrors both the rectangle and the region across the line carrying outer
    edge edge_index and compares the expansion of the doubled configuration
    against twice the original. Reflection is a symmetry of the heat flow, so
    every coefficient must double exactly.
    """
    rect = as_axis_rectangle(pair.outer)
    if rect is None:
        raise NotRectangle("outer domain must be an axis-aligned rectangle")
    x0, y0, w, h = rect
    edges = pair.outer.edges()
    if not 0 <= edge_index < len(edges):
        raise NotRectangle(f"edge index {edge_index} out of range")
    a, b = edges[edge_index]
    if abs(a.x - b.x) <= 1e-12 * max(w, h):  # vertical side x = const
        line_x = a.x
        if abs(line_x - x0) < abs(line_x - (x0 + w)):
            new_outer = [(x0 - w, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0 - w, y0 + h)]
            line_x = x0
        else:
            new_outer = [(x0, y0), (x0 + 2 * w, y0), (x0 + 2 * w, y0 + h), (x0, y0 + h)]
            line_x = x0 + w
        mirror = lambda p: (2.0 * line_x - p[0], p[1])
    else:  # horizontal side y = const
        line_y = a.y
        if abs(line_y - y0) < abs(line_y - (y0 + h)):
            new_outer = [(x0, y0 - h), (x0 + w, y0 - h), (x0 + w, y0 + h), (x0, y0 + h)]
            line_y = y0
        else:
            new_outer = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + 2 * h), (x0, y0 + 2 * h)]
            line_y = y0 + h
        mirror = lambda p: (p[0], 2.0 * line_y - p[1])

    inner_pts = [tuple(p) for p in pair.inner.vertices]
    mirrored = [mirror(p) for p in inner_pts][::-1]
    union = _ShPolygon(inner_pts).union(_ShPolygon(mirrored))
    lists = _shapely_to_vertex_lists(union)

    doubled = expansion_for_components(new_outer, lists, spec, eps=pair.eps)
    original = expansion_coefficients(pair, spec)

    c0_diff = abs(doubled.c0 - 2.0 * original.c0)
    c_half_diff = abs(doubled.c_half - 2.0 * original.c_half)
    c1_diff = abs(doubled.c1 - 2.0 * original.c1)
    ok = (
        c0_diff <= tol * max(1.0, 2.0 * abs(original.c0))
        and c_half_diff <= tol
        and c1_diff <= max(tol, 4.0 * (doubled.c1_err + 2.0 * original.c1_err))
    )
    return ReflectReport(
        ok=ok,
        coeffs=original,
        doubled_coeffs=doubled,
        c0_diff=c0_diff,
        c_half_diff=c_half_diff,
        c1_diff=c1_diff,
        n_components=len(lists),
    )
