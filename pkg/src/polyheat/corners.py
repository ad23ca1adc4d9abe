"""Corner coefficient functions for the t-order term of the heat content expansion.

Every wedge configuration that a polygon boundary can form inside a reflecting
polygonal domain contributes a coefficient given by a semi-infinite integral of
a ratio of hyperbolic functions (or a closed form in the lucky cases). This
module evaluates those integrals with certified truncation: the integrands are
kept in symbolic form (a combination of cosh/sinh terms over a product of
sinh/cosh factors), which makes the exponential decay rate and an explicit
envelope constant available, so the cutoff point and the tail bound come from
exponent bookkeeping instead of guesswork.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

PI = math.pi
HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi

# Direct hyperbolic evaluation is safe while the total denominator exponent
# stays below this; past it the scaled form (all exponents <= 0) takes over.
_EXP_SWITCH = 300.0

# Terms whose rates agree to this absolute tolerance are merged; coefficient
# sums below _COEF_DROP (relative to the total mass) are treated as exact
# cancellations. The raw coefficients are half-integers, so anything tiny
# after merging can only be a cancellation residue.
_RATE_MERGE = 1e-13
_COEF_DROP = 1e-13


class NoConvergence(Exception):
    """Quadrature failed to reach the requested tolerance."""


class BadDecay(Exception):
    """Integrand does not decay (rate <= 0), so truncation is impossible."""


class OutOfDomain(Exception):
    """Angle arguments outside the validity region of a coefficient function."""


class OverlappingWedges(Exception):
    """Wedge list for a generalized vertex is not disjoint and ordered."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and switching points for the semi-infinite quadratures.

    rel_tol, abs_tol
        Targets for the returned value; err_est is held below
        max(abs_tol, rel_tol * |value|).
    theta_small
        Below this point integrands are evaluated by series to dodge the
        0/0 at the origin.
    max_panels
        Subdivision limit handed to the adaptive quadrature.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    theta_small: float = 1e-3
    max_panels: int = 400


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class CoefficientValue:
    value: float
    err_est: float

    def __float__(self) -> float:
        return self.value


def _merge_terms(terms):
    """Combine (coef, rate) pairs with equal |rate|; drop cancelled terms."""
    folded = [(c, abs(r)) for (c, r) in terms]
    folded.sort(key=lambda t: t[1])
    merged: list[list[float]] = []
    for c, r in folded:
        if merged and abs(r - merged[-1][1]) <= _RATE_MERGE:
            merged[-1][0] += c
        else:
            merged.append([c, r])
    mass = sum(abs(c) for c, _ in merged) or 1.0
    return tuple((c, r) for c, r in merged if abs(c) > _COEF_DROP * mass)


def _poly_mul(a, b, n=5):
    out = [0.0] * n
    for i, ai in enumerate(a[:n]):
        for j, bj in enumerate(b[: n - i]):
            out[i + j] += ai * bj
    return out


@dataclass(frozen=True)
class DenFactor:
    kind: str  # "sinh" or "cosh"
    rate: float
    power: int = 1


class HyperbolicRatioIntegrand:
    """N(theta) / D(theta) with N a cosh (or sinh) combination and D a product.

    Even integrands carry numerator sum_i c_i * cosh(r_i * theta) with
    sum_i c_i = 0, which is what makes them integrable at the origin; odd ones
    carry sinh terms. The denominator is scale * prod of sinh/cosh factors.

    Evaluation switches between three regimes:
      * theta < theta_small: ratio of Taylor polynomials (both sides vanish
        at the origin to the same order),
      * moderate theta: cosh x - 1 = 2 sinh^2(x/2) applied termwise, which
        realizes the zero-sum property without cancellation,
      * large theta: everything scaled by exp(-A * theta) where A is the
        denominator's total exponent, so no overflow and no blow-up.
    """

    def __init__(self, num_terms, den_factors, den_scale=1.0, odd=False):
        self.odd = odd
        self.den_scale = float(den_scale)
        self.den_factors = tuple(den_factors)
        if odd:
            folded = []
            for c, r in num_terms:
                if r < 0.0:
                    c, r = -c, -r
                folded.append((c, r))
            merged = []
            folded.sort(key=lambda t: t[1])
            for c, r in folded:
                if merged and abs(r - merged[-1][1]) <= _RATE_MERGE:
                    merged[-1][0] += c
                else:
                    merged.append([c, r])
            mass = sum(abs(c) for c, _ in merged) or 1.0
            self.num_terms = tuple(
                (c, r) for c, r in merged if abs(c) > _COEF_DROP * mass
            )
        else:
            self.num_terms = _merge_terms(num_terms)
            total = sum(c for c, _ in self.num_terms)
            mass = sum(abs(c) for c, _ in self.num_terms)
            if mass and abs(total) > 1e-9 * mass:
                raise ValueError("even numerator must sum to zero")
        for f in self.den_factors:
            if f.rate <= 0.0:
                raise ValueError("denominator rates must be positive")
        self._prepare()

    def _prepare(self):
        self.den_rate = sum(f.rate * f.power for f in self.den_factors)
        self.num_rate = max((r for _, r in self.num_terms), default=0.0)
        self.decay_rate = self.den_rate - self.num_rate
        self.coef_mass = sum(abs(c) for c, _ in self.num_terms)

        # Taylor data. Numerator: even terms give sum c_i (cosh - 1), order
        # theta^2; odd give order theta^1. Denominator: each sinh factor
        # contributes one power of theta.
        if self.odd:
            self._num_order = 1
            self._num_poly = [
                sum(c * r ** (2 * k + 1) / math.factorial(2 * k + 1)
                    for c, r in self.num_terms)
                for k in range(5)
            ]
        else:
            self._num_order = 2
            self._num_poly = [
                sum(c * r ** (2 * k + 2) / math.factorial(2 * k + 2)
                    for c, r in self.num_terms)
                for k in range(5)
            ]
        den_poly = [self.den_scale, 0.0, 0.0, 0.0, 0.0]
        den_order = 0
        for f in self.den_factors:
            a2 = f.rate * f.rate
            if f.kind == "sinh":
                base = [f.rate, f.rate * a2 / 6.0, f.rate * a2 * a2 / 120.0,
                        f.rate * a2 ** 3 / 5040.0, f.rate * a2 ** 4 / 362880.0]
                order = 1
            else:
                base = [1.0, a2 / 2.0, a2 * a2 / 24.0, a2 ** 3 / 720.0,
                        a2 ** 4 / 40320.0]
                order = 0
            for _ in range(f.power):
                den_poly = _poly_mul(den_poly, base)
                den_order += order
        self._den_poly = den_poly
        self._den_order = den_order

    @property
    def is_zero(self) -> bool:
        return not self.num_terms

    def series(self, theta: float) -> float:
        x = theta * theta
        num = 0.0
        for c in reversed(self._num_poly):
            num = num * x + c
        den = 0.0
        for c in reversed(self._den_poly):
            den = den * x + c
        shift = self._num_order - self._den_order
        return num / den * theta ** shift if shift else num / den

    def direct(self, theta: float) -> float:
        if self.odd:
            num = sum(c * math.sinh(r * theta) for c, r in self.num_terms)
        else:
            num = sum(
                2.0 * c * math.sinh(0.5 * r * theta) ** 2
                for c, r in self.num_terms
            )
        den = self.den_scale
        for f in self.den_factors:
            v = math.sinh(f.rate * theta) if f.kind == "sinh" else math.cosh(f.rate * theta)
            den *= v ** f.power
        return num / den

    def scaled(self, theta: float) -> float:
        a = self.den_rate
        sign = -1.0 if self.odd else 1.0
        num = sum(
            0.5 * c * (math.exp((r - a) * theta) + sign * math.exp(-(r + a) * theta))
            for c, r in self.num_terms
        )
        den = self.den_scale
        for f in self.den_factors:
            e = math.exp(-2.0 * f.rate * theta)
            v = 0.5 * (1.0 - e) if f.kind == "sinh" else 0.5 * (1.0 + e)
            den *= v ** f.power
        return num / den

    def __call__(self, theta: float, theta_small: float = DEFAULT_QUAD.theta_small) -> float:
        if self.is_zero:
            return 0.0
        if theta < theta_small:
            return self.series(theta)
        if self.den_rate * theta > _EXP_SWITCH:
            return self.scaled(theta)
        return self.direct(theta)

    def envelope(self):
        """(C, theta0) with |f(theta)| <= C exp(-decay_rate * theta) past theta0."""
        theta0 = 1.0
        for f in self.den_factors:
            if f.kind == "sinh":
                theta0 = max(theta0, 1.0 / f.rate)
        den_floor = self.den_scale
        for f in self.den_factors:
            e = math.exp(-2.0 * f.rate * theta0)
            v = 0.5 * (1.0 - e) if f.kind == "sinh" else 0.5
            den_floor *= v ** f.power
        return self.coef_mass / den_floor, theta0


def integrate_semi_infinite(
    integrand,
    mu: float | None = None,
    spec: QuadratureSpec = DEFAULT_QUAD,
    envelope: float | None = None,
    theta0: float = 1.0,
) -> CoefficientValue:
    """Integrate a decaying function over [0, infinity) with a certified tail.

    The integrand must decay like exp(-mu * theta); mu is read off the
    integrand's decay_rate attribute when not passed. The cutoff is chosen so
    the analytic tail bound C * exp(-mu * theta_max) / mu sits well under
    abs_tol, and that bound is added to the reported err_est. If no envelope
    constant C is supplied it is estimated by sampling |f| * exp(mu * theta)
    with a safety factor.
    """
    if mu is None:
        mu = getattr(integrand, "decay_rate", None)
        if mu is None:
            raise BadDecay("no decay rate supplied or discoverable")
    if not mu > 0.0:
        raise BadDecay(f"decay rate must be positive, got {mu}")
    if getattr(integrand, "is_zero", False):
        return CoefficientValue(0.0, 0.0)

    if envelope is None and hasattr(integrand, "envelope"):
        envelope, theta0 = integrand.envelope()
    if envelope is None:
        c_est = 0.0
        for j in range(5):
            th = theta0 + j * (5.0 / mu)
            c_est = max(c_est, abs(integrand(th)) * math.exp(min(mu * th, 700.0)))
        envelope = 8.0 * c_est
    if envelope == 0.0:
        return CoefficientValue(0.0, 0.0)

    tail_target = 0.25 * spec.abs_tol
    theta_max = max(theta0, math.log(envelope / (mu * tail_target)) / mu)
    tail_bound = envelope / mu * math.exp(-mu * theta_max)

    pts = [p for p in (spec.theta_small, 1.0) if 0.0 < p < theta_max]
    res = integrate.quad(
        integrand,
        0.0,
        theta_max,
        epsabs=0.5 * spec.abs_tol,
        epsrel=0.5 * spec.rel_tol,
        limit=spec.max_panels,
        points=pts or None,
        full_output=True,
    )
    if len(res) > 3:
        raise NoConvergence(res[3].strip())
    value, abserr = res[0], res[1]
    err_est = abserr + tail_bound
    if err_est > max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise NoConvergence(
            f"err_est {err_est:.3e} exceeds tolerance for value {value:.6e}"
        )
    return CoefficientValue(value, err_est)


# ---------------------------------------------------------------------------
# closed forms


def _pcot(x: float) -> float:
    """(x - pi) * cot(x), patched across the removable point at pi.

    Within 1e-7 of pi the limit value 1 is returned outright; within 1e-4 a
    three-term expansion takes over, which keeps the derivative information
    that the hard cutoff would destroy.
    """
    u = x - PI
    au = abs(u)
    if au < 1e-7:
        return 1.0
    if au < 1e-4:
        u2 = u * u
        return 1.0 - u2 / 3.0 - u2 * u2 / 45.0
    return u / math.tan(x)


def _one_over_pi_minus_zcot(z: float) -> float:
    # 1/pi - (z/pi) cot z, even in z, vanishing quadratically at the origin.
    az = abs(z)
    if az < 1e-4:
        z2 = z * z
        return z2 / (3.0 * PI) + z2 * z2 / (45.0 * PI)
    return 1.0 / PI - (z / PI) / math.tan(z)


def coeff_a(gamma: float, spec: QuadratureSpec = DEFAULT_QUAD) -> CoefficientValue:
    """Coefficient of t for an open corner of angle gamma away from the outer boundary.

    Closed form 1/pi + (1 - gamma/pi) cot gamma, continued through the zero
    at gamma = pi by its even expansion in (gamma - pi).
    """
    if not 0.0 < gamma < TWO_PI:
        raise OutOfDomain(f"open corner angle must lie in (0, 2*pi), got {gamma}")
    value = _one_over_pi_minus_zcot(gamma - PI)
    return CoefficientValue(value, 8.0 * 2.2e-16 * (1.0 + abs(value)))


def coeff_k(
    alpha: float,
    theta_ang: float,
    sigma_ang: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> CoefficientValue:
    """Closed-form interaction coefficient for a triple of adjacent angles."""
    if min(alpha, theta_ang, sigma_ang) <= 0.0:
        raise OutOfDomain("all three angles must be positive")
    if sigma_ang + theta_ang + alpha >= TWO_PI:
        raise OutOfDomain("angle sum must stay below 2*pi")
    value = (
        -_pcot(sigma_ang + theta_ang + alpha)
        - _pcot(alpha)
        + _pcot(sigma_ang + alpha)
        + _pcot(theta_ang + alpha)
    ) / (2.0 * PI)
    return CoefficientValue(value, 3e-15 * (1.0 + abs(value)))


# ---------------------------------------------------------------------------
# quadrature-backed coefficients


def _integrate_ratio(ratio: HyperbolicRatioIntegrand, spec: QuadratureSpec) -> CoefficientValue:
    if ratio.is_zero:
        return CoefficientValue(0.0, 0.0)
    if ratio.decay_rate <= 0.0:
        raise BadDecay(
            f"integrand decay rate {ratio.decay_rate:.3e} is not positive"
        )
    env, theta0 = ratio.envelope()
    return integrate_semi_infinite(
        lambda th: ratio(th, spec.theta_small),
        ratio.decay_rate,
        spec,
        envelope=env,
        theta0=theta0,
    )


def _b_integrand(gamma: float, beta: float) -> HyperbolicRatioIntegrand:
    return HyperbolicRatioIntegrand(
        [
            (0.5, HALF_PI + gamma - beta),
            (0.5, HALF_PI - gamma + beta),
            (-1.0, HALF_PI - gamma - beta),
        ],
        [DenFactor("sinh", gamma + beta), DenFactor("sinh", HALF_PI)],
        den_scale=2.0,
    )


def coeff_b(gamma: float, beta: float, spec: QuadratureSpec = DEFAULT_QUAD) -> CoefficientValue:
    """Coefficient of t for a corner with one side on the reflecting boundary.

    gamma is the opening inside the region, beta the leftover wedge between
    the region and the outer boundary. Symmetric in its two arguments.
    """
    if gamma <= 0.0 or beta <= 0.0:
        raise OutOfDomain("wedge angles must be strictly positive")
    if gamma + beta > TWO_PI + 1e-12:
        raise OutOfDomain("total wedge angle cannot exceed 2*pi")
    return _integrate_ratio(_b_integrand(gamma, beta), spec)


def coeff_c(
    gamma: float,
    beta: float,
    alpha: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> CoefficientValue:
    """Coefficient of t for a corner flanked by boundary wedges beta and alpha."""
    if min(gamma, beta, alpha) <= 0.0:
        raise OutOfDomain("wedge angles must be strictly positive")
    if gamma + beta + alpha > TWO_PI + 1e-12:
        raise OutOfDomain("total wedge angle cannot exceed 2*pi")
    part1 = coeff_b(gamma + beta, alpha, spec)
    part2 = coeff_b(gamma + alpha, beta, spec)
    extra = HyperbolicRatioIntegrand(
        [
            (0.5, HALF_PI + beta + alpha),
            (0.5, HALF_PI - beta - alpha),
            (-0.5, HALF_PI + beta - alpha),
            (-0.5, HALF_PI - beta + alpha),
        ],
        [DenFactor("sinh", gamma + beta + alpha), DenFactor("sinh", HALF_PI)],
    )
    part3 = _integrate_ratio(extra, spec)
    return CoefficientValue(
        part1.value + part2.value + part3.value,
        part1.err_est + part2.err_est + part3.err_est,
    )


def coeff_f(gamma: float, spec: QuadratureSpec = DEFAULT_QUAD) -> CoefficientValue:
    """Odd-numerator companion integral; vanishes at gamma = pi."""
    if not 0.0 < gamma < TWO_PI:
        raise OutOfDomain(f"angle must lie in (0, 2*pi), got {gamma}")
    ratio = HyperbolicRatioIntegrand(
        [(4.0, PI - gamma)],
        [DenFactor("sinh", PI), DenFactor("cosh", gamma)],
        odd=True,
    )
    return _integrate_ratio(ratio, spec)


def coeff_g(gamma: float, spec: QuadratureSpec = DEFAULT_QUAD) -> CoefficientValue:
    """Companion integral with a -3/4 offset; equals 5/4 at gamma = pi."""
    if not 0.0 < gamma < TWO_PI:
        raise OutOfDomain(f"angle must lie in (0, 2*pi), got {gamma}")
    ratio = HyperbolicRatioIntegrand(
        [
            (2.0, TWO_PI - gamma),
            (-0.5, abs(TWO_PI - 2.0 * gamma)),
            (-1.5, 0.0),
        ],
        [DenFactor("sinh", HALF_PI, power=2), DenFactor("cosh", PI)],
    )
    part = _integrate_ratio(ratio, spec)
    return CoefficientValue(part.value - 0.75, part.err_est + 4.4e-16)


def coeff_b_hat(sigma: float, rho: float, spec: QuadratureSpec = DEFAULT_QUAD) -> CoefficientValue:
    """Single-wedge coefficient in boundary-anchored angles.

    sigma is the full opening of the outer boundary at the vertex, the wedge
    occupied by the region being (0, rho) after rotating one boundary ray to
    angle zero. Equal to coeff_b(rho, sigma - rho) by a change of variables;
    computed from its own integrand so that identity stays a real check.
    """
    if not 0.0 < rho < sigma:
        raise OutOfDomain("need 0 < rho < sigma")
    if sigma > TWO_PI + 1e-12:
        raise OutOfDomain("opening cannot exceed 2*pi")
    ratio = HyperbolicRatioIntegrand(
        [
            (0.5, HALF_PI + sigma - 2.0 * rho),
            (0.5, HALF_PI - sigma + 2.0 * rho),
            (-1.0, HALF_PI - sigma),
        ],
        [DenFactor("sinh", sigma), DenFactor("sinh", HALF_PI)],
        den_scale=2.0,
    )
    return _integrate_ratio(ratio, spec)


def coeff_c_hat(
    sigma: float,
    rho: float,
    lam: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> CoefficientValue:
    """Interior-wedge coefficient in boundary-anchored angles.

    The region occupies the wedge (lam, rho) strictly inside the boundary
    opening (0, sigma). Equal to coeff_c(rho - lam, sigma - rho, lam).
    """
    if not 0.0 < lam < rho < sigma:
        raise OutOfDomain("need 0 < lam < rho < sigma")
    if sigma > TWO_PI + 1e-12:
        raise OutOfDomain("opening cannot exceed 2*pi")
    part1 = coeff_b_hat(sigma, rho, spec)
    part2 = coeff_b_hat(sigma, lam, spec)
    extra = HyperbolicRatioIntegrand(
        [
            (-0.5, HALF_PI + sigma - rho - lam),
            (-0.5, HALF_PI - sigma + rho + lam),
            (0.5, HALF_PI + sigma - rho + lam),
            (0.5, HALF_PI - sigma + rho - lam),
        ],
        [DenFactor("sinh", sigma), DenFactor("sinh", HALF_PI)],
    )
    part3 = _integrate_ratio(extra, spec)
    return CoefficientValue(
        part1.value + part2.value + part3.value,
        part1.err_est + part2.err_est + part3.err_est,
    )


def coeff_d_hat(
    sigma: float,
    rho: float,
    lam: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> CoefficientValue:
    """Dispatch for a single wedge (lam, rho) inside the opening (0, sigma).

    Touching the boundary ray at angle zero (lam = 0), at angle sigma
    (rho = sigma), at both, or at neither selects the appropriate coefficient;
    a wedge touching both rays fills the opening and contributes nothing.
    """
    tol = 1e-12 * max(1.0, sigma)
    if not (-tol <= lam < rho <= sigma + tol):
        raise OutOfDomain("need 0 <= lam < rho <= sigma")
    at_zero = lam <= tol
    at_sigma = rho >= sigma - tol
    if at_zero and at_sigma:
        return CoefficientValue(0.0, 0.0)
    if at_zero:
        return coeff_b_hat(sigma, rho, spec)
    if at_sigma:
        return coeff_b_hat(sigma, sigma - lam, spec)
    return coeff_c_hat(sigma, rho, lam, spec)


def coeff_h_hat(
    sigma: float,
    rho: float,
    lam: float,
    rho_p: float,
    lam_p: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> CoefficientValue:
    """Pairwise interaction of two disjoint wedges inside one opening.

    The wedges are (lam, rho) and (lam_p, rho_p), and the arguments must be in
    canonical order 0 <= lam < rho < lam_p < rho_p <= sigma: the integrand is
    written for that ordering and is not symmetric under naive swaps (callers
    re-sort, after which the value is pair-symmetric).
    """
    tol = 1e-12 * max(1.0, sigma)
    if not (-tol <= lam < rho < lam_p < rho_p <= sigma + tol):
        raise OutOfDomain("need canonical order 0 <= lam < rho < lam_p < rho_p <= sigma")
    if sigma > TWO_PI + 1e-12:
        raise OutOfDomain("opening cannot exceed 2*pi")
    terms = []
    for sign, x in (
        (1.0, sigma - rho_p - rho),
        (-1.0, sigma - rho_p + rho),
        (1.0, sigma - lam_p - lam),
        (-1.0, sigma - lam_p + lam),
        (-1.0, sigma - rho_p - lam),
        (1.0, sigma - rho_p + lam),
        (-1.0, sigma - lam_p - rho),
        (1.0, sigma - lam_p + rho),
    ):
        terms.append((0.5 * sign, HALF_PI + x))
        terms.append((0.5 * sign, HALF_PI - x))
    ratio = HyperbolicRatioIntegrand(
        terms,
        [DenFactor("sinh", sigma), DenFactor("sinh", HALF_PI)],
        den_scale=2.0,
    )
    return _integrate_ratio(ratio, spec)


def generalized_vertex_coeff(
    sigma: float,
    wedges,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> tuple[int, CoefficientValue]:
    """Expansion data for a vertex whose opening holds several region wedges.

    wedges is an iterable of (lam, rho) angle intervals, disjoint within
    [0, sigma]. Returns (number of open rays, coefficient of t): each wedge
    side not lying on the outer boundary contributes one open ray to the
    sqrt(t) term, and the t coefficient is the sum of single-wedge terms plus
    twice the canonical-order pair interactions.
    """
    if not 0.0 < sigma <= TWO_PI + 1e-12:
        raise OutOfDomain(f"opening must lie in (0, 2*pi], got {sigma}")
    tol = 1e-12 * max(1.0, sigma)
    ws = sorted((float(l), float(r)) for l, r in wedges)
    if not ws:
        raise OverlappingWedges("wedge list is empty")
    snapped = []
    for lam, rho in ws:
        if abs(lam) <= tol:
            lam = 0.0
        if abs(rho - sigma) <= tol:
            rho = sigma
        if not 0.0 <= lam < rho <= sigma:
            raise OverlappingWedges(
                f"wedge ({lam}, {rho}) not inside [0, {sigma}]"
            )
        snapped.append((lam, rho))
    for (l1, r1), (l2, r2) in zip(snapped, snapped[1:]):
        if r1 >= l2 - tol:
            raise OverlappingWedges(
                f"wedges ({l1}, {r1}) and ({l2}, {r2}) overlap or touch"
            )

    open_rays = 2 * len(snapped)
    if snapped[0][0] == 0.0:
        open_rays -= 1
    if snapped[-1][1] == sigma:
        open_rays -= 1

    value = 0.0
    err = 0.0
    for lam, rho in snapped:
        part = coeff_d_hat(sigma, rho, lam, spec)
        value += part.value
        err += part.err_est
    for i in range(len(snapped)):
        for j in range(i + 1, len(snapped)):
            li, ri = snapped[i]
            lj, rj = snapped[j]
            part = coeff_h_hat(sigma, ri, li, rj, lj, spec)
            value += 2.0 * part.value
            err += 2.0 * part.err_est
    return open_rays, CoefficientValue(value, err)


# ---------------------------------------------------------------------------
# cusp remainder and the cotangent cross-check


def cusp_term(R: float, t: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Heat mass exchanged across a circular arc of radius R up to time t.

    Equals (R sqrt(t) / sqrt(pi)) * int_1^inf v^-2 int_0^1 y (1-y^2)^(-1/2)
    exp(-R^2 y^2 v^2 / (4t)) dy dv, evaluated by nested adaptive quadrature
    after the substitution y = sin(u) removes the endpoint singularity. The
    outer integral is truncated where an explicit bound on the inner integral
    pushes the tail under tolerance.
    """
    if R <= 0.0 or t <= 0.0:
        raise OutOfDomain("cusp radius and time must be positive")
    pref = R * math.sqrt(t) / math.sqrt(PI)

    def inner(v: float) -> float:
        a = R * R * v * v / (4.0 * t)
        pts = None
        if a > 4.0:
            s = a ** -0.5
            pts = sorted({min(1.5, c * s) for c in (1.0, 4.0, 8.0)})
            pts = [math.asin(min(1.0 - 1e-12, p)) for p in pts if p < 1.0]
            pts = [p for p in pts if 0.0 < p < HALF_PI] or None
        val, _ = integrate.quad(
            lambda u: math.sin(u) * math.exp(-a * math.sin(u) ** 2),
            0.0,
            HALF_PI,
            epsabs=0.1 * spec.abs_tol,
            epsrel=0.1 * spec.rel_tol,
            limit=spec.max_panels,
            points=pts,
        )
        return val

    # inner(v) <= 0.7 * 4t / (R^2 v^2); integrate the bound to place the cutoff
    k_tail = pref * 0.7 * 4.0 * t / (R * R) / 3.0
    v_max = max(2.0, (k_tail / (0.25 * spec.abs_tol)) ** (1.0 / 3.0))
    tail_bound = k_tail / v_max ** 3

    outer, outer_err = integrate.quad(
        lambda v: inner(v) / (v * v),
        1.0,
        v_max,
        epsabs=0.25 * spec.abs_tol / pref,
        epsrel=0.5 * spec.rel_tol,
        limit=spec.max_panels,
    )
    value = pref * outer
    err = pref * outer_err + tail_bound
    if err > max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise NoConvergence(f"cusp remainder err_est {err:.3e} over tolerance")
    return value


def cot_identity_residual(z: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """|quadrature - closed form| for the cotangent integral identity.

    The identity equates the semi-infinite integral with numerator
    cosh(pi theta/2)(cosh(z theta) - 1) and denominator
    sinh(pi theta) sinh(pi theta / 2) to 1/pi - (z/pi) cot(z) on |z| < pi.
    Exercises the full quadrature stack against an exact answer.
    """
    if not abs(z) < PI:
        raise OutOfDomain(f"identity holds for |z| < pi, got {z}")
    ratio = HyperbolicRatioIntegrand(
        [
            (0.5, HALF_PI + z),
            (0.5, HALF_PI - z),
            (-1.0, HALF_PI),
        ],
        [DenFactor("sinh", PI), DenFactor("sinh", HALF_PI)],
    )
    lhs = _integrate_ratio(ratio, spec)
    rhs = _one_over_pi_minus_zcot(z)
    return abs(lhs.value - rhs)
