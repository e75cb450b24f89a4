"""Ambient conventions, radial Hamiltonian dynamics, contact lifts, translated chains.

Conventions fixed here and used by every other module:

* Phase space is R^{2n} with interleaved coordinates (x_1, y_1, ..., x_n, y_n);
  z_j = x_j + i y_j gives the complex view.
* H(z) = sum_j |z_j|^2 / R^2, the scaled squared radius of the ambient ball.
* A radial profile rho (supported in [0, 1], convex, non-increasing) generates
  the truncated radial flow

      flow_t(z) = exp(2 i t rho'(H(z)) / R^2) * z     (per complex coordinate),

  which is closed-form, conserves H, and fixes every z with H(z) >= 1 exactly.
* The calibrated primitive of the time-t map is

      S_t(z) = orientation_sign * t * (m rho'(m) - rho(m)),   m = H(z).

  With the default orientation_sign = -1 this equals t * a(m) >= 0, where
  a = action_density.  This is the unique sign for which translated-chain
  actions are positive and the small-map formula in `genfun` (S + half the
  symplectic cross term) is an honest generating function of flow_t with the
  graph covector used by `genfun.graph_of`.
* The contact lift of the time-1 map acts on R^{2n} x S^1 by
  (z, theta) |-> (flow_1(z), theta - S_1(z)) and has conformal factor g == 0.
  The Reeb flow is translation in theta.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PPoly

from .errors import DomainError, EvenK, NonMonotoneProfile

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# ambient space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ambient:
    """Ambient ball data: complex dimension n, ball radius R, and the
    orientation sign entering the calibrated primitive S."""

    n: int = 1
    R: float = 1.0
    orientation_sign: int = -1

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise DomainError("ambient dimension n must be a positive integer")
        if not self.R > 0:
            raise DomainError("ambient radius R must be positive")
        if self.orientation_sign not in (-1, 1):
            raise DomainError("orientation_sign must be +1 or -1")

    @property
    def dim(self):
        """Real phase-space dimension 2n."""
        return 2 * self.n

    def H(self, z):
        """Scaled squared radius sum |z_j|^2 / R^2."""
        z = np.asarray(z, dtype=float)
        return float(np.dot(z, z)) / self.R**2

    def complex_view(self, z):
        z = np.asarray(z, dtype=float)
        return z[0::2] + 1j * z[1::2]

    def interleave(self, zc):
        out = np.empty(2 * len(zc))
        out[0::2] = zc.real
        out[1::2] = zc.imag
        return out


def j0_matrix(n2):
    """Standard complex structure on interleaved coordinates:
    J0 (x, y) = (-y, x) in each coordinate plane."""
    J = np.zeros((n2, n2))
    for i in range(0, n2, 2):
        J[i, i + 1] = -1.0
        J[i + 1, i] = 1.0
    return J


def j0_apply(v):
    """Apply J0 to an interleaved vector without building the matrix."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


def omega_cross(u, v):
    """Cyclic twist summand 0.5 * <u, J0 v> = 0.5 * sum_j (x_v y_u - x_u y_v),
    i.e. half the symplectic area spanned by u and v (in that order)."""
    return 0.5 * float(np.dot(u, j0_apply(v)))


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

BLEND_WIDTH = 1e-3


class RadialProfile:
    """Convex, non-increasing profile rho supported in [0, 1].

    rho is a piecewise polynomial (scipy PPoly) on [0, 1]; rho, rho', rho''
    all return exact 0.0 for m >= 1.  Invariants (checked by `validate`):
    rho >= 0, rho' <= 0, rho'' >= 0, rho' constant = c on [0, delta].
    """

    def __init__(self, poly, c=None, delta=None):
        self._rho = poly
        self._drho = poly.derivative()
        self._d2rho = self._drho.derivative()
        self.c = c
        self.delta = delta
        self.knots = np.asarray(poly.x, dtype=float)

    # -- evaluation -------------------------------------------------------

    def _eval(self, poly, m):
        m_arr = np.asarray(m, dtype=float)
        scalar = m_arr.ndim == 0
        m_arr = np.atleast_1d(m_arr)
        out = np.zeros_like(m_arr)
        inside = m_arr < 1.0
        if np.any(inside):
            out[inside] = poly(np.clip(m_arr[inside], 0.0, 1.0))
        return float(out[0]) if scalar else out

    def rho(self, m):
        return self._eval(self._rho, m)

    def drho(self, m):
        return self._eval(self._drho, m)

    def d2rho(self, m):
        return self._eval(self._d2rho, m)

    # -- serialization ----------------------------------------------------

    def to_json(self):
        """JSON object {c, delta, knots, pieces}; pieces[i] lists the
        coefficients of rho on [knots[i], knots[i+1]] in descending powers
        of (m - knots[i])."""
        return {
            "c": self.c,
            "delta": self.delta,
            "knots": [float(x) for x in self._rho.x],
            "pieces": [[float(v) for v in self._rho.c[:, i]]
                       for i in range(self._rho.c.shape[1])],
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        knots = np.asarray(obj["knots"], dtype=float)
        pieces = np.asarray(obj["pieces"], dtype=float).T
        poly = PPoly(pieces, knots)
        prof = cls(poly, c=obj.get("c"), delta=obj.get("delta"))
        problems = prof.validate()
        if problems:
            raise DomainError("invalid profile: " + "; ".join(problems))
        return prof

    # -- invariants -------------------------------------------------------

    def validate(self, samples=2001):
        """Return a list of invariant violations (empty when valid)."""
        problems = []
        m = np.linspace(0.0, 1.0, samples)
        r = self.rho(m)
        dr = self.drho(m)
        d2r = self.d2rho(m)
        if np.min(r) < -1e-10:
            problems.append("rho takes negative values")
        if np.max(dr) > 1e-10:
            problems.append("rho' takes positive values")
        if np.min(d2r) < -1e-8:
            problems.append("rho'' takes negative values (not convex)")
        if abs(self.rho(1.0)) > 1e-12 or abs(self.drho(1.0)) > 1e-12:
            problems.append("rho does not vanish at m = 1")
        if self.rho(1.5) != 0.0 or self.drho(1.5) != 0.0:
            problems.append("rho is not exactly zero beyond m = 1")
        if self.c is not None and self.delta is not None:
            flat = np.linspace(0.0, self.delta, 101)
            if np.max(np.abs(self.drho(flat) - self.c)) > 1e-10:
                problems.append("rho' is not constant = c on [0, delta]")
        return problems


def ref_profile(c, delta, blend=BLEND_WIDTH):
    """Reference profile family REF(c, delta).

    rho' == c on [0, delta], then follows the straight chord c (1 - m)/(1 - delta)
    to rho'(1) = 0, with C^1 cubic corner blends of width `blend`; rho is the
    exact antiderivative with rho(1) = 0.  rho'' >= 0 throughout, so level
    solving for rho' is monotone on [delta, 1].
    """
    if not c < 0:
        raise DomainError("profile slope c must be negative")
    if not 0 < delta < 1 - 2 * blend:
        raise DomainError("delta must lie in (0, 1 - 2*blend)")
    s = -c / (1.0 - delta)          # chord slope, > 0
    w = blend
    knots = np.array([0.0, delta, delta + w, 1.0 - w, 1.0])
    # rho' piecewise, descending powers of the local variable t = m - knot:
    dcoeffs = np.array([
        [0.0,        0.0,      0.0,  c],            # constant c
        [-s / w**2,  2 * s / w, 0.0, c],            # blend up to the chord
        [0.0,        0.0,      s,    c + s * w],    # chord
        [-s / w**2,  s / w,    s,    -s * w],       # blend down to 0 with slope 0
    ]).T
    dpoly = PPoly(dcoeffs, knots)
    poly = dpoly.antiderivative()
    poly.c[-1, :] -= poly(1.0)      # normalize rho(1) = 0 exactly
    return RadialProfile(poly, c=c, delta=delta)


# ---------------------------------------------------------------------------
# flow, action density, maps
# ---------------------------------------------------------------------------

def flow(amb, rho, t, z):
    """Time-t truncated radial flow: z |-> exp(2 i t rho'(H(z)) / R^2) z.

    Total on R^{2n}; conserves H to round-off; fixes every z with H >= 1
    exactly (rho' is exactly zero there)."""
    z = np.asarray(z, dtype=float)
    m = amb.H(z)
    ang = 2.0 * t * rho.drho(m) / amb.R**2
    zc = (z[0::2] + 1j * z[1::2]) * np.exp(1j * ang)
    out = np.empty_like(z)
    out[0::2] = zc.real
    out[1::2] = zc.imag
    return out


def action_density(rho, m):
    """a(m) = rho(m) - m rho'(m): the per-step action of a point on level m.

    Non-negative, non-increasing; a(m) = 0 for m >= 1; a(0) = rho(0)."""
    return rho.rho(m) - np.asarray(m, dtype=float) * rho.drho(m)


class RadialMap:
    """Time-t map of the truncated radial flow with exact Jacobian and the
    calibrated primitive S_t(z) = orientation_sign * t * (m rho'(m) - rho(m))."""

    def __init__(self, amb, rho, t=1.0):
        self.amb = amb
        self.rho = rho
        self.t = float(t)

    def __call__(self, z):
        return flow(self.amb, self.rho, self.t, z)

    def jacobian(self, z):
        z = np.asarray(z, dtype=float)
        amb = self.amb
        m = amb.H(z)
        beta = 2.0 * self.t * self.rho.drho(m) / amb.R**2
        dbeta = 2.0 * self.t * self.rho.d2rho(m) / amb.R**2
        n2 = amb.dim
        cb, sb = math.cos(beta), math.sin(beta)
        Rb = np.zeros((n2, n2))
        for i in range(0, n2, 2):
            Rb[i, i] = cb
            Rb[i, i + 1] = -sb
            Rb[i + 1, i] = sb
            Rb[i + 1, i + 1] = cb
        grad_m = (2.0 / amb.R**2) * z
        inner = np.eye(n2) + dbeta * np.outer(j0_apply(z), grad_m)
        return Rb @ inner

    def S(self, z):
        m = self.amb.H(np.asarray(z, dtype=float))
        return self.amb.orientation_sign * self.t * (
            m * self.rho.drho(m) - self.rho.rho(m))

    def grad_S(self, z):
        z = np.asarray(z, dtype=float)
        m = self.amb.H(z)
        coeff = self.amb.orientation_sign * self.t * m * self.rho.d2rho(m)
        return coeff * (2.0 / self.amb.R**2) * z

    def max_rotation(self):
        """Upper bound for the rotation angle |2 t rho'(m) / R^2| over all m."""
        m = np.linspace(0.0, 1.0, 512)
        return float(np.max(np.abs(2.0 * self.t * self.rho.drho(m)))) / self.amb.R**2


class LinearRotation:
    """Product of planar rotations by fixed angles (counterclockwise for
    positive angle); S == 0."""

    def __init__(self, amb, angles):
        self.amb = amb
        self.angles = np.atleast_1d(np.asarray(angles, dtype=float))
        if len(self.angles) != amb.n:
            raise DomainError("need one rotation angle per complex coordinate")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        zc = (z[0::2] + 1j * z[1::2]) * np.exp(1j * self.angles)
        out = np.empty_like(z)
        out[0::2] = zc.real
        out[1::2] = zc.imag
        return out

    def jacobian(self, z):
        n2 = self.amb.dim
        Rb = np.zeros((n2, n2))
        for j, a in enumerate(self.angles):
            i = 2 * j
            Rb[i, i] = math.cos(a)
            Rb[i, i + 1] = -math.sin(a)
            Rb[i + 1, i] = math.sin(a)
            Rb[i + 1, i + 1] = math.cos(a)
        return Rb

    def S(self, z):
        return 0.0

    def grad_S(self, z):
        return np.zeros(self.amb.dim)


class ComposedMap:
    """Composition map_K o ... o map_1 with chained Jacobian and additive
    primitive S (sum of factor primitives along the orbit)."""

    def __init__(self, maps):
        self.maps = list(maps)
        self.amb = self.maps[0].amb

    def __call__(self, z):
        for mp in self.maps:
            z = mp(z)
        return z

    def jacobian(self, z):
        n2 = len(np.asarray(z, dtype=float))
        J = np.eye(n2)
        for mp in self.maps:
            J = mp.jacobian(z) @ J
            z = mp(z)
        return J

    def S(self, z):
        total = 0.0
        for mp in self.maps:
            total += mp.S(z)
            z = mp(z)
        return total


# ---------------------------------------------------------------------------
# shells
# ---------------------------------------------------------------------------

@dataclass
class ShellDatum:
    """One component of the k-periodic-point set of the time-1 radial map:
    either a sphere shell (level m with rho'(m) = -(l/k) pi R^2) or the
    isolated origin."""

    l: int
    m: float
    value: float
    index: int
    kind: str               # "sphereShell" | "isolated"
    free_orbit: bool
    nullity: int


def _check_monotone(rho, lo, hi):
    grid = np.linspace(lo, hi, 4001)
    dr = rho.drho(grid)
    if np.min(np.diff(dr)) < -1e-10:
        raise NonMonotoneProfile(
            "rho' is not non-decreasing on [%g, %g]" % (lo, hi))


def shells(amb, rho, k):
    """Solve rho'(m) = -(l/k) pi R^2 for every integer l with
    0 < l/k < -rho'(0) / (pi R^2); bisection to 1e-12 in m.

    Returns one ShellDatum per shell (ascending l) followed by the origin
    datum (kind "isolated", value k rho(0), index 2n(L+1))."""
    if k < 1 or k % 2 == 0:
        raise EvenK("shells requires odd k >= 1")
    lo = rho.delta if rho.delta is not None else 0.0
    _check_monotone(rho, lo, 1.0)
    c0 = rho.drho(0.0)
    area = math.pi * amb.R**2
    out = []
    l = 1
    while -(l / k) * area > c0:
        target = -(l / k) * area
        a, b = lo, 1.0
        fa = rho.drho(a) - target
        fb = rho.drho(b) - target
        if fa == 0.0:
            raise NonMonotoneProfile(
                "rho' meets the level on its flat plateau; shell is not isolated")
        if fa > 0.0 or fb < 0.0:
            raise NonMonotoneProfile("cannot bracket rho' level %g" % target)
        while b - a > 1e-12:
            mid = 0.5 * (a + b)
            if rho.drho(mid) - target <= 0.0:
                a = mid
            else:
                b = mid
        m = 0.5 * (a + b)
        value = l * m * area + k * rho.rho(m)
        out.append(ShellDatum(
            l=l, m=m, value=value, index=2 * amb.n * l, kind="sphereShell",
            free_orbit=math.gcd(l, k) == 1, nullity=2 * amb.n - 1))
        l += 1
    L = len(out)
    out.append(ShellDatum(
        l=0, m=0.0, value=k * rho.rho(0.0), index=2 * amb.n * (L + 1),
        kind="isolated", free_orbit=False, nullity=0))
    return out


# ---------------------------------------------------------------------------
# contact layer
# ---------------------------------------------------------------------------

@dataclass
class ContactPoint:
    """Point of R^{2n} x S^1; theta is interpreted mod 1 when circle_mode."""

    base: np.ndarray
    theta: float
    circle_mode: bool = False

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        if self.circle_mode:
            self.theta = self.theta % 1.0


def _theta_dist(a, b, circle_mode):
    d = a - b
    if circle_mode:
        d = (d + 0.5) % 1.0 - 0.5
    return abs(d)


class ContactLift:
    """Lift (z, theta) |-> (flow_1(z), theta - S(z)) of the time-1 truncated
    radial map.  Strict contactomorphism: conformal factor g == 0."""

    def __init__(self, amb, rho):
        self.amb = amb
        self.rho = rho
        self.base_map = RadialMap(amb, rho, 1.0)

    def __call__(self, p):
        theta = p.theta - self.base_map.S(p.base)
        return ContactPoint(self.base_map(p.base), theta,
                            circle_mode=p.circle_mode)

    def conformal_factor(self, p):
        return 0.0

    def S(self, z):
        return self.base_map.S(z)


def lift_contact(amb, rho):
    """Contact lift of the time-1 truncated radial map (g == 0)."""
    return ContactLift(amb, rho)


def reeb_translate(p, t):
    """Reeb flow: translation by t in theta."""
    return ContactPoint(p.base.copy(), p.theta + t, circle_mode=p.circle_mode)


@dataclass
class TranslatedChain:
    """Cyclic k-tuple of contact points with p_{j+1} = Reeb_t(lift(p_j));
    action = k t exactly."""

    points: list
    t: float
    action: float
    orbit_id: str

    @property
    def k(self):
        return len(self.points)

    def rotated(self, shift=1):
        """Cyclic rotation of the same chain (again a valid chain)."""
        pts = self.points[shift:] + self.points[:shift]
        return TranslatedChain(points=[ContactPoint(p.base.copy(), p.theta,
                                                    circle_mode=p.circle_mode)
                                       for p in pts],
                               t=self.t, action=self.action,
                               orbit_id=self.orbit_id)


def translated_chains(amb, rho, k):
    """One chain representative per component of the k-periodic point set of
    the time-1 map: each shell contributes a free S^1-family (representative
    starting at (R sqrt(m), 0, ..., 0)), the origin an isolated chain.

    For each chain, t = (1/k) sum_j S(z_j) and action = k t = sum_j S(z_j)."""
    if k < 1 or k % 2 == 0:
        raise EvenK("translated_chains requires odd k >= 1")
    phi = RadialMap(amb, rho, 1.0)
    out = []
    for sh in shells(amb, rho, k):
        if sh.kind == "sphereShell":
            z = np.zeros(amb.dim)
            z[0] = amb.R * math.sqrt(sh.m)
            orbit_id = "shell-l%d" % sh.l
        else:
            z = np.zeros(amb.dim)
            orbit_id = "origin"
        pts_base = [z]
        svals = [phi.S(z)]
        for _ in range(k - 1):
            z = phi(z)
            pts_base.append(z)
            svals.append(phi.S(z))
        t = sum(svals) / k
        points = [ContactPoint(pts_base[0], 0.0)]
        for j in range(k - 1):
            theta = points[-1].theta + t - svals[j]
            points.append(ContactPoint(pts_base[j + 1], theta))
        out.append(TranslatedChain(points=points, t=t, action=t * k,
                                   orbit_id=orbit_id))
    return out


def verify_chain(contact_map, chain, tol=1e-9, diagnostics=None):
    """Check the translated-chain conditions for `contact_map`:

    * the conformal factors along the chain sum to zero;
    * p_{j+1} = Reeb_t(contact_map(p_j)) cyclically (p_{k+1} = p_1);
    * action = k t.

    Returns False (never raises) when a condition fails; pass a list as
    `diagnostics` to collect the violated conditions."""
    msgs = []
    pts = chain.points
    k = len(pts)
    gsum = sum(contact_map.conformal_factor(p) for p in pts)
    if abs(gsum) > tol:
        msgs.append("conformal factors sum to %g, not 0" % gsum)
    for j in range(k):
        q = contact_map(pts[j])
        q = reeb_translate(q, chain.t)
        nxt = pts[(j + 1) % k]
        base_err = float(np.max(np.abs(q.base - nxt.base)))
        theta_err = _theta_dist(q.theta, nxt.theta, nxt.circle_mode)
        if base_err > tol or theta_err > tol:
            msgs.append("step %d -> %d violates the chain relation "
                        "(base error %g, theta error %g)"
                        % (j + 1, (j + 1) % k + 1, base_err, theta_err))
    if abs(chain.action - chain.t * k) > tol * max(1.0, abs(chain.action)):
        msgs.append("action %g is not k*t = %g" % (chain.action, chain.t * k))
    if diagnostics is not None:
        diagnostics.extend(msgs)
    return not msgs


# ---------------------------------------------------------------------------
# room conjugation on the contact side
# ---------------------------------------------------------------------------

def phi_m(m, p):
    """Contact embedding (z, theta) |-> (e^{2 pi i m theta} z / sqrt(1 + m pi |z|^2), theta).

    Conjugation by phi_m turns Reeb-translation obstructions for large balls
    into obstructions for small balls (squeezed radius A / (1 + m A))."""
    if m < 0 or int(m) != m:
        raise DomainError("phi_m requires a non-negative integer m")
    z = np.asarray(p.base, dtype=float)
    zc = z[0::2] + 1j * z[1::2]
    zc = zc * np.exp(2j * math.pi * m * p.theta)
    zc = zc / math.sqrt(1.0 + m * math.pi * float(np.dot(z, z)))
    out = np.empty_like(z)
    out[0::2] = zc.real
    out[1::2] = zc.imag
    return ContactPoint(out, p.theta, circle_mode=p.circle_mode)


def sqz_radius(m, A):
    """Image area scale of phi_m on a ball of area scale A: A / (1 + m A).

    Monotone in A; tends to 1/m as A -> infinity; 0 at A = 0."""
    if A < 0:
        raise DomainError("area scale A must be non-negative")
    if math.isinf(A):
        return 1.0 / m
    return A / (1.0 + m * A)
