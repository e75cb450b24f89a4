"""Generating functions quadratic at infinity, cyclic compositions, contact sharps.

The objects here are `GenFn` handles: explicit value / gradient / Hessian
callables on base x fibre variables, together with the quadratic fibre part,
normalization data, symmetry actions, and a recursive `domain_point` map that
recovers the domain point of the generated map from a fibre-critical point.

Variable layouts (fixed here, relied on by `crit`):

* small map / linear rotation:   w = base q in R^{2n}        (no fibre)
* cyclic composition of K factors (K odd):
      w = [z_1 | z_2 ... z_K | zeta_1 ... zeta_K],  base = z_1,
      F(w) = sum_j F_j((z_j + z_{j+1})/2, zeta_j) + sum_j 0.5 <z_j, J0 z_{j+1}>
  with cyclic indices (z_{K+1} = z_1).
* contact sharp of a contact-base factor F(x, y, theta; zeta):
      w = [B_1 ... B_k | zeta_1 ... zeta_k],  B_j = (z_j, theta_j, r_j),
      F^#k(w) = sum_j [ e^{r_j} F(e^{-r_j/2}(z_j + z_{j+1})/2, theta_{j+1}, zeta_j)
                        + 0.5 <z_j, J0 z_{j+1}> + e^{r_{j-1}}(theta_j - theta_{j+1}) ].

All derivatives are exact (implicit differentiation for the midpoint solve,
explicit chain rule for the compositions); finite differences are only used
in the test suite to validate them.
"""

import math

import numpy as np

from .errors import (AngleOutOfRange, DomainError, EvenFactorCount, EvenK,
                     MidpointSolveFailed, NotNormalized)
from .sympl import ComposedMap, LinearRotation, RadialMap, j0_apply, j0_matrix

FAR_FIELD_RADIUS = 1e3
_FAR_SAFETY = 1.5


# ---------------------------------------------------------------------------
# GenFn container
# ---------------------------------------------------------------------------

class GenFn:
    """Generating function handle.

    value/grad/hess take the full variable vector w = [base | fibre].
    `quad_part` is the symmetric matrix Q of the fibre quadratic form
    (value zeta^T Q zeta); `quad_index` counts its negative eigenvalues.
    `norm_shift` is the constant already subtracted so that the far critical
    value is zero; `normalized` records that it vanishes.
    `domain_point(w)` returns the domain point of the generated map at a
    fibre-critical w.  `sym_ops` maps symmetry names to variable actions.
    """

    def __init__(self, base_dim, fibre_dim, value, grad, hess, quad_part,
                 norm_shift=0.0, normalized=False, symmetry=None,
                 map_handle=None, domain_point=None, contact=False,
                 sym_ops=None, meta=None, quad_indices=None):
        self.base_dim = int(base_dim)
        self.fibre_dim = int(fibre_dim)
        # indices of w carrying the fibre quadratic form; contact compositions
        # exclude the gauge directions (theta, r), so they pass these explicitly
        if quad_indices is None:
            quad_indices = np.arange(base_dim, base_dim + fibre_dim)
        self.quad_indices = np.asarray(quad_indices, dtype=int)
        self._value = value
        self._grad = grad
        self._hess = hess
        self.quad_part = np.asarray(quad_part, dtype=float)
        self.norm_shift = float(norm_shift)
        self.normalized = bool(normalized)
        self.symmetry = symmetry or {}
        self.map_handle = map_handle
        self._domain_point = domain_point
        self.contact = bool(contact)
        self.sym_ops = sym_ops or {}
        self.meta = meta or {}
        if self.quad_part.size:
            evals = np.linalg.eigvalsh(self.quad_part)
            self.quad_index = int(np.sum(evals < 0.0))
            self.quad_degenerate = bool(np.min(np.abs(evals))
                                        < 1e-10 * max(1.0, np.max(np.abs(evals))))
        else:
            self.quad_index = 0
            self.quad_degenerate = False
        self.far_field_bound = None

    # -- evaluation --------------------------------------------------------

    @property
    def total_dim(self):
        return self.base_dim + self.fibre_dim

    def value(self, w):
        return float(self._value(np.asarray(w, dtype=float)))

    def grad(self, w):
        return np.asarray(self._grad(np.asarray(w, dtype=float)), dtype=float)

    def hess(self, w):
        return np.asarray(self._hess(np.asarray(w, dtype=float)), dtype=float)

    def domain_point(self, w):
        if self._domain_point is None:
            raise DomainError("this generating function has no domain_point map")
        return self._domain_point(np.asarray(w, dtype=float))

    # -- quadratic-at-infinity bookkeeping ----------------------------------

    def quad_extension_grad(self, w):
        """Gradient of the fibre quadratic extension (zeros elsewhere)."""
        g = np.zeros(self.total_dim)
        if len(self.quad_indices):
            zeta = np.asarray(w, dtype=float)[self.quad_indices]
            g[self.quad_indices] = 2.0 * self.quad_part @ zeta
        return g

    def record_far_field_bound(self, rng=None, samples=8):
        """Sample far fibre points (norm >= FAR_FIELD_RADIUS) and record a
        bound for || grad F - grad(quadratic extension) || there."""
        if self.fibre_dim == 0:
            self.far_field_bound = 0.0
            return self.far_field_bound
        rng = rng or np.random.default_rng(0)
        sup = 0.0
        for _ in range(samples):
            w = np.zeros(self.total_dim)
            w[:self.base_dim] = rng.uniform(-2.0, 2.0, self.base_dim)
            direction = rng.normal(size=self.fibre_dim)
            direction /= np.linalg.norm(direction)
            w[self.base_dim:] = FAR_FIELD_RADIUS * direction
            diff = self.grad(w) - self.quad_extension_grad(w)
            sup = max(sup, float(np.linalg.norm(diff)))
        self.far_field_bound = _FAR_SAFETY * sup + 1.0
        return self.far_field_bound

    def descriptor(self):
        return {
            "baseDim": self.base_dim,
            "fibreDim": self.fibre_dim,
            "quadIndex": self.quad_index,
            "normShift": self.norm_shift,
            "normalized": self.normalized,
            "contact": self.contact,
            "symmetry": sorted(self.symmetry),
            "farFieldBound": self.far_field_bound,
        }


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

class GraphPoint:
    """Point of the twisted graph of a map: midpoint base + graph covector;
    contact graphs carry the extra rho coordinate and the theta defect."""

    def __init__(self, base, covector, theta_defect=None, rho_coord=None):
        self.base = np.asarray(base, dtype=float)
        self.covector = np.asarray(covector, dtype=float)
        self.theta_defect = theta_defect
        self.rho_coord = rho_coord


def graph_of(mp, p):
    """Twisted-graph point of a map at p.

    Symplectic maps: base = (p + phi(p))/2, covector per coordinate
    (phi_y - y, x - phi_x).  Contact maps (strict or conformal): the
    seven-component (4n + 3 in general) normal form with e^{g/2} weights."""
    if hasattr(mp, "conformal_factor"):
        g = mp.conformal_factor(p)
        eg2 = math.exp(0.5 * g)
        q = mp(p)
        z, X = p.base, q.base
        base = np.concatenate([(eg2 * z + X) / 2.0, [p.theta]])
        cov = np.empty_like(z)
        cov[0::2] = X[1::2] - eg2 * z[1::2]
        cov[1::2] = eg2 * z[0::2] - X[0::2]
        wterm = 0.5 * eg2 * float(np.dot(z[0::2], X[1::2]) - np.dot(z[1::2], X[0::2]))
        theta_defect = q.theta - p.theta + wterm
        return GraphPoint(base, cov, theta_defect=theta_defect,
                          rho_coord=math.exp(g) - 1.0)
    z = np.asarray(p, dtype=float)
    X = mp(z)
    cov = np.empty_like(z)
    cov[0::2] = X[1::2] - z[1::2]
    cov[1::2] = z[0::2] - X[0::2]
    return GraphPoint((z + X) / 2.0, cov)


# ---------------------------------------------------------------------------
# elementary generating functions
# ---------------------------------------------------------------------------

def gf_linear_rotation(amb, angles):
    """F(q) = sum_j tan(alpha_j / 2) |q_j|^2, the fibreless generating
    function of the product of rotations by alpha_j (|alpha_j| < pi)."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if np.any(np.abs(angles) >= math.pi):
        raise AngleOutOfRange("rotation angles must satisfy |alpha| < pi")
    coeffs = np.tan(angles / 2.0)
    diag = np.repeat(coeffs, 2)

    def value(w):
        return float(np.dot(diag * w, w))

    def grad(w):
        return 2.0 * diag * w

    def hess(w):
        return np.diag(2.0 * diag)

    mp = LinearRotation(amb, angles)
    return GenFn(base_dim=amb.dim, fibre_dim=0, value=value, grad=grad,
                 hess=hess, quad_part=np.zeros((0, 0)), norm_shift=0.0,
                 normalized=True, map_handle=mp,
                 domain_point=lambda w: _midpoint_solve(mp, w),
                 meta={"kind": "linearRotation"})


def _midpoint_solve(mp, q, tol=1e-12, max_iter=50):
    """Solve (z + phi(z))/2 = q by damped Newton; exact Jacobian from the map.

    Iterates to stagnation (typically ~1e-16 residual); raises
    MidpointSolveFailed if the residual is still above `tol` afterwards."""
    q = np.asarray(q, dtype=float)
    z = q.copy()
    res = 0.5 * (z + mp(z)) - q
    rnorm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if rnorm == 0.0:
            return z
        A = 0.5 * (np.eye(len(q)) + mp.jacobian(z))
        try:
            step = np.linalg.solve(A, res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(A, res, rcond=None)[0]
        alpha = 1.0
        for _ in range(30):
            z_new = z - alpha * step
            res_new = 0.5 * (z_new + mp(z_new)) - q
            rnew = float(np.max(np.abs(res_new)))
            if rnew < rnorm:
                break
            alpha *= 0.5
        else:
            break
        z, res, rnorm = z_new, res_new, rnew
        if rnorm < 1e-15 * max(1.0, float(np.max(np.abs(q)))):
            return z
    if rnorm > tol:
        raise MidpointSolveFailed(
            "midpoint residual %g above tolerance %g" % (rnorm, tol))
    return z


def gf_small_map(amb, mp, S=None):
    """Fibreless generating function of a map with (id + phi)/2 invertible:

        F(q) = S(zbar) + 0.5 sum_j (xbar_j phi_y_j - ybar_j phi_x_j),

    zbar the midpoint solution of (z + phi(z))/2 = q.  S must be the map's
    calibrated primitive (the library's map handles expose it as `.S`); then
    grad F is the graph covector of phi at zbar and

        hess F = sym( 2 J0 (I - Dphi) (I + Dphi)^{-1} ),

    both exact by implicit differentiation."""
    if S is None:
        S = getattr(mp, "S", None) or (lambda z: 0.0)
    n2 = amb.dim

    def value(q):
        z = _midpoint_solve(mp, q)
        X = mp(z)
        w = 0.5 * float(np.dot(z[0::2], X[1::2]) - np.dot(z[1::2], X[0::2]))
        return S(z) + w

    def grad(q):
        z = _midpoint_solve(mp, q)
        X = mp(z)
        cov = np.empty(n2)
        cov[0::2] = X[1::2] - z[1::2]
        cov[1::2] = z[0::2] - X[0::2]
        return cov

    def hess(q):
        z = _midpoint_solve(mp, q)
        D = mp.jacobian(z)
        A = np.linalg.solve((np.eye(n2) + D).T, (np.eye(n2) - D).T).T
        H = 2.0 * j0_matrix(n2) @ A
        return 0.5 * (H + H.T)

    norm_shift = 0.0  # far from the support phi = id: S = 0 and the cross term is 0
    gf = GenFn(base_dim=n2, fibre_dim=0, value=value, grad=grad, hess=hess,
               quad_part=np.zeros((0, 0)), norm_shift=norm_shift,
               normalized=True, map_handle=mp,
               domain_point=lambda q: _midpoint_solve(mp, q),
               meta={"kind": "smallMap"})
    return gf


# ---------------------------------------------------------------------------
# cyclic composition (shared by gf_compose_chain and sharp_k)
# ---------------------------------------------------------------------------

class _CyclicLayout:
    """Index bookkeeping for w = [z_1 .. z_K | zeta_1 .. zeta_K]."""

    def __init__(self, n2, fibre_dims):
        self.n2 = n2
        self.K = len(fibre_dims)
        self.fibre_dims = list(fibre_dims)
        self.z_slices = [slice(j * n2, (j + 1) * n2) for j in range(self.K)]
        off = self.K * n2
        self.f_slices = []
        for d in fibre_dims:
            self.f_slices.append(slice(off, off + d))
            off += d
        self.total = off

    def factor_args(self, w, j):
        jn = (j + 1) % self.K
        mid = 0.5 * (w[self.z_slices[j]] + w[self.z_slices[jn]])
        return np.concatenate([mid, w[self.f_slices[j]]])


def _cyclic_compose(factors):
    """Cyclic composition generating function over K factors (K odd)."""
    K = len(factors)
    n2 = factors[0].base_dim
    if any(f.base_dim != n2 for f in factors):
        raise DomainError("all factors must share the same base dimension")
    if any(f.contact for f in factors):
        raise DomainError("cyclic composition acts on symplectic-base factors")
    lay = _CyclicLayout(n2, [f.fibre_dim for f in factors])
    J0 = j0_matrix(n2)

    def value(w):
        total = 0.0
        for j in range(K):
            jn = (j + 1) % K
            total += factors[j].value(lay.factor_args(w, j))
            total += 0.5 * float(np.dot(w[lay.z_slices[j]],
                                        j0_apply(w[lay.z_slices[jn]])))
        return total

    def grad(w):
        g = np.zeros(lay.total)
        for j in range(K):
            jn = (j + 1) % K
            gj = factors[j].grad(lay.factor_args(w, j))
            gu, gf = gj[:n2], gj[n2:]
            g[lay.z_slices[j]] += 0.5 * gu
            g[lay.z_slices[jn]] += 0.5 * gu
            g[lay.f_slices[j]] += gf
            g[lay.z_slices[j]] += 0.5 * j0_apply(w[lay.z_slices[jn]])
            g[lay.z_slices[jn]] -= 0.5 * j0_apply(w[lay.z_slices[j]])
        return g

    def hess(w):
        H = np.zeros((lay.total, lay.total))
        for j in range(K):
            jn = (j + 1) % K
            Hj = factors[j].hess(lay.factor_args(w, j))
            Huu = Hj[:n2, :n2]
            Huf = Hj[:n2, n2:]
            Hff = Hj[n2:, n2:]
            zs = (lay.z_slices[j], lay.z_slices[jn])
            for a in zs:
                for b in zs:
                    H[a, b] += 0.25 * Huu
                H[a, lay.f_slices[j]] += 0.5 * Huf
                H[lay.f_slices[j], a] += 0.5 * Huf.T
            H[lay.f_slices[j], lay.f_slices[j]] += Hff
            H[lay.z_slices[j], lay.z_slices[jn]] += 0.5 * J0
            H[lay.z_slices[jn], lay.z_slices[j]] += 0.5 * J0.T
        return H

    # fibre quadratic part: factor quadratics plus the cyclic twist with z_1 = 0
    fdim = lay.total - n2
    Q = np.zeros((fdim, fdim))
    for j in range(K):
        fs = lay.f_slices[j]
        Q[fs.start - n2:fs.stop - n2, fs.start - n2:fs.stop - n2] = \
            factors[j].quad_part
    for j in range(1, K - 1):      # pairs (z_j, z_{j+1}) with both slots >= 2
        a = lay.z_slices[j]
        b = lay.z_slices[j + 1]
        Q[a.start - n2:a.stop - n2, b.start - n2:b.stop - n2] += 0.25 * J0
        Q[b.start - n2:b.stop - n2, a.start - n2:a.stop - n2] += 0.25 * J0.T

    def domain_point(w):
        return factors[0].domain_point(lay.factor_args(w, 0))

    maps = [f.map_handle for f in factors]
    mp = ComposedMap(maps) if all(m is not None for m in maps) else None
    gf = GenFn(base_dim=n2, fibre_dim=fdim, value=value, grad=grad, hess=hess,
               quad_part=Q, map_handle=mp, domain_point=domain_point,
               meta={"kind": "cyclicComposition", "K": K, "layout": lay,
                     "factors": list(factors)})
    raw = sum(f.norm_shift for f in factors)
    gf.norm_shift = raw
    gf.normalized = all(f.normalized for f in factors)
    return gf


def gf_compose_chain(factors):
    """Generating function of phi_K o ... o phi_1 from K fibreless (or fibred)
    factor generating functions, K odd:

        F(z_1; z_2..z_K, zetas) = sum_j F_j((z_j + z_{j+1})/2, zeta_j)
                                  + sum_j 0.5 <z_j, J0 z_{j+1}>   (cyclic).

    K = 1 returns the single factor unchanged."""
    K = len(factors)
    if K % 2 == 0:
        raise EvenFactorCount("cyclic composition requires an odd factor count")
    if K == 1:
        return factors[0]
    return _cyclic_compose(list(factors))


def sharp_k(F, k):
    """k-fold cyclic self-composition F^{#k} (k odd); generates the k-th
    iterate of F's map and carries the cyclic Z_k symmetry action.

    k = 1 returns F itself."""
    if k % 2 == 0 or k < 1:
        raise EvenK("sharp_k requires odd k >= 1")
    if k == 1:
        return F
    gf = _cyclic_compose([F] * k)
    lay = gf.meta["layout"]
    perm = np.arange(lay.total)
    for j in range(k):
        jn = (j + 1) % k
        perm[lay.z_slices[j]] = np.arange(lay.total)[lay.z_slices[jn]]
        perm[lay.f_slices[j]] = np.arange(lay.total)[lay.f_slices[jn]]

    def cyclic(w):
        return np.asarray(w, dtype=float)[perm]

    gf.symmetry = {"cyclic": k}
    gf.sym_ops = {"cyclic": cyclic}
    gf.meta["kind"] = "sharp"
    gf.meta["factor"] = F
    gf.meta["k"] = k
    return gf


def gf_time_one(amb, rho, max_angle=math.pi / 2):
    """Generating function of the time-1 truncated radial map, built from the
    smallest odd number K of equal time slices whose per-slice rotation stays
    below `max_angle` (so each slice admits the fibreless midpoint form)."""
    peak = RadialMap(amb, rho, 1.0).max_rotation()
    K = max(1, int(math.ceil(peak / max_angle)))
    if K % 2 == 0:
        K += 1
    while peak / K >= max_angle:
        K += 2
    slices = [gf_small_map(amb, RadialMap(amb, rho, 1.0 / K)) for _ in range(K)]
    gf = gf_compose_chain(slices)
    gf.meta["slices"] = K
    gf.map_handle = ComposedMap([RadialMap(amb, rho, 1.0 / K) for _ in range(K)])
    return gf


def fibre_critical_config(F, zbar):
    """Fibre-critical configuration of F over the orbit of zbar:
    returns (base, zeta) with base = (zbar + phi(zbar))/2.

    For a cyclic composition the slice chain y_{s+1} = phi_s(y_s) determines
    the variables by cyclic alternating sums of the slice midpoints."""
    zbar = np.asarray(zbar, dtype=float)
    if F.meta.get("kind") == "cyclicComposition" or F.meta.get("kind") == "sharp":
        lay = F.meta["layout"]
        factors = F.meta["factors"]
        K = lay.K
        ys = [zbar]
        for f in factors:
            ys.append(f.map_handle(ys[-1]))
        mids = [0.5 * (ys[s] + ys[s + 1]) for s in range(K)]
        ws = alternating_resolve(mids)
        zeta_parts = []
        for j, f in enumerate(factors):
            if f.fibre_dim:
                sub_base, sub_zeta = fibre_critical_config(f, ys[j])
                zeta_parts.append(sub_zeta)
        inner = [np.concatenate(zeta_parts)] if zeta_parts else []
        zeta = np.concatenate(ws[1:] + inner) if K > 1 else (
            inner[0] if inner else np.zeros(0))
        return ws[0], zeta
    mp = F.map_handle
    base = 0.5 * (zbar + mp(zbar))
    return base, np.zeros(0)


def alternating_resolve(mids):
    """Given K midpoints (K odd), return the unique w_1..w_K with
    (w_s + w_{s+1})/2 = mids_s cyclically: w_s = sum_l (-1)^l mids_{s+l}."""
    K = len(mids)
    if K % 2 == 0:
        raise EvenFactorCount("alternating resolution needs an odd count")
    out = []
    for s in range(K):
        acc = np.zeros_like(np.asarray(mids[0], dtype=float))
        for l in range(K):
            acc += ((-1) ** l) * np.asarray(mids[(s + l) % K], dtype=float)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# contact-side generating functions
# ---------------------------------------------------------------------------

def contact_lift_gf(f):
    """Lift a normalized symplectic-base generating function to contact base
    (x, y, theta): the value is theta-independent, hence 1-periodic."""
    if not f.normalized:
        raise NotNormalized("contact lifting requires a normalized function")
    n2 = f.base_dim
    th = n2               # index of theta in the contact layout [z, theta, zeta]

    def strip(w):
        return np.concatenate([w[:n2], w[th + 1:]])

    def value(w):
        return f.value(strip(w))

    def grad(w):
        g = f.grad(strip(w))
        return np.concatenate([g[:n2], [0.0], g[n2:]])

    def hess(w):
        H = f.hess(strip(w))
        out = np.zeros((len(w), len(w)))
        idx = np.concatenate([np.arange(n2), np.arange(th + 1, len(w))])
        out[np.ix_(idx, idx)] = H
        return out

    def domain_point(w):
        zbar = f.domain_point(strip(w))
        return np.concatenate([zbar, [w[th]]])

    gf = GenFn(base_dim=n2 + 1, fibre_dim=f.fibre_dim, value=value, grad=grad,
               hess=hess, quad_part=f.quad_part, norm_shift=0.0,
               normalized=True, map_handle=f.map_handle,
               domain_point=domain_point, contact=True,
               meta={"kind": "contactLift", "factor": f})
    return gf


def reeb_shift(F, t):
    """Generating function of Reeb_t composed with F's map: F - t."""
    gf = GenFn(base_dim=F.base_dim, fibre_dim=F.fibre_dim,
               value=lambda w: F.value(w) - t, grad=F.grad, hess=F.hess,
               quad_part=F.quad_part, norm_shift=F.norm_shift + t,
               normalized=False if t != 0.0 else F.normalized,
               map_handle=F.map_handle, domain_point=F._domain_point,
               contact=F.contact,
               meta=dict(F.meta, kind="reebShift", offset=t, factor=F))
    return gf


class _ContactLayout:
    """Index bookkeeping for w = [B_1 .. B_k | zeta_1 .. zeta_k] with
    B_j = (z_j in R^{2n}, theta_j, r_j)."""

    def __init__(self, n2, k, fibre_dim):
        self.n2 = n2
        self.k = k
        self.N = fibre_dim
        b = n2 + 2
        self.z = [slice(j * b, j * b + n2) for j in range(k)]
        self.th = [j * b + n2 for j in range(k)]
        self.r = [j * b + n2 + 1 for j in range(k)]
        off = k * b
        self.f = [slice(off + j * fibre_dim, off + (j + 1) * fibre_dim)
                  for j in range(k)]
        self.total = off + k * fibre_dim


def contact_sharp(F, k):
    """Cyclic contact composition F^{#k} of a contact-base factor (k odd):

        sum_j [ e^{r_j} F(e^{-r_j/2}(z_j+z_{j+1})/2, theta_{j+1}, zeta_j)
                + 0.5 <z_j, J0 z_{j+1}> + e^{r_{j-1}}(theta_j - theta_{j+1}) ]

    (cyclic indices, r_0 = r_k).  Exactly homogeneous under the R-action
    (z |-> e^{a/2} z, r |-> r + a): the value scales by e^a."""
    if k % 2 == 0 or k < 1:
        raise EvenK("contact_sharp requires odd k >= 1")
    if not F.contact:
        raise DomainError("contact_sharp needs a contact-base factor")
    n2 = F.base_dim - 1
    N = F.fibre_dim
    lay = _ContactLayout(n2, k, N)
    J0 = j0_matrix(n2)

    def slots(w):
        out = []
        for j in range(k):
            jn = (j + 1) % k
            r = w[lay.r[j]]
            e = math.exp(r)
            h = math.exp(0.5 * r)
            u = 0.5 * (w[lay.z[j]] + w[lay.z[jn]]) / h
            args = np.concatenate([u, [w[lay.th[jn]]], w[lay.f[j]]])
            out.append((e, h, u, args))
        return out

    def value(w):
        total = 0.0
        sl = slots(w)
        for j in range(k):
            jn = (j + 1) % k
            jp = (j - 1) % k
            e, _, _, args = sl[j]
            total += e * F.value(args)
            total += 0.5 * float(np.dot(w[lay.z[j]], j0_apply(w[lay.z[jn]])))
            total += math.exp(w[lay.r[jp]]) * (w[lay.th[j]] - w[lay.th[jn]])
        return total

    def grad(w):
        g = np.zeros(lay.total)
        sl = slots(w)
        for j in range(k):
            jn = (j + 1) % k
            jp = (j - 1) % k
            e, h, u, args = sl[j]
            gF = F.grad(args)
            Fu, Fth, Ff = gF[:n2], gF[n2], gF[n2 + 1:]
            val = F.value(args)
            g[lay.z[j]] += 0.5 * h * Fu
            g[lay.z[jn]] += 0.5 * h * Fu
            g[lay.th[jn]] += e * Fth
            g[lay.f[j]] += e * Ff
            g[lay.r[j]] += e * (val - 0.5 * float(np.dot(Fu, u)))
            g[lay.z[j]] += 0.5 * j0_apply(w[lay.z[jn]])
            g[lay.z[jn]] -= 0.5 * j0_apply(w[lay.z[j]])
            ep = math.exp(w[lay.r[jp]])
            g[lay.th[j]] += ep
            g[lay.th[jn]] -= ep
            g[lay.r[jp]] += ep * (w[lay.th[j]] - w[lay.th[jn]])
        return g

    def hess(w):
        H = np.zeros((lay.total, lay.total))
        sl = slots(w)
        for j in range(k):
            jn = (j + 1) % k
            jp = (j - 1) % k
            e, h, u, args = sl[j]
            val = F.value(args)
            gF = F.grad(args)
            Fu, Fth, Ff = gF[:n2], gF[n2], gF[n2 + 1:]
            HF = F.hess(args)
            Huu = HF[:n2, :n2]
            Huth = HF[:n2, n2]
            Huf = HF[:n2, n2 + 1:]
            Hthth = HF[n2, n2]
            Hthf = HF[n2, n2 + 1:]
            Hff = HF[n2 + 1:, n2 + 1:]
            zs = (lay.z[j], lay.z[jn])
            # (z, z)
            for a in zs:
                for b in zs:
                    H[a, b] += 0.25 * Huu
            # (z, theta_{jn}) both orders
            vzth = 0.5 * h * Huth
            for a in zs:
                H[a, lay.th[jn]] += vzth
                H[lay.th[jn], a] += vzth
            # (z, zeta_j)
            mzf = 0.5 * h * Huf
            for a in zs:
                H[a, lay.f[j]] += mzf
                H[lay.f[j], a] += mzf.T
            # (z, r_j)
            vzr = 0.25 * h * (Fu - Huu @ u)
            for a in zs:
                H[a, lay.r[j]] += vzr
                H[lay.r[j], a] += vzr
            # (theta, theta), (theta, zeta), (theta, r_j)
            H[lay.th[jn], lay.th[jn]] += e * Hthth
            H[lay.th[jn], lay.f[j]] += e * Hthf
            H[lay.f[j], lay.th[jn]] += e * Hthf
            vthr = e * (Fth - 0.5 * float(np.dot(Huth, u)))
            H[lay.th[jn], lay.r[j]] += vthr
            H[lay.r[j], lay.th[jn]] += vthr
            # (zeta, zeta), (zeta, r_j)
            H[lay.f[j], lay.f[j]] += e * Hff
            vfr = e * (Ff - 0.5 * (Huf.T @ u))
            H[lay.f[j], lay.r[j]] += vfr
            H[lay.r[j], lay.f[j]] += vfr
            # (r_j, r_j)
            H[lay.r[j], lay.r[j]] += e * (
                val - 0.75 * float(np.dot(Fu, u))
                + 0.25 * float(u @ Huu @ u))
            # twist
            H[lay.z[j], lay.z[jn]] += 0.5 * J0
            H[lay.z[jn], lay.z[j]] += 0.5 * J0.T
            # theta-difference term with weight e^{r_{jp}}
            ep = math.exp(w[lay.r[jp]])
            H[lay.th[j], lay.r[jp]] += ep
            H[lay.r[jp], lay.th[j]] += ep
            H[lay.th[jn], lay.r[jp]] -= ep
            H[lay.r[jp], lay.th[jn]] -= ep
            H[lay.r[jp], lay.r[jp]] += ep * (w[lay.th[j]] - w[lay.th[jn]])
        return H

    # quadratic part: factor fibre quadratics plus the twist on z_2..z_k,
    # recorded on the (z-fibre, zeta) subspace at the r = 0 slice.
    fdim = (k - 1) * n2 + k * N
    Q = np.zeros((fdim, fdim))
    zoff = [(j - 1) * n2 for j in range(1, k)]
    for j in range(1, k - 1):      # pairs (z_j, z_{j+1}) with both slots >= 2
        a = slice(zoff[j - 1], zoff[j - 1] + n2)
        b = slice(zoff[j], zoff[j] + n2)
        Q[a, b] += 0.25 * J0
        Q[b, a] += 0.25 * J0.T
    foff = (k - 1) * n2
    for j in range(k):
        s = slice(foff + j * N, foff + (j + 1) * N)
        Q[s, s] = F.quad_part

    perm = np.arange(lay.total)
    for j in range(k):
        jn = (j + 1) % k
        perm[lay.z[j]] = np.arange(lay.total)[lay.z[jn]]
        perm[lay.th[j]] = lay.th[jn]
        perm[lay.r[j]] = lay.r[jn]
        perm[lay.f[j]] = np.arange(lay.total)[lay.f[jn]]

    def cyclic(w):
        return np.asarray(w, dtype=float)[perm]

    def r_action(w, a):
        w = np.asarray(w, dtype=float).copy()
        scale = math.exp(0.5 * a)
        for j in range(k):
            w[lay.z[j]] *= scale
            w[lay.r[j]] += a
        return w

    def z_shift(w):
        w = np.asarray(w, dtype=float).copy()
        for j in range(k):
            w[lay.th[j]] += 1.0
        return w

    def domain_point(w):
        sl = slots(w)
        out = []
        for j in range(k):
            jn = (j + 1) % k
            _, _, u, args = sl[j]
            out.append(F.domain_point(
                np.concatenate([u, [w[lay.th[jn]]], w[lay.f[j]]])))
        return out

    qidx = np.concatenate(
        [np.arange(lay.total)[lay.z[j]] for j in range(1, k)]
        + [np.arange(lay.total)[lay.f[j]] for j in range(k)]).astype(int)
    gf = GenFn(base_dim=n2 + 1, fibre_dim=lay.total - (n2 + 1), value=value,
               grad=grad, hess=hess, quad_part=Q, quad_indices=qidx,
               normalized=F.normalized, map_handle=F.map_handle,
               domain_point=None, contact=True,
               symmetry={"cyclic": k, "rHomogeneous": True, "zPeriodic": True},
               sym_ops={"cyclic": cyclic, "r_action": r_action,
                        "z_shift": z_shift},
               meta={"kind": "contactSharp", "k": k, "layout": lay,
                     "factor": F, "slot_domain_points": domain_point})
    gf.norm_shift = 0.0
    return gf


def contact_p(F, k):
    """Conformally corrected cyclic composition

        P = (k / sum_j e^{r_j}) * F^{#k},

    invariant (exactly, up to round-off) under the cyclic Z_k block rotation,
    the R-action (z |-> e^{a/2} z, r |-> r + a), and the Z-action
    (all theta_j |-> theta_j + 1)."""
    sharp = contact_sharp(F, k)
    lay = sharp.meta["layout"]

    def escale(w):
        return np.array([math.exp(w[lay.r[j]]) for j in range(k)])

    def value(w):
        return (k / float(np.sum(escale(w)))) * sharp.value(w)

    def grad(w):
        es = escale(w)
        E = float(np.sum(es))
        c = k / E
        V = sharp.value(w)
        g = c * sharp.grad(w)
        for j in range(k):
            g[lay.r[j]] += V * (-c * es[j] / E)
        return g

    def hess(w):
        es = escale(w)
        E = float(np.sum(es))
        c = k / E
        V = sharp.value(w)
        gV = sharp.grad(w)
        HV = sharp.hess(w)
        gc = np.zeros(lay.total)
        for j in range(k):
            gc[lay.r[j]] = -c * es[j] / E
        H = c * HV + np.outer(gc, gV) + np.outer(gV, gc)
        for j in range(k):
            for l in range(k):
                Hc = 2.0 * c * es[j] * es[l] / E**2
                if j == l:
                    Hc -= c * es[j] / E
                H[lay.r[j], lay.r[l]] += V * Hc
        return H

    gf = GenFn(base_dim=sharp.base_dim, fibre_dim=sharp.fibre_dim,
               value=value, grad=grad, hess=hess, quad_part=sharp.quad_part,
               quad_indices=sharp.quad_indices,
               normalized=sharp.normalized, map_handle=sharp.map_handle,
               contact=True,
               symmetry={"cyclic": k, "rAction": True, "zAction": True},
               sym_ops=dict(sharp.sym_ops),
               meta={"kind": "contactP", "k": k, "layout": lay,
                     "factor": F, "sharp": sharp,
                     "slot_domain_points": sharp.meta["slot_domain_points"]})
    gf.norm_shift = 0.0
    return gf
