"""Numerical critical-point detection and classification.

Critical points of the cyclic composition F^{#k} encode k-periodic orbits of
the underlying map: at a fibre-critical configuration the slot midpoints
(z_j + z_{j+1})/2 reconstruct domain points X_1, ..., X_k with
X_{j+1} = phi(X_j) cyclically, and the critical value equals the total
primitive sum_j S(X_j).  Critical points of the scale-normalized contact
composition P encode translated chains, with critical value t*k.

The classifiers here measure Morse data honestly: eigenvalues of the full
Hessian, a relative zero threshold (1e-8 times the spectral radius), and a
Morse-Bott verdict that requires a clear relative spectral gap (1e-4) between
the null cluster and the rest of the spectrum.  Expected nullities are
2n - 1 on sphere shells of F^{#k} (the orbit sphere), 0 at isolated points,
and the gauge dimension for chain families of P.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DomainError, GaugeDegenerate, NoConvergence,
                     NotFibreCritical, OrbitRelationViolated)
from .genfun import alternating_resolve, fibre_critical_config, sharp_k

# Relative eigenvalue threshold below which a Hessian direction counts as null.
ZERO_TOL_REL = 1e-8
# Minimal relative spectral gap between the null cluster and the rest for a
# critical manifold to be declared Morse-Bott nondegenerate.
MORSE_BOTT_GAP = 1e-4


@dataclass
class CriticalManifold:
    """A detected critical set: one representative plus its Morse data.

    kind is "isolated", "sphereShell", or "chainFamily"; zk_orbit records
    whether the cyclic permutation moves the representative ("free") or fixes
    it ("fixed"); linked_orbit_id ties a chain family back to the enumerated
    translated chain it realizes.
    """

    kind: str
    representative: np.ndarray
    value: float
    index: int
    nullity: int
    zk_orbit: str = "fixed"
    linked_orbit_id: Optional[str] = None
    maslov: Optional[int] = None
    l: Optional[int] = None
    gap: Optional[float] = None
    morse_bott: bool = True
    diagnostics: dict = field(default_factory=dict)


def classify_hessian(evals):
    """Morse data (index, nullity, relative gap, Morse-Bott verdict) from a
    Hessian spectrum, using the relative zero threshold."""
    evals = np.asarray(evals, dtype=float)
    radius = float(np.max(np.abs(evals))) if evals.size else 0.0
    if radius == 0.0:
        return 0, int(evals.size), None, False
    zero_tol = ZERO_TOL_REL * radius
    index = int(np.sum(evals < -zero_tol))
    nullity = int(np.sum(np.abs(evals) <= zero_tol))
    nonzero = np.abs(evals)[np.abs(evals) > zero_tol]
    gap = float(np.min(nonzero) / radius) if nonzero.size else None
    morse_bott = nullity == 0 or (gap is not None and gap >= MORSE_BOTT_GAP)
    return index, nullity, gap, morse_bott


def _zk_orbit(G, w, tol=1e-8):
    """"free" when the cyclic permutation moves w, "fixed" otherwise (or when
    G carries no cyclic action)."""
    op = getattr(G, "sym_ops", {}).get("cyclic")
    if op is None:
        return "fixed"
    moved = float(np.max(np.abs(op(w) - w))) if len(w) else 0.0
    return "free" if moved > tol else "fixed"


def _auto_maslov(G, index, nullity):
    """Maslov number, and the shell label when the manifold is an orbit
    sphere (nullity 2n-1), for a cyclic self-composition whose factor has a
    nondegenerate fibre quadratic form; (None, None) otherwise."""
    meta = getattr(G, "meta", {})
    if meta.get("kind") != "sharp":
        return None, None
    factor = meta["factor"]
    if factor.quad_degenerate:
        return None, None
    k = meta["k"]
    iota = factor.quad_index
    n = factor.base_dim // 2
    nu = maslov(index, k, iota, n)
    on_shell = nullity == 2 * n - 1 and nu > 0 and nu % (2 * n) == 0
    l = nu // (2 * n) if on_shell else None
    return nu, l


def newton_critical(G, seed, tol=1e-10, max_iter=100):
    """Damped Newton descent on grad G from seed; classifies the limit.

    Steps solve (H + lam*I) s = -g in the least-squares sense, so singular
    Hessian directions (critical manifolds) are handled by the minimum-norm
    step; lam grows when a step fails to shrink the gradient and shrinks on
    success.  Raises NoConvergence after max_iter iterations.
    """
    w = np.asarray(seed, dtype=float).copy()
    if not np.all(np.isfinite(w)):
        raise DomainError("newton_critical needs a finite seed")
    lam = 0.0
    gnorm = float(np.max(np.abs(G.grad(w)))) if len(w) else 0.0
    converged = gnorm < tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        g = G.grad(w)
        H = G.hess(w)
        accepted = False
        for _ in range(12):
            M = H + lam * np.eye(len(w))
            step = np.linalg.lstsq(M, -g, rcond=None)[0]
            trial = w + step
            tnorm = float(np.max(np.abs(G.grad(trial))))
            if np.isfinite(tnorm) and (tnorm < gnorm or tnorm < tol):
                w, gnorm = trial, tnorm
                lam = lam / 3.0 if lam > 1e-12 else 0.0
                accepted = True
                break
            lam = 1e-4 if lam < 1e-12 else lam * 10.0
        if not accepted:
            raise NoConvergence(
                "newton_critical stalled at |grad| = %.3e" % gnorm)
        if gnorm < tol:
            converged = True
    if not converged:
        raise NoConvergence(
            "newton_critical: |grad| = %.3e after %d iterations"
            % (gnorm, max_iter))

    evals = np.linalg.eigvalsh(G.hess(w))
    index, nullity, gap, morse_bott = classify_hessian(evals)
    nu, l = _auto_maslov(G, index, nullity)
    return CriticalManifold(
        kind="isolated" if nullity == 0 else "sphereShell",
        representative=w, value=float(G.value(w)), index=index,
        nullity=nullity, zk_orbit=_zk_orbit(G, w), maslov=nu, l=l,
        gap=gap, morse_bott=morse_bott,
        diagnostics={"grad_norm": gnorm, "iterations": it})


def reconstruct(F, k, p, tol=1e-8):
    """k-periodic orbit encoded by a critical point p of F^{#k}.

    Checks fibre-criticality of p, reads off the slot midpoints, maps each
    through the factor's fibre-critical domain-point chart, and verifies the
    orbit relation X_{j+1} = phi(X_j) (cyclically, so closure included).
    """
    sharp = sharp_k(F, k)
    p = np.asarray(p, dtype=float)
    g = sharp.grad(p)
    fibre_part = g[sharp.base_dim:]
    worst = float(np.max(np.abs(fibre_part))) if fibre_part.size else 0.0
    if worst > tol:
        raise NotFibreCritical(
            "fibre gradient norm %.3e exceeds %.1e" % (worst, tol))

    if k == 1:
        points = [F.domain_point(p)]
    else:
        lay = sharp.meta["layout"]
        points = [F.domain_point(lay.factor_args(p, j)) for j in range(k)]

    phi = F.map_handle
    if phi is None:
        raise DomainError("reconstruct needs the factor's map handle")
    worst = 0.0
    for j in range(k):
        step = phi(points[j])
        worst = max(worst, float(np.max(np.abs(step - points[(j + 1) % k]))))
    if worst > 1e-8:
        raise OrbitRelationViolated(
            "orbit relation residual %.3e exceeds 1e-8" % worst)
    return points


def check_value(F, k, p):
    """|F^{#k}(p) - sum_j S(X_j)| for the orbit reconstructed from p; the
    correspondence theorem says this is zero for normalized F."""
    points = reconstruct(F, k, p)
    phi = F.map_handle
    total = sum(float(phi.S(x)) for x in points)
    sharp = sharp_k(F, k)
    return abs(float(sharp.value(np.asarray(p, dtype=float))) - total)


def maslov(index_of_hessian, k, iota, n):
    """Maslov-type number of a critical point of F^{#k}: the measured Hessian
    index minus the composition's fibre bookkeeping k*iota + n(k-1)."""
    return int(index_of_hessian) - k * int(iota) - int(n) * (k - 1)


def sharp_critical_seed(F, k, zbar1):
    """Analytic critical seed of F^{#k} over the phi-orbit of zbar1: slice
    each orbit point into its fibre-critical configuration, then resolve the
    cyclic midpoint system for the outer z-blocks."""
    phi = F.map_handle
    orbit = [np.asarray(zbar1, dtype=float)]
    for _ in range(k - 1):
        orbit.append(phi(orbit[-1]))
    bases, zetas = [], []
    for j in range(k):
        b, zeta = fibre_critical_config(F, orbit[j])
        bases.append(b)
        zetas.append(zeta)
    return np.concatenate(alternating_resolve(bases) + zetas)


def seed_from_chain(P, chain):
    """Critical seed of the scale-normalized contact composition P at a
    translated chain: outer z-blocks from the resolved slot midpoints, block
    thetas from the chain, r = 0, fibres from per-slot fibre-critical
    configurations of the underlying symplectic factor."""
    lay = P.meta["layout"]
    k = P.meta["k"]
    if chain.k != k:
        raise DomainError("chain period %d does not match P (k = %d)"
                          % (chain.k, k))
    lift = P.meta["sharp"].meta["factor"]
    factor = lift.meta["factor"]
    bases, zetas = [], []
    for pt in chain.points:
        b, zeta = fibre_critical_config(factor, pt.base)
        bases.append(b)
        zetas.append(zeta)
    zouter = alternating_resolve(bases)
    w = np.zeros(P.total_dim)
    for j in range(k):
        w[lay.z[j]] = zouter[j]
        w[lay.th[j]] = chain.points[j].theta
        w[lay.f[j]] = zetas[j]
    return w


def chain_scan(P, k, seeds, chains=None, tol=1e-9, max_iter=100):
    """Gauge-fixed Newton scan of the contact composition P from the given
    seeds; one representative per critical family.

    The stationarity system {grad P = 0} is invariant under the scale action,
    common theta translation, and (on shells) the loop of chain rotations, so
    plain Newton has a rank-deficient Hessian everywhere on a family.  The
    scan fixes the first two with the linear gauges sum_j r_j = 0 and
    theta_1 = 0 and solves the bordered system by least squares, which leaves
    motion along the remaining family directions free but convergent.

    Families are merged by critical value (distance 1e-6); each manifold
    records value = t*k, the measured full-Hessian nullity (the gauge
    dimension of the family), and — when `chains` from the analytic
    enumeration are supplied — the orbit id of the matching translated chain.
    """
    if not getattr(P, "contact", False) or "layout" not in P.meta:
        raise DomainError("chain_scan needs a contact cyclic composition")
    if k % 2 == 0 or k < 1:
        raise DomainError("chain_scan requires odd k >= 1")
    lay = P.meta["layout"]
    dim = P.total_dim

    A = np.zeros((2, dim))
    for j in range(k):
        A[0, lay.r[j]] = 1.0
    A[1, lay.th[0]] = 1.0
    if np.linalg.matrix_rank(A) < 2:
        raise GaugeDegenerate("gauge rows are linearly dependent")

    found = []
    for seed in seeds:
        w = np.asarray(seed, dtype=float).copy()
        converged = False
        for _ in range(max_iter):
            g = P.grad(w)
            c = A @ w
            if max(np.max(np.abs(g)), np.max(np.abs(c))) < tol:
                converged = True
                break
            H = P.hess(w)
            M = np.block([[H, A.T], [A, np.zeros((2, 2))]])
            rhs = -np.concatenate([g, c])
            sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
            step = sol[:dim]
            # Backtrack if the full step overshoots the gradient norm.
            base = float(np.max(np.abs(g)))
            scale = 1.0
            for _ in range(8):
                trial = w + scale * step
                tn = float(np.max(np.abs(P.grad(trial))))
                if np.isfinite(tn) and (tn < base or tn < tol):
                    w = trial
                    break
                scale *= 0.5
            else:
                break
        if not converged:
            raise NoConvergence(
                "chain_scan seed failed: |grad| = %.3e"
                % float(np.max(np.abs(P.grad(w)))))

        value = float(P.value(w))
        if any(abs(value - m.value) < 1e-6 for m in found):
            continue
        evals = np.linalg.eigvalsh(P.hess(w))
        index, nullity, gap, morse_bott = classify_hessian(evals)
        mani = CriticalManifold(
            kind="chainFamily", representative=w, value=value, index=index,
            nullity=nullity, zk_orbit=_zk_orbit(P, w), gap=gap,
            morse_bott=morse_bott,
            diagnostics={"t": value / k,
                         "grad_norm": float(np.max(np.abs(P.grad(w))))})
        if chains is not None:
            for ch in chains:
                if abs(ch.action - value) < 1e-6:
                    mani.linked_orbit_id = ch.orbit_id
                    match = re.fullmatch(r"shell-l(\d+)", ch.orbit_id)
                    mani.l = int(match.group(1)) if match else 0
                    break
        found.append(mani)
    found.sort(key=lambda m: m.value)
    return found


def to_csv(manifolds, path=None):
    """Write critical data as CSV with columns
    (kind, l, value, index, nullity, maslov, orbit); returns the text when no
    path is given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "l", "value", "index", "nullity", "maslov",
                     "orbit"])
    for m in manifolds:
        writer.writerow([
            m.kind,
            "" if m.l is None else m.l,
            "%.12g" % m.value,
            m.index,
            m.nullity,
            "" if m.maslov is None else m.maslov,
            m.zk_orbit,
        ])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
