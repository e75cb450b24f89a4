"""Generating functions: generation identities, compositions, contact forms."""

import math

import numpy as np
import pytest

from gfs import (Ambient, AngleOutOfRange, DomainError, EvenFactorCount, EvenK,
                 LinearRotation, NotNormalized, RadialMap, contact_lift_gf,
                 contact_p, contact_sharp, fibre_critical_config,
                 gf_compose_chain, gf_linear_rotation, gf_small_map,
                 gf_time_one, graph_of, reeb_shift, sharp_k)
from gfs.genfun import alternating_resolve

from conftest import fd_grad, fd_hess


def test_linear_rotation_generates_its_graph(amb1):
    gf = gf_linear_rotation(amb1, [0.8])
    mp = gf.map_handle
    rng = np.random.default_rng(0)
    for _ in range(10):
        z = rng.normal(0.0, 1.0, 2)
        gp = graph_of(mp, z)
        # the base variable of a fibreless gf is the graph base itself
        assert np.allclose(gf.grad(gp.base), gp.covector, atol=1e-13)
    with pytest.raises(AngleOutOfRange):
        gf_linear_rotation(amb1, [math.pi])


def test_small_map_generates_its_graph(amb1, rho_ref):
    phi = RadialMap(amb1, rho_ref, 0.2)
    gf = gf_small_map(amb1, phi)
    rng = np.random.default_rng(1)
    for _ in range(10):
        z = rng.normal(0.0, 0.6, 2)
        gp = graph_of(phi, z)
        assert np.allclose(gf.grad(gp.base), gp.covector, atol=1e-10)
        # value = primitive + half symplectic cross term
        assert gf.value(gp.base) == pytest.approx(
            phi.S(z) + 0.5 * (z[0] * phi(z)[1] - z[1] * phi(z)[0]),
            rel=1e-10, abs=1e-12)
    # exact Hessian vs finite differences
    q = np.array([0.31, -0.12])
    assert np.allclose(gf.hess(q), fd_hess(gf.grad, q), atol=1e-6)


def test_compose_chain_parity_guard(amb1, rho_ref):
    phi = RadialMap(amb1, rho_ref, 0.5)
    g = gf_small_map(amb1, phi)
    with pytest.raises(EvenFactorCount):
        gf_compose_chain([g, g])


def test_alternating_resolve_inverts_midpoints():
    rng = np.random.default_rng(2)
    ws = [rng.normal(size=2) for _ in range(5)]
    mids = [0.5 * (ws[s] + ws[(s + 1) % 5]) for s in range(5)]
    back = alternating_resolve(mids)
    for a, b in zip(ws, back):
        assert np.allclose(a, b, atol=1e-14)
    with pytest.raises(EvenFactorCount):
        alternating_resolve(mids[:4])


def test_time_one_slices_and_generation(F, amb1, rho_ref):
    # five slices keep each rotation under pi/2 for c = -0.9 pi
    assert F.meta["K"] == 5
    assert F.base_dim == 2 and F.fibre_dim == 4 * 2
    phi = F.map_handle
    whole = RadialMap(amb1, rho_ref, 1.0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        z = rng.normal(0.0, 0.55, 2)
        assert np.allclose(phi(z), whole(z), atol=1e-10)
        base, zeta = fibre_critical_config(F, z)
        w = np.concatenate([base, zeta])
        g = F.grad(w)
        gp = graph_of(phi, z)
        assert np.max(np.abs(g[2:])) < 1e-10          # fibre-critical
        assert np.allclose(base, gp.base, atol=1e-10)  # over the graph base
        assert np.allclose(g[:2], gp.covector, atol=1e-10)
        assert F.value(w) == pytest.approx(
            whole.S(z) + 0.5 * (z[0] * whole(z)[1] - z[1] * whole(z)[0]),
            rel=1e-9, abs=1e-11)


def test_composed_grad_hess_consistency(F):
    rng = np.random.default_rng(4)
    w = rng.normal(0.0, 0.4, F.total_dim)
    assert np.allclose(F.grad(w), fd_grad(F.value, w), atol=1e-7)
    assert np.allclose(F.hess(w), fd_hess(F.grad, w), atol=1e-6)


def test_far_field_is_quadratic(F):
    # Outside a bounded region all slice maps are the identity, so F is
    # exactly (fibre quadratic) + (terms linear in the fibre): the gradient
    # difference from the quadratic extension must be constant along fibre
    # rays.  That bounded remainder is what record_far_field_bound measures.
    bound = F.record_far_field_bound()
    assert np.isfinite(bound) and bound >= 1.0
    rng = np.random.default_rng(5)
    q = rng.normal(0.0, 1.0, 2)
    direction = rng.normal(size=F.fibre_dim)
    direction /= np.linalg.norm(direction)
    diffs = []
    for scale in (80.0, 160.0):
        w = np.concatenate([q, scale * direction])
        diffs.append((F.grad(w) - F.quad_extension_grad(w))[F.base_dim:])
    assert np.allclose(diffs[0], diffs[1], atol=1e-9)


def test_sharp_structure_and_parity(F, F3):
    assert F3.meta["kind"] == "sharp" and F3.meta["k"] == 3
    assert F3.base_dim == 2
    assert F3.total_dim == 3 * F.total_dim
    with pytest.raises(EvenK):
        sharp_k(F, 2)


def test_sharp_cyclic_invariance_sample(F3):
    rng = np.random.default_rng(6)
    cyc = F3.sym_ops["cyclic"]
    for _ in range(25):
        w = rng.normal(0.0, 0.5, F3.total_dim)
        assert F3.value(cyc(w)) == pytest.approx(F3.value(w), abs=1e-12)


def test_reeb_shift_bookkeeping(F):
    G = reeb_shift(F, 0.7)
    w = np.zeros(F.total_dim)
    assert G.value(w) == pytest.approx(F.value(w) - 0.7)
    assert not G.normalized and G.norm_shift == pytest.approx(0.7)
    with pytest.raises(NotNormalized):
        contact_lift_gf(G)


def test_contact_lift_theta_independent(F):
    L = contact_lift_gf(F)
    assert L.contact and L.base_dim == 3
    rng = np.random.default_rng(7)
    w = rng.normal(0.0, 0.5, L.total_dim)
    v0 = L.value(w)
    for th in (0.0, 0.3, -1.7):
        w2 = w.copy()
        w2[2] = th
        assert L.value(w2) == v0
    g = L.grad(w)
    assert g[2] == 0.0


def _rotation_contact_sharp(k=3, angle=0.8):
    amb = Ambient(n=1, R=1.0)
    base = gf_linear_rotation(amb, [angle])
    return contact_sharp(contact_lift_gf(base), k)


def test_contact_sharp_exact_homogeneity():
    G = _rotation_contact_sharp()
    ops = G.sym_ops
    rng = np.random.default_rng(8)
    for _ in range(25):
        w = rng.normal(0.0, 0.7, G.total_dim)
        a = float(rng.normal())
        assert G.value(ops["r_action"](w, a)) == pytest.approx(
            math.exp(a) * G.value(w), rel=1e-12, abs=1e-12)
        assert G.value(ops["cyclic"](w)) == pytest.approx(G.value(w),
                                                          abs=1e-12)
        assert G.value(ops["z_shift"](w)) == pytest.approx(G.value(w),
                                                           abs=1e-12)
    with pytest.raises(EvenK):
        _rotation_contact_sharp(k=2)


def test_contact_sharp_grad_hess_consistency():
    G = _rotation_contact_sharp()
    rng = np.random.default_rng(9)
    w = rng.normal(0.0, 0.5, G.total_dim)
    assert np.allclose(G.grad(w), fd_grad(G.value, w), atol=1e-7)
    assert np.allclose(G.hess(w), fd_hess(G.grad, w), atol=1e-6)


def test_p_is_conformal_correction_of_sharp(P3, F):
    sharp = P3.meta["sharp"]
    lay = P3.meta["layout"]
    k = P3.meta["k"]
    rng = np.random.default_rng(10)
    for _ in range(10):
        w = rng.normal(0.0, 0.5, P3.total_dim)
        scale = k / float(np.sum(np.exp(w[lay.r])))
        assert P3.value(w) == pytest.approx(scale * sharp.value(w),
                                            rel=1e-12, abs=1e-12)
    # with all r = 0 the correction is exactly 1
    w0 = rng.normal(0.0, 0.5, P3.total_dim)
    w0[lay.r] = 0.0
    assert P3.value(w0) == sharp.value(w0)


def test_p_invariances_sample(P3):
    ops = P3.sym_ops
    rng = np.random.default_rng(11)
    for _ in range(25):
        w = rng.normal(0.0, 0.5, P3.total_dim)
        v = P3.value(w)
        assert P3.value(ops["cyclic"](w)) == pytest.approx(v, abs=1e-12)
        assert P3.value(ops["r_action"](w, 0.7)) == pytest.approx(v, abs=1e-12)
        assert P3.value(ops["z_shift"](w)) == pytest.approx(v, abs=1e-12)


def test_p_grad_hess_consistency(P3):
    rng = np.random.default_rng(12)
    w = rng.normal(0.0, 0.3, P3.total_dim)
    assert np.allclose(P3.grad(w), fd_grad(P3.value, w), atol=2e-6)
    assert np.allclose(P3.hess(w), fd_hess(P3.grad, w), atol=2e-5)


def test_descriptor_keys(F):
    d = F.descriptor()
    assert d["baseDim"] == 2 and d["fibreDim"] == 8
    assert d["normalized"] is True and d["contact"] is False
    assert d["quadIndex"] == F.quad_index


def test_domain_point_requires_handle(amb1):
    from gfs import GenFn
    g = GenFn(base_dim=2, fibre_dim=0, value=lambda w: 0.0,
              grad=lambda w: np.zeros(2), hess=lambda w: np.zeros((2, 2)),
              quad_part=np.zeros((0, 0)))
    with pytest.raises(DomainError):
        g.domain_point(np.zeros(2))