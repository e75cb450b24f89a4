#!/usr/bin/env python3
"""
Finding and classifying the critical sets.

Each k-periodic component of the flow shows up as a critical manifold of the
k-fold composition: shells give orbit spheres (nullity 2n-1), the origin an
isolated point.  A damped Newton solver converges onto them from rough
seeds; the Hessian eigenvalues then give the Morse-Bott index, and a fixed
normalization (subtract k*iota + n(k-1) from the measured index) recovers
the geometric degree 2nl.

On the contact side the search runs inside a gauge: the scale and theta
symmetries make every critical set a family, so two gauge rows pin the
representative, and a bordered Newton system does the rest.  One family per
translated chain comes out, with action k*t.
"""
import math

import numpy as np

from gfs import (Ambient, chain_scan, contact_lift_gf, contact_p,
                 gf_time_one, newton_critical, reconstruct, ref_profile,
                 seed_from_chain, sharp_critical_seed, sharp_k, shells,
                 to_csv, translated_chains)

amb = Ambient(n=1, R=1.0)
rho = ref_profile(c=-0.9 * math.pi, delta=0.1)
F = gf_time_one(amb, rho)
k = 3
Fk = sharp_k(F, k)

# -- Newton onto the shell orbit from a perturbed seed -----------------------

s1 = shells(amb, rho, k)[0]
z1 = np.array([math.sqrt(s1.m), 0.0])
seed = sharp_critical_seed(F, k, z1)
rng = np.random.default_rng(0)
m = newton_critical(Fk, seed + 0.05 * rng.normal(size=len(seed)))
print("shell l=1 critical manifold:")
print("  value   %.12f  (shell datum %.12f)" % (m.value, s1.value))
print("  index   %d, nullity %d, orbit %s" % (m.index, m.nullity, m.zk_orbit))
print("  normalized degree (maslov) %s, spectral gap %.3g" % (m.maslov, m.gap))

orbit = reconstruct(F, k, m.representative)
print("  reconstructed orbit levels:",
      ", ".join("%.9f" % amb.H(X) for X in orbit))

# -- the origin is isolated ---------------------------------------------------

origin = newton_critical(Fk, np.zeros(Fk.total_dim))
print("\norigin: value %.9f = k rho(0) = %.9f, kind %s, nullity %d"
      % (origin.value, k * rho.rho(0.0), origin.kind, origin.nullity))

# -- contact-side chain scan --------------------------------------------------

P = contact_p(contact_lift_gf(F), k)
chains = translated_chains(amb, rho, k)
fams = chain_scan(P, k, [seed_from_chain(P, ch) for ch in chains],
                  chains=chains)
print("\nchain scan found %d families:" % len(fams))
print(to_csv(fams))
