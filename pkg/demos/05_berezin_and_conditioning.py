"""Berezin measures, the pinned process, and harmonic measure.

The Berezin measure attached to an anchor is a probability density built
from the two-point correlations; pinning an eigenvalue at the origin shifts
the monomial norms by one degree, giving exact identities at finite n.  As
the anchor leaves the droplet the measure flows to the exterior harmonic
measure; at infinity it becomes the top polynomial's wave function, which
concentrates on the droplet boundary.
"""

from rnmlab import (berezin_kernel, berezin_transform, bump,
                    conditional_expectation_identity,
                    conditional_identity_check, default_grid,
                    exterior_harmonic_measure_check, make_ginibre,
                    wavefunction_measure, weighted_kernel)

pot = make_ginibre()
n = 32
kern = weighted_kernel(pot, float(n), n)
grid = default_grid(pot, float(n), n)

print(f"Berezin mass at n = {n} (always exactly 1):")
for anchor in (0.0, 0.5, 1.2):
    mass = berezin_kernel(kern, anchor).mass(grid)
    print(f"  anchor {anchor:4.2f} (|z0|/R = {anchor:.2f}):  mass = {mass:.12f}")

print("\npinned-process identities at n = 16:")
print(f"  density identity residual     = {conditional_identity_check(pot, 16):.2e}")
f = bump(0.0, 0.5)
print(f"  expectation identity residual = "
      f"{conditional_expectation_identity(pot, 16, f):.2e}")

print("\nsmoothing expansion Bf = f + lap f/(n lapQ) + o(1/n) at z0 = 0.1:")
for nn in (64, 128, 256):
    kk = weighted_kernel(pot, float(nn), nn)
    out = berezin_transform(kk, f, 0.1)
    print(f"  n = {nn:4d}:  Bf = {out.value:.6f}   scaled residual = "
          f"{out.expansion_residual:+.4f} (correction term {out.correction:+.4f})")

prof = wavefunction_measure(pot, 256, ring_halfwidth=0.1)
print(f"\ntop-polynomial wave function at n = 256: mass in ||z|-R| < 0.1 is "
      f"{prof.ring_mass:.4f}")

kern256 = weighted_kernel(pot, 256.0, 256)
hm = exterior_harmonic_measure_check(kern256, 1.5)
print(f"exterior anchor z0 = 1.5: angular marginal L1-distance to the "
      f"exterior Poisson kernel = {hm.l1_distance:.4f}")
print(f"mass beyond 1.1 R = {hm.mass_outside:.2e} (the limit lives on the "
      "boundary circle)")
