"""Level sets of delta, the Hardy-type integral, and the gradient term.

    python demos/level_sets.py
"""

import math

from levitube import fuchsian, hardy

group = fuchsian.octagon_group()

print("pullback identity, worst relative gap")
for t in (0.5, 0.9, 1.3):
    print(f"  t={t}: {hardy.pullback_identity_check(hardy.named_function('zw'), t, 50, 0, group):.1e}")

# same seed for every t: for constants the integrand does not depend on t at all
print("\nI(t) at t = 0.5, 1.0, 1.4; 8pi^2 =", f"{8 * math.pi**2:.3f}")
for name in ("const", "(z+w)/4", "blaschke"):
    f = hardy.named_function(name)
    row = [hardy.level_integral(f, t, 200_000, 3, group) for t in (0.5, 1.0, 1.4)]
    print(f"  {name:10s}" + "".join(f"  {e.value:7.3f}+-{e.stderr:.3f}" for e in row))

print("\nThree-way Stokes gaps of the integration formula, f = (z+w)/4")
for rep in hardy.stokes_balance_suite(hardy.named_function("(z+w)/4"), grid=8):
    print("  " + "  ".join(f"{k} {v:.1e}" for k, v in rep.gaps.items()))

f = hardy.coordinate("z")
print("\nJ(t) for f = z (grows like sin^2 t)")
for t, est in hardy.gradient_boundary_trend(f, [0.6, 1.0, 1.3, 1.55], 4000, 5, group):
    print(f"  t={t:4.2f}  {est.value:7.3f} +- {est.stderr:.3f}")
lim = hardy.boundary_gradient_integral(f, 200_000, 5, group)
print(f"  t=pi/2  {lim.value:7.3f} +- {lim.stderr:.3f}")
