"""Extremal density of the radial annulus family, probed two ways.

The rays crossing an annulus admit a density that attains the modulus.
For the annulus between radii r0 and r1 at p = 2 it is 1/(|z| log(r1/r0))
in ambient coordinates.  Below we evaluate the computed density along a
ray, check admissibility on a handful of rays, and then show that a
perturbed competitor always spends more energy.

Run:  python3 demos/annulus_extremal_density.py
"""

import numpy as np

from surfmod import (
    QuadratureScheme,
    admissibility_check,
    extremal_density,
    extremality_probe,
    make_polar_annulus,
    modulus_p,
)

r0, r1 = 1.0, 2.0
entry = make_polar_annulus(r0, r1, mode="radial")
fam = entry.family
quad = QuadratureScheme(order=10, subdivisions=3)

report = modulus_p(fam, 2.0, quad)
print(f"modulus at p=2: {report.modulus:.12g}  (2*pi/log 2 = {2 * np.pi / np.log(2):.12g})")
print()

density = extremal_density(fam, 2.0, quad)
angle = 0.7
print(f"density along the ray at angle {angle}:")
print(f"{'radius':>8} {'computed':>14} {'1/(r log 2)':>14}")
for r in np.linspace(r0 + 0.1, r1 - 0.1, 6):
    z = r * np.array([np.cos(angle), np.sin(angle)])
    got = density.evaluate_ambient(z)
    exact = 1.0 / (r * np.log(r1 / r0))
    print(f"{r:>8.3f} {got:>14.9f} {exact:>14.9f}")
print()

x_samples = [np.array([t]) for t in (0.3, 0.25 * np.pi, np.pi, 1.5 * np.pi)]
rows = admissibility_check(fam, density, quad, x_samples)
print("line integrals over sample rays (admissibility needs >= 1):")
for x, integral in rows:
    print(f"  angle {float(x[0]):>6.3f}: integral = {integral:.12f}")
print()

worst = extremality_probe(fam, 2.0, quad, trials=30, seed=11)
print(f"energy excess of 30 perturbed competitors, worst case: {worst:.3e}")
print("every competitor spends at least as much p-energy as the extremal density.")
