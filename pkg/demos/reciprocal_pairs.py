"""Conjugate-exponent products that land exactly on 1.

A family of surfaces and the transverse family that weaves through it
are tied together: the p-th root of one modulus times the q-th root of
the other (q the conjugate exponent) multiplies to 1.  The catalog
carries both halves of each pair, so the identity can be checked by
brute computation.

Run:  python3 demos/reciprocal_pairs.py
"""

import numpy as np

from surfmod import (
    QuadratureScheme,
    conjugate_exponent,
    make_parallel,
    make_polar_annulus,
    make_pq_map,
    modulus_p,
)

quad = QuadratureScheme(order=10, subdivisions=3)


def product_check(name, entry, p):
    q = conjugate_exponent(p)
    own = modulus_p(entry.family, p, quad).modulus
    other = modulus_p(entry.transverse.family, q, quad).modulus
    product = own ** (1.0 / p) * other ** (1.0 / q)
    print(
        f"  {name:<22} p={p:<4} mod^(1/p) * transverse mod^(1/q) "
        f"= {product:.15f}"
    )


print("parallel slabs and their transverse slabs:")
entry = make_parallel((0.0, 1.5), (0.0, 0.7))
for p in (1.5, 2.0, 3.0):
    product_check("parallel", entry, p)
print()

print("planar stretch maps (the two axes trade roles):")
for scale in (0.5, 2.0, 5.0):
    product_check(f"stretch scale={scale}", make_pq_map(2.5, scale=scale), 2.5)
print()

print("annulus rays against annulus circles at p = 2:")
radial = make_polar_annulus(1.0, 3.0, mode="radial")
a = modulus_p(radial.family, 2.0, quad).modulus
b = modulus_p(radial.transverse.family, 2.0, quad).modulus
print(f"  rays {a:.12g}  circles {b:.12g}  product = {a * b:.15f}")
print(f"  (2*pi/log 3 times log 3/(2*pi); the log-{np.log(3.0):.4g} weight cancels)")
