"""The exponential tail bound, from its lemma chain to a 100-step walk.

The bound P(S_n >= t) <= exp(-t^2 / (2 (V_n + t C / 3))) rests on three
elementary inequalities, each checked on a dense grid:

  phi(u) = e^u - u - 1        <=  u^2 / (2 (1 - u/3))        on (0, 3)
  log E e^{lam X}             <=  lam^2 E X^2 / (2(1-lam C/3))  for |X| <= C
  h1(u) = 1 + u - sqrt(1+2u)  >=  u^2 / (2 (1 + u))           for u >= 0

and the optimized exponent psi(t) = (9 V_n / C^2) h1(C t / (3 V_n)) dominates
t^2 / (2 (V_n + t C/3)).  On a 100-step symmetric walk (V_n = n, C = 1) the
empirical tail sits far below the bound; the harness also reports the
asymptotic moment bound 2^p p V_n^{p/2} Gamma(p/2).

Run: python demos/03_concentration_bounds.py
"""

import math

import numpy as np

from demimart import (
    bernstein_tail,
    h1,
    h1_lower,
    iid_spec,
    mgf_log_bound,
    moment_bound,
    phi,
    phi_bound,
    psi_sup,
    rademacher,
    verify,
)

print("lemma chain on sample points")
for u in (0.5, 1.0, 2.0):
    print(f"  phi({u}) = {phi(u):.6f}  <=  {phi_bound(u):.6f}")
print(f"  log cosh(1) = {math.log(math.cosh(1.0)):.6f}  <=  "
      f"{mgf_log_bound(1.0, 1.0, 1.0):.6f}")
for u in (0.1, 3.0, 100.0):
    print(f"  h1({u}) = {h1(u):.6f}  >=  {h1_lower(u):.6f}")
print(f"  psi_sup(3, V=1, C=3) = {psi_sup(3.0, 1.0, 3.0):.6f}  >=  "
      f"{9.0 / 8.0:.6f}\n")

print("tail of a 100-step symmetric walk vs the bound (V_100 = 100, C = 1)")
spec = iid_spec(rademacher(), 100)
for t in (5.0, 10.0, 15.0):
    report = verify("T4.7", spec, params={"t": t}, mode="monte_carlo",
                    paths=500_000, seed=3)
    bound = bernstein_tail(t, 100.0, 1.0)
    print(f"  t = {t:>4}: empirical one-sided tail {report.lhs.mean:.5f}, "
          f"bound {bound:.5f}  -> {report.verdict}")

print("\nmoment bounds E|S_n|^p <= 2^p p V_n^{p/2} Gamma(p/2) (asymptotic)")
s_n = np.cumsum(
    np.random.default_rng(5).choice([-1.0, 1.0], size=(200_000, 100)), axis=1
)[:, -1]
for p in (2.0, 3.0):
    emp = float(np.mean(np.abs(s_n) ** p))
    print(f"  p = {p}: sample E|S_100|^{p:g} = {emp:.1f}, "
          f"bound {moment_bound(p, 100.0):.1f}")
