"""Normal-approximation and complete-convergence diagnostics.

The normal limit for Z_n = S_n / sigma_n is driven by the decay of
(sqrt(V_n)/sigma_n)^3, where V_n sums increment second moments and
sigma_n^2 = E S_n^2.  Two instructive families:

  * independent steps: V_n = sigma_n^2 = n, the ratio never decays, yet
    Z_n is asymptotically normal anyway (the classical CLT) -- the
    hypothesis is sufficient-side only, and the harness just reports it;
  * shared shock: V_n = 2n but sigma_n^2 = n + n^2, the ratio decays like
    n^{-3/2}, and Z_n converges to the (non-normal!) shock distribution --
    the KS distance saturates near its floor instead of vanishing.

The complete-convergence diagnostic bounds P(|S_n| >= n^r eps) by the
exponential envelope and watches the partial sums of tails stay summable.

Run: python demos/04_limit_diagnostics.py
"""

from demimart import (
    clt_diagnose,
    complete_convergence_diagnose,
    iid_spec,
    ks_critical_value,
    rademacher,
    ratio_cubed_decreasing,
    shared_shock_spec,
)

SEED = 13
GRID = [16, 64, 256]

print("normal-approximation diagnostics, 20000 paths per horizon\n")
for name, spec in (
    ("independent steps", iid_spec(rademacher(), GRID[0])),
    ("shared shock", shared_shock_spec(rademacher(), rademacher(), GRID[0])),
):
    diags = clt_diagnose(spec, GRID, paths=20_000, seed=SEED)
    print(f"  {name}: ratio decreasing = {ratio_cubed_decreasing(diags)}")
    for d in diags:
        gate = ks_critical_value(20_000, 0.01)
        print(
            f"    n={d.n:>3}  (sqrt(V)/sigma)^3 = {d.ratio_cubed:.5f}  "
            f"KS = {d.ks_distance:.4f} (1% gate {gate:.4f})  "
            f"ECF = {d.ecf_distance:.4f}"
        )
    print()

print("complete convergence: P(|S_n| >= n * 0.5) vs the exponential envelope")
diag = complete_convergence_diagnose(
    iid_spec(rademacher(), 25), r=1.0, epsilon=0.5,
    n_grid=[25, 50, 100], paths=1_000_000, seed=SEED,
)
for rec, partial in zip(diag.tail_estimates, diag.partial_sum):
    print(
        f"  n={rec.n:>3}  tail = {rec.estimate:.3e}  envelope = {rec.envelope:.3e}  "
        f"within = {rec.within_envelope}  running sum = {partial:.3e}"
    )
print(f"  fitted log-tail slope vs n^r: {diag.geometric_fit:.4f} (negative = geometric decay)")
