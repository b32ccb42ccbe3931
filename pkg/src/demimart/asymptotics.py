"""Distributional and complete-convergence diagnostics for partial sums.

The harness never claims a limit theorem: it reports finite-sample
statistics (Kolmogorov-Smirnov and empirical-characteristic-function
distances to the standard normal, per-horizon tail probabilities against
their exponential envelopes) and the trend of the hypothesis ratios along
the horizon grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import generators as gen
from .bounds import bernstein_tail
from .core import CHUNK_PATHS, DEFAULT_TOLERANCE_Z, RunningStats, derive_stream
from .oracle import fold_expectations

__all__ = [
    "ECF_T_GRID",
    "CltDiagnostics",
    "CompleteConvergenceDiagnostics",
    "TailRecord",
    "clt_diagnose",
    "complete_convergence_diagnose",
    "ecf_distance",
    "ks_critical_value",
    "ks_distance_to_normal",
    "ratio_cubed_decreasing",
]

# Frequencies probed by the empirical characteristic function.
ECF_T_GRID = (0.5, 1.0, 2.0, 4.0)

_erf = np.vectorize(math.erf, otypes=[np.float64])


def normal_cdf(x) -> np.ndarray:
    return 0.5 * (1.0 + _erf(np.asarray(x, dtype=np.float64) / math.sqrt(2.0)))


def ks_distance_to_normal(samples) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the empirical CDF and
    the standard normal CDF."""
    z = np.sort(np.asarray(samples, dtype=np.float64))
    if z.size == 0:
        raise ValueError("empty sample")
    n = z.size
    cdf = normal_cdf(z)
    grid = np.arange(1, n + 1, dtype=np.float64) / n
    d_plus = float(np.max(grid - cdf))
    d_minus = float(np.max(cdf - (grid - 1.0 / n)))
    return max(d_plus, d_minus)


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sided critical value sqrt(-ln(alpha/2)/2) / sqrt(n)."""
    if n < 1 or not 0.0 < alpha < 1.0:
        raise ValueError("need n >= 1 and alpha in (0, 1)")
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def ecf_distance(samples, t_grid=ECF_T_GRID) -> float:
    """max over the t grid of |empirical E e^{itZ} - e^{-t^2/2}|."""
    z = np.asarray(samples, dtype=np.float64)
    worst = 0.0
    for t in t_grid:
        emp = np.exp(1j * t * z).mean()
        worst = max(worst, abs(emp - math.exp(-0.5 * t * t)))
    return float(worst)


@dataclass(frozen=True)
class CltDiagnostics:
    """Per-horizon normal-approximation diagnostics for Z_n = S_n / sigma_n.

    ratio_cubed = (sqrt(V_n)/sigma_n)^3 is the quantity whose decay drives
    the remainder in the normal limit; sigma_exact records whether sigma_n
    came from a closed form or from the sample.
    """

    n: int
    sigma_n: float
    V_n: float
    ratio_cubed: float
    ks_distance: float
    ecf_distance: float
    sigma_exact: bool


def _with_horizon(spec: gen.GeneratorSpec, n: int) -> gen.GeneratorSpec:
    if spec.family == "centered_partial_sum":
        return replace(spec, horizon=n, inner=replace(spec.inner, horizon=n))
    if spec.family == "gaussian_assoc":
        raise ValueError("horizon grid not supported for an explicit covariance")
    return replace(spec, horizon=n)


def _row_sums(inc: np.ndarray) -> np.ndarray:
    # integer increment lattices sum much faster in int64
    if inc.dtype.kind in "iu":
        return inc.sum(axis=1, dtype=np.int64).astype(np.float64)
    return inc.sum(axis=1, dtype=np.float64)


def _final_sums(spec: gen.GeneratorSpec, paths: int, seed: int, chunk_base: int) -> np.ndarray:
    """Sample S_n only (row sums of increments; no path materialization)."""
    out = np.empty(paths, dtype=np.float64)
    done = 0
    chunk = 0
    while done < paths:
        m = min(CHUNK_PATHS, paths - done)
        inc = gen.sample_increments(spec, m, derive_stream(seed, chunk_base + chunk))
        out[done : done + m] = _row_sums(inc)
        done += m
        chunk += 1
    if spec.offset:
        out += spec.offset
    return out


def clt_diagnose(
    spec: gen.GeneratorSpec, n_grid, paths: int, seed: int
) -> list[CltDiagnostics]:
    """Normal-approximation diagnostics along an increasing horizon grid.

    V_n comes exactly from the increment law; sigma_n is exact where the
    family has a closed form and sample-based otherwise.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b >= a for a, b in zip(n_grid[1:], n_grid)):
        raise ValueError("n_grid must be strictly increasing")
    if gen.increment_bound(spec) is None:
        raise ValueError("unbounded-increment generator")
    diags = []
    for i, n in enumerate(n_grid):
        sub = _with_horizon(spec, n)
        s_n = _final_sums(sub, paths, seed, chunk_base=i << 32)
        sigma = gen.sigma_n_exact(sub)
        sigma_exact = sigma is not None
        if sigma is None:
            sigma = math.sqrt(float(np.mean(s_n * s_n)))
        if sigma <= 0:
            raise ValueError("sigma_n must be positive")
        z = s_n / sigma
        v = gen.v_n(sub)
        diags.append(
            CltDiagnostics(
                n=n,
                sigma_n=float(sigma),
                V_n=float(v),
                ratio_cubed=float((math.sqrt(v) / sigma) ** 3),
                ks_distance=ks_distance_to_normal(z),
                ecf_distance=ecf_distance(z),
                sigma_exact=sigma_exact,
            )
        )
    return diags


def ratio_cubed_decreasing(diags: list[CltDiagnostics]) -> bool:
    """Whether the remainder-driving ratio decreases along the grid."""
    ratios = [d.ratio_cubed for d in diags]
    return all(b < a for a, b in zip(ratios, ratios[1:]))


@dataclass(frozen=True)
class TailRecord:
    """One horizon of the complete-convergence diagnostic."""

    n: int
    estimate: float
    stderr: float
    envelope: float
    vn_over_nr: float
    within_envelope: bool
    exact: bool


@dataclass(frozen=True)
class CompleteConvergenceDiagnostics:
    """Tail probabilities P(|S_n| >= n^r eps) against exponential envelopes.

    ``partial_sum`` is the running sum of tail estimates (the summability
    witness); ``geometric_fit`` is the least-squares slope of log tails
    against n^r over the horizons with positive estimates (NaN when fewer
    than two such horizons exist).
    """

    r: float
    epsilon: float
    tail_estimates: tuple[TailRecord, ...]
    partial_sum: tuple[float, ...]
    geometric_fit: float


def complete_convergence_diagnose(
    spec: gen.GeneratorSpec,
    r: float,
    epsilon: float,
    n_grid,
    paths: int,
    seed: int,
    tolerance_z: float = DEFAULT_TOLERANCE_Z,
) -> CompleteConvergenceDiagnostics:
    """Estimate P(|S_n| >= n^r eps) per horizon and compare to the envelope
    2 exp(-n^r eps^2 / (2 (V_n/n^r + eps C/3))).

    The tail is exact when the support makes it impossible (threshold above
    the largest reachable |S_n|) or when the chain is small enough to
    enumerate; otherwise it is estimated by chunked sampling.
    """
    if r <= 0 or epsilon <= 0:
        raise ValueError("r and epsilon must be positive")
    c = gen.increment_bound(spec)
    if c is None:
        raise ValueError("unbounded-increment generator")
    cls = gen.classify(spec)
    if not (cls.demimartingale and cls.mean_zero_process):
        raise ValueError("requires mean-zero associated increments with E S_n = 0")
    records = []
    running = []
    total = 0.0
    for i, n in enumerate(sorted(int(x) for x in n_grid)):
        sub = _with_horizon(spec, n)
        threshold = float(n**r * epsilon)
        v = gen.v_n(sub)
        envelope = 2.0 * bernstein_tail(threshold, v, c)
        first = gen.first_step_bound(sub)
        max_abs = first + (n - 1) * c
        estimate, stderr, exact = math.nan, math.nan, False
        if threshold > max_abs:
            estimate, stderr, exact = 0.0, 0.0, True
        else:
            estimate, stderr, exact = _tail_probability(
                sub, threshold, paths, seed, chunk_base=i << 32
            )
        within = estimate <= envelope + tolerance_z * (stderr if stderr > 0 else 0.0)
        records.append(
            TailRecord(
                n=n,
                estimate=estimate,
                stderr=stderr,
                envelope=envelope,
                vn_over_nr=v / n**r,
                within_envelope=bool(within),
                exact=exact,
            )
        )
        total += estimate
        running.append(total)
    pos = [(rec.n, rec.estimate) for rec in records if rec.estimate > 0.0]
    if len(pos) >= 2:
        xs = np.array([n**r for n, _ in pos])
        ys = np.log(np.array([e for _, e in pos]))
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = math.nan
    return CompleteConvergenceDiagnostics(
        r=float(r),
        epsilon=float(epsilon),
        tail_estimates=tuple(records),
        partial_sum=tuple(running),
        geometric_fit=slope,
    )


def _tail_probability(
    spec: gen.GeneratorSpec, threshold: float, paths: int, seed: int, chunk_base: int
) -> tuple[float, float, bool]:
    try:
        chain = gen.to_chain(spec)
    except ValueError:
        chain = None
    if chain is not None and chain.outcome_count <= gen.ENUMERATION_CAP:
        (value,) = fold_expectations(
            chain, lambda p: [(np.abs(p[:, -1]) >= threshold).astype(np.float64)]
        )
        return float(value), 0.0, True
    rs = RunningStats()
    done = 0
    chunk = 0
    while done < paths:
        m = min(CHUNK_PATHS, paths - done)
        inc = gen.sample_increments(spec, m, derive_stream(seed, chunk_base + chunk))
        s_n = _row_sums(inc) + spec.offset
        rs.update((np.abs(s_n) >= threshold).astype(np.float64))
        done += m
        chunk += 1
    stats = rs.to_summary()
    return stats.mean, stats.stderr, False
