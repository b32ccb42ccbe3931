"""Stopping rules and stopped-process construction.

A rule maps a path to the first step at which it triggers; NOT_STOPPED (None
in the scalar API, -1 in batch arrays) means the rule never fired within the
horizon.  Rules are prefix-measurable: whether tau = k depends only on
S_1..S_k.  Each built-in rule knows which indicator monotonicity directions
it satisfies by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ProcessPath

__all__ = [
    "NOT_STOPPED",
    "StoppedView",
    "StoppingRule",
    "apply_stop",
    "capped",
    "deterministic",
    "first_passage_down",
    "first_passage_up",
    "jump_if_high",
    "user_rule",
]

NOT_STOPPED = None


@dataclass(frozen=True)
class StoppingRule:
    """A path functional tau with a declared indicator-monotonicity direction.

    ``declared_direction`` is how the rule is *claimed* to behave; built-in
    kinds carry analytic certificates, user rules are certified by probing.
    """

    kind: str  # first_passage_up | first_passage_down | deterministic | capped | user
    threshold: float = math.nan
    step: int = 0
    inner: "StoppingRule | None" = None
    cap: int | None = None
    predicate: Callable | None = field(default=None, compare=False)
    declared_direction: str = "none"
    user_bound: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in (
            "first_passage_up",
            "first_passage_down",
            "deterministic",
            "capped",
            "user",
        ):
            raise ValueError(f"unknown stopping kind {self.kind!r}")
        if self.declared_direction not in ("nondecreasing", "nonincreasing", "none"):
            raise ValueError("invalid declared_direction")
        if self.kind == "deterministic" and self.step < 1:
            raise ValueError("deterministic rule needs step >= 1")
        if self.kind == "capped":
            if self.inner is None or self.cap is None or self.cap < 1:
                raise ValueError("capped rule needs an inner rule and cap >= 1")
        if self.kind == "user" and self.predicate is None:
            raise ValueError("user rule needs a predicate")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "first_passage_up":
            return f"up({self.threshold!r})"
        if self.kind == "first_passage_down":
            return f"down({self.threshold!r})"
        if self.kind == "deterministic":
            return f"fixed({self.step})"
        if self.kind == "capped":
            return f"{self.inner.label}^cap{self.cap}"
        return "user"

    # -- evaluation ---------------------------------------------------------

    def tau_batch(self, paths: np.ndarray) -> np.ndarray:
        """First triggering step per row of an (m, n) path matrix; -1 if none."""
        p = np.asarray(paths, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("paths must be an (m, n) matrix")
        m, n = p.shape
        if self.kind == "first_passage_up":
            hit = p >= self.threshold
            return _first_true(hit)
        if self.kind == "first_passage_down":
            hit = p <= self.threshold
            return _first_true(hit)
        if self.kind == "deterministic":
            if self.step > n:
                return np.full(m, -1, dtype=np.int64)
            return np.full(m, self.step, dtype=np.int64)
        if self.kind == "capped":
            cap = min(self.cap, n)
            inner = self.inner.tau_batch(p)
            return np.where(inner == -1, cap, np.minimum(inner, cap)).astype(np.int64)
        # user predicate: first j with predicate(prefix) true
        tau = np.full(m, -1, dtype=np.int64)
        open_rows = np.arange(m)
        for j in range(1, n + 1):
            if open_rows.size == 0:
                break
            fired = np.asarray(self.predicate(p[open_rows, :j]), dtype=bool)
            if fired.shape != (open_rows.size,):
                raise ValueError("user predicate must return one bool per path")
            tau[open_rows[fired]] = j
            open_rows = open_rows[~fired]
        return tau

    def tau(self, path) -> int | None:
        values = path.values if isinstance(path, ProcessPath) else np.asarray(path)
        t = int(self.tau_batch(np.asarray(values, dtype=np.float64)[None, :])[0])
        return None if t == -1 else t

    # -- structure ----------------------------------------------------------

    def bound(self) -> int | None:
        """An integer M with tau <= M almost surely, when one is known.

        User rules may declare a bound; the verification driver re-checks it
        against every evaluated path.
        """
        if self.kind == "deterministic":
            return self.step
        if self.kind == "capped":
            inner = self.inner.bound()
            return self.cap if inner is None else min(self.cap, inner)
        if self.kind == "user":
            return self.user_bound
        return None

    def has_analytic_certificate(self, direction: str, target: str = "le") -> bool:
        """Monotonicity of the indicator, known by construction.

        first_passage_up: I{tau <= j} = max_{i <= j} I{S_i >= lambda}, which
        is nondecreasing in every coordinate; first_passage_down is the
        mirror image.  Deterministic indicators ignore the path entirely.
        Capping replaces the indicator by 1 at and beyond the cap, which
        preserves either monotonicity type; for the "eq" target only the
        below-cap steps (the ones a bounded-stop theorem inspects) inherit.
        """
        if self.kind == "deterministic":
            return True
        if self.kind == "capped":
            return self.inner.has_analytic_certificate(direction, target)
        if target == "le":
            if self.kind == "first_passage_up":
                return direction == "nondecreasing"
            if self.kind == "first_passage_down":
                return direction == "nonincreasing"
        return False


def _first_true(hit: np.ndarray) -> np.ndarray:
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1).astype(np.int64) + 1
    first[~any_hit] = -1
    return first


def first_passage_up(threshold: float) -> StoppingRule:
    """tau = min{k : S_k >= threshold}."""
    return StoppingRule(
        "first_passage_up", threshold=float(threshold), declared_direction="nondecreasing"
    )


def first_passage_down(threshold: float) -> StoppingRule:
    """tau = min{k : S_k <= threshold}."""
    return StoppingRule(
        "first_passage_down", threshold=float(threshold), declared_direction="nonincreasing"
    )


def deterministic(step: int, direction: str = "nondecreasing") -> StoppingRule:
    """tau = step, ignoring the path (certified for both directions)."""
    return StoppingRule("deterministic", step=int(step), declared_direction=direction)


def capped(inner: StoppingRule, cap: int) -> StoppingRule:
    """tau wedge cap; always stops by ``cap``."""
    return StoppingRule(
        "capped", inner=inner, cap=int(cap), declared_direction=inner.declared_direction
    )


def user_rule(
    predicate: Callable,
    declared_direction: str = "none",
    label: str = "user",
    bound: int | None = None,
) -> StoppingRule:
    """Rule from a vectorized predicate: predicate(prefix (m, j)) -> bool (m,).

    The predicate is consulted step by step; tau is the first j at which it
    fires.  No analytic certificate: monotonicity claims are probed.
    """
    return StoppingRule(
        "user",
        predicate=predicate,
        declared_direction=declared_direction,
        label=label,
        user_bound=bound,
    )


def jump_if_high(watch_step: int, threshold: float, early: int, late: int) -> StoppingRule:
    """Stop at ``early`` when S_{watch_step} >= threshold, else at ``late``.

    Requires watch_step <= early < late.  The event {tau = early} is a
    nondecreasing function of the path, which makes this the canonical
    nontrivial rule for bounded-stop theorems keyed on I{tau = k}.
    """
    if not 1 <= watch_step <= early < late:
        raise ValueError("need 1 <= watch_step <= early < late")

    def pred(prefix: np.ndarray) -> np.ndarray:
        j = prefix.shape[1]
        if j == early:
            return prefix[:, watch_step - 1] >= threshold
        if j == late:
            return np.ones(prefix.shape[0], dtype=bool)
        return np.zeros(prefix.shape[0], dtype=bool)

    return StoppingRule(
        "user",
        predicate=pred,
        declared_direction="nondecreasing",
        user_bound=late,
        label=f"jump_if_high(S_{watch_step}>={threshold!r};{early}|{late})",
    )


@dataclass(frozen=True)
class StoppedView:
    """tau, the stopped value, and the frozen sequence S_{tau ^ 1}..S_{tau ^ n}."""

    tau: int | None
    s_tau: float | None
    stopped_sequence: np.ndarray


def apply_stop(path, rule: StoppingRule) -> StoppedView:
    """Stop one path: the sequence is frozen at its value from tau onwards."""
    values = path.values if isinstance(path, ProcessPath) else np.asarray(path, dtype=np.float64)
    t = rule.tau(values)
    if t is None:
        return StoppedView(tau=None, s_tau=None, stopped_sequence=values.copy())
    seq = values.copy()
    seq[t:] = values[t - 1]
    return StoppedView(tau=t, s_tau=float(values[t - 1]), stopped_sequence=seq)


def verify_registry(theorem_id: str, *args, **kwargs):
    """Run one of the optional-sampling registry entries owned here.

    Accepted ids: T1.4-order, T2.1-stopped-pair, C2.2-stop-vs-fixed,
    T2.3-two-stops, T3.1-OST-upper, T3.2-OST-nonneg, T3.3-OST-lower,
    L5.1-ui-proxy (short aliases work too).  Delegates to the shared
    registry driver.
    """
    from . import registry

    entry = registry.lookup(theorem_id)
    if entry.owner != "stopping":
        raise ValueError(f"{theorem_id!r} is not owned by the stopping module")
    return registry.verify(theorem_id, *args, **kwargs)
