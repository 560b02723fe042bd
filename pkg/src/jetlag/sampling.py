"""Seeded random sampling with function-domain rejection, numeric equality.

All sampling goes through an explicit numpy Generator so runs are
reproducible; callers pass a seed or a Generator.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DomainEvalError,
    DomainExhaustionError,
    NumericFailureError,
    UnboundSymbolError,
)
from .expr import Expr, eval_expr

DEFAULT_BOX = (-2.0, 2.0)


def make_rng(seed_or_rng=0) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_binding(
    symbols,
    rng,
    box=DEFAULT_BOX,
    boxes=None,
    guards=(),
    probe_exprs=(),
    max_attempts=1000,
):
    """Draw one binding with every expression evaluable.

    boxes optionally overrides the box per symbol; guards are (expr, lower
    bound) pairs that must evaluate >= bound; probe_exprs must merely evaluate
    (domain rejection for radicals, logs, divisions).
    """
    symbols = list(symbols)
    for _ in range(max_attempts):
        binding = {}
        for s in symbols:
            lo, hi = boxes.get(s, box) if boxes else box
            binding[s] = float(rng.uniform(lo, hi))
        try:
            ok = True
            for guard, bound in guards:
                if eval_expr(guard, binding) < bound:
                    ok = False
                    break
            if not ok:
                continue
            for e in probe_exprs:
                eval_expr(e, binding)
        except (DomainEvalError, NumericFailureError, OverflowError):
            continue
        return binding
    raise DomainExhaustionError(
        f"no valid sample in {max_attempts} attempts for symbols {symbols}"
    )


def sample_bindings(symbols, n, rng, **kwargs):
    max_attempts = kwargs.pop("max_attempts", None)
    per_point = max_attempts if max_attempts is not None else 1000
    return [sample_binding(symbols, rng, max_attempts=per_point, **kwargs) for _ in range(n)]


def equal_numeric(e1: Expr, e2: Expr, trials: int = 100, tol: float = 1e-10, rng=None, box=DEFAULT_BOX) -> bool:
    """Probabilistic equality: |e1 - e2| <= tol * (1 + |e1|) at sampled points.

    Samples uniformly from the box per free symbol, rejecting bindings that
    leave a function domain in either expression.  Raises
    DomainExhaustionError when 1000*trials attempts produce no valid sample.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = make_rng(rng if rng is not None else 0)
    symbols = sorted(e1.free | e2.free)
    budget = 1000 * trials
    done = 0
    while done < trials:
        if budget <= 0:
            raise DomainExhaustionError(f"no valid sample found in {1000 * trials} attempts")
        binding = {s: float(rng.uniform(box[0], box[1])) for s in symbols}
        budget -= 1
        try:
            v1 = eval_expr(e1, binding)
            v2 = eval_expr(e2, binding)
        except (DomainEvalError, NumericFailureError, OverflowError, UnboundSymbolError):
            continue
        if abs(v1 - v2) > tol * (1.0 + abs(v1)):
            return False
        done += 1
    return True


def sup_norm_on_samples(exprs, bindings) -> float:
    worst = 0.0
    for e in exprs:
        for b in bindings:
            worst = max(worst, abs(eval_expr(e, b)))
    return worst
