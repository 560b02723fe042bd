"""Acceleration-bundle route to first-order form: gauge extension by a total
time derivative, compatibility checks, the reduced energy family, and the
third-order / degenerate-second-order variants with an auxiliary factor.

Conventions: the second-order Lagrangian is pulled back by relabeling
(q2, q3) -> (a0, a1); the gauge function F never sees momenta.  The reduced
family keeps the momentum-defining relation pa = dF/da0 as a recorded
algebraic constraint so degenerate cases flow through the same implicit
machinery.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .calculus import diff, solve_linear_symbolic
from .charts import chart_tstar_aq, chart_tstar_aqm, pullback_to_acceleration_chart
from .errors import GaugeConditionError, IncompatibleGaugeError
from .expr import Expr, add, eval_expr, is_zero_expr, mul, neg, simplify, substitute, sym
from .families import MorseFamily
from .ostro import LagrangianSpec, ostro_energy
from .sampling import make_rng, sample_binding
from .symbols import Kind, Symbol, acc, aux, p as ost_p, pa, pm, pq, q


class SchmidtVariant(enum.Enum):
    SECOND_NONDEG = "second-order"
    THIRD_ORDER = "third-order"
    SECOND_DEGENERATE = "second-order-degenerate"


@dataclass(frozen=True)
class GaugeFunction:
    """Gauge term F over (q0, q1, a0) or (q0, q1, a0, m0); no momenta."""

    expr: Expr
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "expr", simplify(self.expr))
        for s in self.expr.free:
            if s.kind is Kind.PARAM:
                continue
            ok = (
                (s.kind is Kind.Q and s.level <= 1)
                or (s.kind is Kind.A and s.level == 0)
                or (s.kind is Kind.M and s.level == 0)
            )
            if not ok:
                raise ValueError(f"gauge function may not depend on {s}")

    def d(self, symbol: Symbol) -> Expr:
        return diff(self.expr, symbol)


@dataclass(frozen=True)
class SchmidtSystem:
    variant: SchmidtVariant
    extended_lagrangian: Expr
    family: MorseFamily
    hamiltonian: Expr | None = None

    def __post_init__(self):
        # extension must be genuinely first order on its chart
        for s in self.extended_lagrangian.free:
            if s.kind in (Kind.Q, Kind.A, Kind.M) and s.level > 1:
                raise ValueError(f"extended Lagrangian is not first order: uses {s}")


def _pulled_back(L: LagrangianSpec) -> Expr:
    if L.order not in (2, 3):
        raise ValueError("acceleration-bundle route needs a second or third order Lagrangian")
    return simplify(pullback_to_acceleration_chart(L.lagrangian, L.dim, top=L.order))


def gauge_extend_second(L: LagrangianSpec, F: GaugeFunction) -> Expr:
    """First-order Lagrangian L + dF/dt on the acceleration chart."""
    Lacc = _pulled_back(L)
    n = L.dim
    total = Lacc
    for a in range(1, n + 1):
        total = add(total, mul(F.d(q(a, 0)), sym(q(a, 1))))
        total = add(total, mul(F.d(q(a, 1)), sym(acc(a, 0))))
        total = add(total, mul(F.d(acc(a, 0)), sym(acc(a, 1))))
    return simplify(total)


def chi_check(L: LagrangianSpec, F: GaugeFunction) -> list:
    """Compatibility residuals dL/da0 + dF/dq1, one per component."""
    Lacc = _pulled_back(L)
    return [
        simplify(add(diff(Lacc, acc(a, 0)), F.d(q(a, 1))))
        for a in range(1, L.dim + 1)
    ]


def solve_F_quadratic(L: LagrangianSpec) -> GaugeFunction:
    """Integrate the compatibility condition when dL/da0 is velocity-free.

    F = -sum_A (dL/da0^A) q1^A, with the free additive function of position
    fixed to zero.
    """
    Lacc = _pulled_back(L)
    n = L.dim
    total = None
    for a in range(1, n + 1):
        grad = diff(Lacc, acc(a, 0))
        if any(s.kind is Kind.Q and s.level == 1 for s in grad.free):
            raise IncompatibleGaugeError(
                "dL/da0 depends on the velocity; supply the gauge function explicitly"
            )
        piece = neg(mul(grad, sym(q(a, 1))))
        total = piece if total is None else add(total, piece)
    return GaugeFunction(simplify(total), n)


def schmidt_morse_family(L: LagrangianSpec, F: GaugeFunction) -> MorseFamily:
    """Reduced energy family on T*AQ with velocities as fibers.

    E = pq q1 - L - F_q0 q1 - F_q1 a0; the relation pa - dF/da0 = 0 is
    recorded with the acceleration velocity as its multiplier, which restores
    the unreduced family for dynamics and rank checks.
    """
    residuals = chi_check(L, F)
    for r in residuals:
        if not is_zero_expr(r):
            raise IncompatibleGaugeError(f"gauge incompatible with Lagrangian: residual {r}")
    n = L.dim
    Lacc = _pulled_back(L)
    total = neg(Lacc)
    for a in range(1, n + 1):
        total = add(total, mul(sym(pq(a)), sym(q(a, 1))))
        total = add(total, neg(mul(F.d(q(a, 0)), sym(q(a, 1)))))
        total = add(total, neg(mul(F.d(q(a, 1)), sym(acc(a, 0)))))
    relations = tuple(
        (acc(a, 1), simplify(add(sym(pa(a)), neg(F.d(acc(a, 0))))))
        for a in range(1, n + 1)
    )
    return MorseFamily(
        base=chart_tstar_aq(n),
        fibers=tuple(q(a, 1) for a in range(1, n + 1)),
        energy=simplify(total),
        extra_relations=relations,
        label="schmidt-second-order",
    )


def velocity_solution(L: LagrangianSpec, F: GaugeFunction) -> list:
    """Solve pa = dF/da0 for the velocities q1 (linear gauge Hessian only)."""
    n = L.dim
    eqs = [
        add(sym(pa(a)), neg(F.d(acc(a, 0))))
        for a in range(1, n + 1)
    ]
    return solve_linear_symbolic(eqs, [q(a, 1) for a in range(1, n + 1)])


def schmidt_hamiltonian(L: LagrangianSpec, F: GaugeFunction) -> Expr:
    """Explicit Hamiltonian on T*AQ once the velocity eliminates.

    H = pq z - L(q0, z, a0) - F_q0 z - F_q1 a0 with z solving pa = dF/da0.
    """
    n = L.dim
    Lacc = _pulled_back(L)
    z = velocity_solution(L, F)
    total = neg(Lacc)
    for a in range(1, n + 1):
        total = add(total, mul(sym(pq(a)), sym(q(a, 1))))
        total = add(total, neg(mul(F.d(q(a, 0)), sym(q(a, 1)))))
        total = add(total, neg(mul(F.d(q(a, 1)), sym(acc(a, 0)))))
    mapping = {q(a, 1): z[a - 1] for a in range(1, n + 1)}
    return simplify(substitute(total, mapping))


def _check_cond2(F: GaugeFunction, n: int, rng=None, points: int = 10):
    """det of the mixed velocity/auxiliary gauge Hessian must not vanish."""
    rng = make_rng(rng if rng is not None else 0)
    mat = [
        [diff(F.d(q(a, 1)), aux(b, 0)) for b in range(1, n + 1)]
        for a in range(1, n + 1)
    ]
    symbols = sorted(set().union(*(e.free for row in mat for e in row)) | set())
    for _ in range(points):
        binding = sample_binding(symbols, rng) if symbols else {}
        numeric = np.array(
            [[eval_expr(e, binding) for e in row] for row in mat], dtype=float
        )
        if abs(np.linalg.det(numeric)) < 1e-10:
            raise GaugeConditionError(
                "mixed gauge Hessian in (velocity, auxiliary) is singular"
            )


def default_auxiliary_gauge(n: int) -> GaugeFunction:
    """The built-in coupling F = sum_A q1^A m0^A."""
    total = None
    for a in range(1, n + 1):
        piece = mul(sym(q(a, 1)), sym(aux(a, 0)))
        total = piece if total is None else add(total, piece)
    return GaugeFunction(total, n)


def third_order_extend(L: LagrangianSpec, F: GaugeFunction) -> SchmidtSystem:
    """Third-order Lagrangian to first order on the product with the auxiliary
    factor; fibers are all three velocity blocks."""
    if L.order != 3:
        raise ValueError("third-order route needs a third order Lagrangian")
    n = L.dim
    _check_cond2(F, n)
    Lacc = _pulled_back(L)
    ext = Lacc
    for a in range(1, n + 1):
        ext = add(ext, mul(F.d(q(a, 0)), sym(q(a, 1))))
        ext = add(ext, mul(F.d(q(a, 1)), sym(acc(a, 0))))
        ext = add(ext, mul(F.d(acc(a, 0)), sym(acc(a, 1))))
        ext = add(ext, mul(F.d(aux(a, 0)), sym(aux(a, 1))))
    ext = simplify(ext)
    family = _aqm_family(ext, n, "schmidt-third-order")
    return SchmidtSystem(SchmidtVariant.THIRD_ORDER, ext, family)


def degenerate_second_extend(L: LagrangianSpec, F: GaugeFunction) -> SchmidtSystem:
    """Degenerate second-order route: velocities stay explicit in L, the gauge
    couples them to the auxiliary block; the acceleration momentum is forced
    to vanish by the missing a1 dependence."""
    if L.order != 2:
        raise ValueError("degenerate second-order route needs a second order Lagrangian")
    n = L.dim
    for s in F.expr.free:
        if s.kind is Kind.A:
            raise ValueError("gauge for the degenerate route depends on (q0, q1, m0) only")
    _check_cond2(F, n)
    Lacc = _pulled_back(L)
    ext = Lacc
    for a in range(1, n + 1):
        ext = add(ext, mul(F.d(q(a, 0)), sym(q(a, 1))))
        ext = add(ext, mul(F.d(q(a, 1)), sym(acc(a, 0))))
        ext = add(ext, mul(F.d(aux(a, 0)), sym(aux(a, 1))))
    ext = simplify(ext)
    family = _aqm_family(ext, n, "schmidt-second-degenerate")
    return SchmidtSystem(SchmidtVariant.SECOND_DEGENERATE, ext, family)


def _aqm_family(ext: Expr, n: int, label: str) -> MorseFamily:
    total = neg(ext)
    for a in range(1, n + 1):
        total = add(total, mul(sym(pq(a)), sym(q(a, 1))))
        total = add(total, mul(sym(pa(a)), sym(acc(a, 1))))
        total = add(total, mul(sym(pm(a)), sym(aux(a, 1))))
    fibers = tuple(
        s
        for a in range(1, n + 1)
        for s in (q(a, 1), acc(a, 1), aux(a, 1))
    )
    return MorseFamily(
        base=chart_tstar_aqm(n),
        fibers=fibers,
        energy=simplify(total),
        label=label,
    )


def pullback_map(L: LagrangianSpec, F: GaugeFunction) -> dict:
    """Substitution realizing the canonical symplectic identification between
    the acceleration-bundle chart and the iterated cotangent chart.

    (q0, a0, pq, pa) -> (q0, z, p0 = pq - F_q0(q0,z,a0), p1 = -F_q1(q0,z,a0)),
    with the fiber q2 identified with a0.
    """
    n = L.dim
    z = velocity_solution(L, F)
    zmap = {q(a, 1): z[a - 1] for a in range(1, n + 1)}
    mapping = {}
    for a in range(1, n + 1):
        mapping[q(a, 1)] = z[a - 1]
        mapping[q(a, 2)] = sym(acc(a, 0))
        mapping[ost_p(a, 0)] = simplify(
            add(sym(pq(a)), neg(substitute(F.d(q(a, 0)), zmap)))
        )
        mapping[ost_p(a, 1)] = simplify(neg(substitute(F.d(q(a, 1)), zmap)))
    return mapping


def ostro_schmidt_pullback_check(
    L: LagrangianSpec,
    F: GaugeFunction,
    hamiltonian_gauge: GaugeFunction | None = None,
    trials: int = 100,
    tol: float = 1e-10,
    rng=None,
) -> bool:
    """Ostrogradsky energy pulled through the identification equals the
    acceleration-bundle Hamiltonian.

    hamiltonian_gauge lets the caller pit the map built from one gauge
    against the Hamiltonian of another (the negative control).
    """
    from .sampling import equal_numeric

    ost = ostro_energy(L)
    mapping = pullback_map(L, F)
    pulled = simplify(substitute(ost.energy, mapping))
    ham = schmidt_hamiltonian(L, hamiltonian_gauge or F)
    return equal_numeric(pulled, ham, trials=trials, tol=tol, rng=rng)


def schmidt_initial_data(
    L: LagrangianSpec, F: GaugeFunction, jet: dict, params: dict | None = None
) -> dict:
    """Acceleration-chart phase point matching a configuration jet.

    jet binds q levels 0..3; momenta come from the fiber equations of the
    unreduced family evaluated on the jet.
    """
    n = L.dim
    binding = dict(jet)
    if params:
        binding.update(params)
    ext = gauge_extend_second(L, F)
    jet_acc = dict(binding)
    for a in range(1, n + 1):
        jet_acc[acc(a, 0)] = float(binding[q(a, 2)])
        jet_acc[acc(a, 1)] = float(binding[q(a, 3)])
    out = {}
    for a in range(1, n + 1):
        out[q(a, 0)] = float(binding[q(a, 0)])
        out[acc(a, 0)] = float(binding[q(a, 2)])
        out[pq(a)] = eval_expr(diff(ext, q(a, 1)), jet_acc)
        out[pa(a)] = eval_expr(diff(ext, acc(a, 1)), jet_acc)
    return out
