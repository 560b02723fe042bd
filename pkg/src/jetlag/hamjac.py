"""Hamilton-Jacobi verification: rank conditions, residual systems for every
pipeline variant, relatedness of lifted trajectories, the auxiliary-section
local vector field test, and the affine-in-acceleration specializations.

Residuals substitute momenta by the candidate one-form, differentiate the
energy through the substitution, and sample; fiber multipliers are resolved
numerically at each sample point from the constraint block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import diff, is_zero, linear_coefficients, potential_from_closed_form
from .dynamics import ImplicitSystem, Trajectory, resolve_multipliers
from .errors import (
    ArityMismatchError,
    ChartMismatchError,
    ClosureError,
    NotLinearError,
    NumericFailureError,
)
from .expr import Expr, add, coerce, eval_expr, mul, neg, simplify, substitute, sym
from .families import MorseFamily
from .sampling import DEFAULT_BOX, make_rng, sample_binding
from .symbols import q


@dataclass(frozen=True)
class ClosedOneForm:
    """Candidate generating form: scalar potential or verified components.

    coordinates are the base chart; momentum_slots name the conjugate symbols
    each component replaces when the form is fed into an energy function.
    """

    coordinates: tuple
    momentum_slots: tuple
    potential: Expr | None = None
    components: tuple | None = None

    def __post_init__(self):
        if (self.potential is None) == (self.components is None):
            raise ValueError("give exactly one of potential, components")
        if len(self.coordinates) != len(self.momentum_slots):
            raise ArityMismatchError("coordinates and momentum slots must pair up")
        if self.components is not None and len(self.components) != len(self.coordinates):
            raise ArityMismatchError("one component per coordinate required")

    @classmethod
    def from_potential(cls, W: Expr, coordinates, momentum_slots) -> "ClosedOneForm":
        return cls(tuple(coordinates), tuple(momentum_slots), potential=simplify(W))

    @classmethod
    def from_components(
        cls,
        components,
        coordinates,
        momentum_slots,
        rng=None,
        box=DEFAULT_BOX,
        boxes=None,
        guards=(),
        tol=1e-9,
        samples=50,
        check=True,
    ) -> "ClosedOneForm":
        components = tuple(simplify(coerce(c)) for c in components)
        form = cls(tuple(coordinates), tuple(momentum_slots), components=components)
        if check:
            report = form.closure_report(
                rng=rng, box=box, boxes=boxes, guards=guards, tol=tol, samples=samples
            )
            if not report.passed:
                raise ClosureError(report.details["worst_pair"], report.overall_sup)
        return form

    def component_exprs(self) -> tuple:
        if self.components is not None:
            return self.components
        return tuple(diff(self.potential, x) for x in self.coordinates)

    def substitution(self) -> dict:
        return dict(zip(self.momentum_slots, self.component_exprs()))

    def closure_report(
        self, rng=None, box=DEFAULT_BOX, boxes=None, guards=(), tol=1e-9, samples=50
    ) -> "ResidualReport":
        comps = self.component_exprs()
        coords = self.coordinates
        equations = []
        for i in range(len(coords)):
            for j in range(i + 1, len(coords)):
                r = simplify(add(diff(comps[i], coords[j]), neg(diff(comps[j], coords[i]))))
                equations.append((f"closure[{coords[i]},{coords[j]}]", r))
        report = _sample_equations(
            "closure",
            equations,
            list(coords),
            tol=tol,
            rng=rng,
            box=box,
            boxes=boxes,
            guards=guards,
            probe=comps,
            samples=samples,
        )
        worst = max(report.sup_norms, key=lambda k: report.sup_norms[k], default="")
        report.details["worst_pair"] = worst
        return report


@dataclass(frozen=True)
class SectionSigma:
    """Auxiliary section: one phase velocity per point over (coords, momenta)."""

    q_components: dict
    p_components: dict

    def arity(self):
        return len(self.q_components), len(self.p_components)


@dataclass
class ResidualReport:
    label: str
    equations: list  # (name, Expr) pairs as instantiated
    tol: float
    samples: int
    sup_norms: dict = field(default_factory=dict)
    overall_sup: float = 0.0
    passed: bool = False
    details: dict = field(default_factory=dict)

    def identically_zero(self) -> bool:
        return all(is_zero(e) for _, e in self.equations)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "tol": self.tol,
            "samples": self.samples,
            "equations": [
                {"name": name, "expr": str(e), "sup": self.sup_norms.get(name)}
                for name, e in self.equations
            ],
            "overall_sup": self.overall_sup,
            "passed": bool(self.passed),
            "details": {
                k: v for k, v in sorted(self.details.items()) if _jsonable(v)
            },
        }


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, list, tuple, dict, type(None)))


def _sample_equations(
    label,
    equations,
    coordinates,
    tol,
    rng=None,
    box=DEFAULT_BOX,
    boxes=None,
    guards=(),
    probe=(),
    samples=50,
):
    rng = make_rng(rng if rng is not None else 0)
    symbols = set(coordinates)
    for _, e in equations:
        symbols |= {s for s in e.free}
    for e in probe:
        symbols |= set(e.free)
    symbols = sorted(symbols)
    report = ResidualReport(label, list(equations), tol, samples)
    sup = 0.0
    for _ in range(samples):
        binding = sample_binding(
            symbols, rng, box=box, boxes=boxes, guards=guards, probe_exprs=list(probe)
        )
        for name, e in equations:
            v = abs(eval_expr(e, binding))
            report.sup_norms[name] = max(report.sup_norms.get(name, 0.0), v)
            sup = max(sup, v)
    report.overall_sup = sup
    report.passed = sup <= tol
    return report


def morse_rank_check(mf: MorseFamily, points) -> ResidualReport:
    """Rank of the fiber-criticality Jacobian [d2E/dl dx | d2E/dl dl].

    Maximal rank (= number of fibers) at every point means the constraint
    block cuts out the generated set transversally.
    """
    total = mf.total_energy
    fibers = list(mf.all_fibers)
    columns = list(mf.base.roster) + fibers
    rows = []
    for lam in fibers:
        g = diff(total, lam)
        rows.append([diff(g, c) for c in columns])
    needed = len(fibers)
    report = ResidualReport("morse-rank", [], tol=0.0, samples=len(points))
    ranks = []
    ok = True
    for at in points:
        mat = np.array([[eval_expr(e, at) for e in row] for row in rows], dtype=float)
        if mat.size == 0:
            ranks.append(0)
            ok = ok and needed == 0
            continue
        svals = np.linalg.svd(mat, compute_uv=False)
        top = svals[0] if len(svals) else 0.0
        rank = int(np.sum(svals > 1e-10 * max(top, 1e-300))) if top > 0 else 0
        ranks.append(rank)
        ok = ok and rank == needed
    report.details["ranks"] = ranks
    report.details["needed"] = needed
    report.passed = ok
    report.overall_sup = 0.0 if ok else float(needed - min(ranks, default=0))
    return report


class _FiberSolver:
    """Numeric fiber resolution for residual sampling (least squares when the
    constraint block is linear, Newton otherwise)."""

    def __init__(self, fiber_eqs, fibers, coordinates):
        self.fibers = list(fibers)
        self.eqs = [simplify(e) for e in fiber_eqs]
        self.linear = None
        if not self.fibers:
            self.linear = True
            self.matrix = []
            self.residue = []
            return
        try:
            self.matrix, self.residue = linear_coefficients(self.eqs, self.fibers)
            self.linear = True
        except NotLinearError:
            self.linear = False

    def solve(self, binding):
        """Returns (fiber values dict, consistency residual)."""
        if not self.fibers:
            return {}, 0.0
        if self.linear:
            a = np.array(
                [[eval_expr(e, binding) for e in row] for row in self.matrix], dtype=float
            )
            b = -np.array([eval_expr(e, binding) for e in self.residue], dtype=float)
            sol, *_ = np.linalg.lstsq(a, b, rcond=None)
            consistency = float(np.max(np.abs(a @ sol - b))) if len(b) else 0.0
            return dict(zip(self.fibers, sol)), consistency
        best = None
        for start in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
            lam = np.full(len(self.fibers), start)
            for _ in range(50):
                full = dict(binding)
                full.update(dict(zip(self.fibers, lam)))
                g = np.array([eval_expr(e, full) for e in self.eqs], dtype=float)
                if np.max(np.abs(g)) <= 1e-12:
                    return dict(zip(self.fibers, lam)), 0.0
                jac = np.array(
                    [
                        [eval_expr(diff(e, m), full) for m in self.fibers]
                        for e in self.eqs
                    ],
                    dtype=float,
                )
                sol, *_ = np.linalg.lstsq(jac, -g, rcond=None)
                if not np.all(np.isfinite(sol)) or np.max(np.abs(sol)) < 1e-15:
                    break
                lam = lam + sol
            full = dict(binding)
            full.update(dict(zip(self.fibers, lam)))
            g = np.array([eval_expr(e, full) for e in self.eqs], dtype=float)
            residual = float(np.max(np.abs(g)))
            if best is None or residual < best[1]:
                best = (dict(zip(self.fibers, lam)), residual)
            if residual <= 1e-12:
                return best
        return best


def hj_residual(
    mf: MorseFamily,
    gamma: ClosedOneForm,
    rng=None,
    tol: float = 1e-8,
    samples: int = 50,
    box=DEFAULT_BOX,
    boxes=None,
    guards=(),
) -> ResidualReport:
    """Differential of the energy on the image of the one-form.

    Substitutes momenta by the form, differentiates in every remaining base
    coordinate, and solves the fiber block numerically at each sample point;
    the report separates coordinate residuals from fiber consistency.
    """
    positions = tuple(mf.base.positions)
    if tuple(gamma.coordinates) != positions:
        raise ChartMismatchError(
            f"one-form lives on {gamma.coordinates}, family base has {positions}"
        )
    subs = gamma.substitution()
    total = simplify(substitute(mf.total_energy, subs))
    fibers = list(mf.all_fibers)
    base_eqs = [
        (f"d/d{x}", diff(total, x))
        for x in positions
    ]
    fiber_eqs = [
        (f"fiber {lam}", diff(total, lam))
        for lam in fibers
    ]
    comps = gamma.component_exprs()
    rng = make_rng(rng if rng is not None else 0)
    solver = _FiberSolver([e for _, e in fiber_eqs], fibers, positions)
    coord_symbols = set(positions)
    for _, e in base_eqs + fiber_eqs:
        coord_symbols |= {s for s in e.free if s not in fibers}
    for c in comps:
        coord_symbols |= set(c.free)
    coord_symbols = sorted(coord_symbols)

    report = ResidualReport(mf.label or "hj", base_eqs + fiber_eqs, tol, samples)
    sup = 0.0
    consistency_sup = 0.0
    for _ in range(samples):
        binding = sample_binding(
            coord_symbols, rng, box=box, boxes=boxes, guards=guards, probe_exprs=list(comps)
        )
        lam_values, consistency = solver.solve(binding)
        consistency_sup = max(consistency_sup, consistency)
        full = dict(binding)
        full.update(lam_values)
        for name, e in base_eqs:
            v = abs(eval_expr(e, full))
            report.sup_norms[name] = max(report.sup_norms.get(name, 0.0), v)
            sup = max(sup, v)
    for name, e in fiber_eqs:
        report.sup_norms[name] = consistency_sup
    report.overall_sup = max(sup, consistency_sup)
    report.details["fiber_consistency"] = consistency_sup
    report.details["coordinate_sup"] = sup
    report.passed = report.overall_sup <= tol
    return report


def hj_residual_nondeg(
    H: Expr,
    gamma: ClosedOneForm,
    rng=None,
    tol: float = 1e-8,
    samples: int = 50,
    box=DEFAULT_BOX,
    boxes=None,
    guards=(),
) -> ResidualReport:
    """d(H on the image of the form): partials in every base coordinate plus a
    sampled constancy spread of the composed Hamiltonian."""
    subs = gamma.substitution()
    composed = simplify(substitute(H, subs))
    leftover = {
        s for s in composed.free if s in set(gamma.momentum_slots)
    }
    if leftover:
        raise ChartMismatchError(f"Hamiltonian momenta {sorted(leftover)} not covered by the form")
    equations = [(f"d/d{x}", diff(composed, x)) for x in gamma.coordinates]
    comps = gamma.component_exprs()
    rng = make_rng(rng if rng is not None else 0)
    symbols = set(gamma.coordinates) | set(composed.free)
    for c in comps:
        symbols |= set(c.free)
    symbols = sorted(symbols)
    report = ResidualReport("hj-explicit", equations, tol, samples)
    sup = 0.0
    values = []
    for _ in range(samples):
        binding = sample_binding(
            symbols, rng, box=box, boxes=boxes, guards=guards, probe_exprs=list(comps) + [composed]
        )
        values.append(eval_expr(composed, binding))
        for name, e in equations:
            v = abs(eval_expr(e, binding))
            report.sup_norms[name] = max(report.sup_norms.get(name, 0.0), v)
            sup = max(sup, v)
    report.overall_sup = sup
    report.details["constancy_spread"] = float(max(values) - min(values)) if values else 0.0
    report.details["composed_mean"] = float(np.mean(values)) if values else 0.0
    report.passed = sup <= tol
    return report


def gamma_relatedness(
    sys: ImplicitSystem,
    gamma: ClosedOneForm,
    base_traj: Trajectory,
    tol: float = 1e-5,
    params: dict | None = None,
) -> ResidualReport:
    """Lift a base trajectory through the form and test the full implicit
    system on it.

    Momentum velocities come from differentiating the form along the curve
    (chain rule on central finite differences of the base samples).
    """
    if len(base_traj.times) < 5:
        raise NumericFailureError("trajectory too short for finite differencing (< 5 samples)")
    times = base_traj.times
    h = times[1] - times[0]
    for i in range(len(times) - 1):
        if abs((times[i + 1] - times[i]) - h) > 1e-12 * max(1.0, abs(h)):
            raise NumericFailureError("relatedness check needs a uniform time grid")
    comps = gamma.component_exprs()
    coords = gamma.coordinates
    param_binding = dict(params or {})

    def full_binding(sample):
        b = dict(param_binding)
        b.update(sample)
        for slot, comp in zip(gamma.momentum_slots, comps):
            b[slot] = eval_expr(comp, b)
        return b

    lifted = [full_binding(s) for s in base_traj.samples]
    names = [f"dot[{s}]" for s in sys.states] + [f"constraint[{i}]" for i in range(len(sys.constraints))]
    report = ResidualReport("gamma-relatedness", [], tol, len(times) - 2)
    sup = 0.0
    for i in range(1, len(times) - 1):
        here = dict(lifted[i])
        lam = resolve_multipliers(sys, {**here, **param_binding})
        here.update(lam)
        here.update(param_binding)
        for s in sys.states:
            fd = (lifted[i + 1][s] - lifted[i - 1][s]) / (2.0 * h)
            v = abs(fd - eval_expr(sys.rhs[s], here))
            name = f"dot[{s}]"
            report.sup_norms[name] = max(report.sup_norms.get(name, 0.0), v)
            sup = max(sup, v)
        for j, c in enumerate(sys.constraints):
            v = abs(eval_expr(c, here))
            name = f"constraint[{j}]"
            report.sup_norms[name] = max(report.sup_norms.get(name, 0.0), v)
            sup = max(sup, v)
    report.overall_sup = sup
    report.passed = sup <= tol
    return report


def local_vf_residual(
    sigma: SectionSigma,
    gamma: ClosedOneForm,
    rng=None,
    tol: float = 1e-8,
    samples: int = 50,
    box=DEFAULT_BOX,
    boxes=None,
    guards=(),
) -> ResidualReport:
    """Self-consistency of an auxiliary section along the form.

    The section picks one phase velocity per point; transporting the form
    along its base part must reproduce the fiber part.  Residuals are the full
    chain-rule transport minus the prescribed fiber components.
    """
    coords = gamma.coordinates
    slots = gamma.momentum_slots
    if set(sigma.q_components) != set(coords) or set(sigma.p_components) != set(slots):
        raise ArityMismatchError("section components must cover the chart exactly")
    subs = gamma.substitution()
    comps = dict(zip(slots, gamma.component_exprs()))
    equations = []
    for slot in slots:
        transport = None
        for x in coords:
            piece = mul(diff(comps[slot], x), simplify(substitute(sigma.q_components[x], subs)))
            transport = piece if transport is None else add(transport, piece)
        target = simplify(substitute(sigma.p_components[slot], subs))
        equations.append((f"transport[{slot}]", simplify(add(transport, neg(target)))))
    return _sample_equations(
        "local-vector-field",
        equations,
        list(coords),
        tol=tol,
        rng=rng,
        box=box,
        boxes=boxes,
        guards=guards,
        probe=gamma.component_exprs(),
        samples=samples,
    )


# ---------------------------------------------------------------------------
# affine-in-acceleration specializations
# ---------------------------------------------------------------------------


def affine_symmetry_check(
    f, rng=None, tol: float = 1e-8, samples: int = 50, box=DEFAULT_BOX
) -> ResidualReport:
    """Velocity-gradient symmetry of the affine coefficients.

    Requires df_A/dq1^B to be symmetric in (A, B); the gradient of a scalar
    always passes, rotational couplings fail.
    """
    f = [coerce(x) for x in f]
    n = len(f)
    equations = []
    for a in range(n):
        for b in range(a + 1, n):
            r = simplify(
                add(diff(f[a], q(b + 1, 1)), neg(diff(f[b], q(a + 1, 1))))
            )
            equations.append((f"symmetry[{a + 1},{b + 1}]", r))
    coords = sorted(set().union(*(e.free for e in f)) | set())
    return _sample_equations(
        "affine-symmetry", equations, coords, tol=tol, rng=rng, box=box, samples=samples
    )


def affine_integrability_check(
    f, g, order: int = 2, rng=None, tol: float = 1e-8, samples: int = 50, box=DEFAULT_BOX
) -> ResidualReport:
    """Displayed compatibility criteria for affine-in-top-derivative systems."""
    f = [coerce(x) for x in f]
    g = coerce(g)
    n = len(f)
    equations = []
    if order == 2:
        # dg/dq0^B - d2g/(dq1^B dq0^A) q1^A + d2f_C/(dq0^B dq0^A) q1^C q1^A = 0
        for b in range(1, n + 1):
            total = diff(g, q(b, 0))
            for a in range(1, n + 1):
                total = add(total, neg(mul(diff(diff(g, q(b, 1)), q(a, 0)), sym(q(a, 1)))))
                for c in range(1, n + 1):
                    total = add(
                        total,
                        mul(
                            diff(diff(f[c - 1], q(b, 0)), q(a, 0)),
                            sym(q(c, 1)),
                            sym(q(a, 1)),
                        ),
                    )
            equations.append((f"integrability[{b}]", simplify(total)))
    elif order == 3:
        # d2g/(dq0^A dq1^B) q1^A + d3f_B/(dq0^A dq1^D dq1^C) q2^D q2^C q1^A
        #   - d2f_B/(dq1^C dq1^A) q2^C q2^A - dg/dq0^B = 0
        for b in range(1, n + 1):
            total = neg(diff(g, q(b, 0)))
            for a in range(1, n + 1):
                total = add(total, mul(diff(diff(g, q(b, 1)), q(a, 0)), sym(q(a, 1))))
                for c in range(1, n + 1):
                    total = add(
                        total,
                        neg(
                            mul(
                                diff(diff(f[b - 1], q(c, 1)), q(a, 1)),
                                sym(q(c, 2)),
                                sym(q(a, 2)),
                            )
                        ),
                    )
                    for d in range(1, n + 1):
                        total = add(
                            total,
                            mul(
                                diff(diff(diff(f[b - 1], q(a, 0)), q(d, 1)), q(c, 1)),
                                sym(q(d, 2)),
                                sym(q(c, 2)),
                                sym(q(a, 1)),
                            ),
                        )
            equations.append((f"compatibility[{b}]", simplify(total)))
    else:
        raise ValueError("order must be 2 or 3")
    coords = sorted(set().union(*(e.free for e in f)) | g.free)
    return _sample_equations(
        "affine-integrability", equations, coords, tol=tol, rng=rng, box=box, samples=samples
    )


@dataclass
class AffineSolution:
    form: ClosedOneForm
    closure: ResidualReport
    potential: Expr | None


def affine_hj_solve(
    f, g, order: int = 2, rng=None, tol: float = 1e-9, require_closed: bool = True
) -> AffineSolution:
    """Direct gradient construction of the candidate form for affine systems.

    Components come straight from the reduced gradient system; closure is
    verified (symbolically where it simplifies to zero, numerically
    otherwise).  Polynomial components integrate to a scalar potential by
    exact ray integration.
    """
    from .symbols import p as mom

    f = [coerce(x) for x in f]
    g = coerce(g)
    n = len(f)
    if order == 2:
        coords = tuple(q(a, 0) for a in range(1, n + 1)) + tuple(q(a, 1) for a in range(1, n + 1))
        slots = tuple(mom(a, 0) for a in range(1, n + 1)) + tuple(mom(a, 1) for a in range(1, n + 1))
        comps = []
        for b in range(1, n + 1):
            total = diff(g, q(b, 1))
            for a in range(1, n + 1):
                total = add(total, neg(mul(diff(f[a - 1], q(b, 0)), sym(q(a, 1)))))
            comps.append(simplify(total))
        comps.extend(simplify(x) for x in f)
    elif order == 3:
        coords = tuple(
            q(a, lvl) for lvl in range(3) for a in range(1, n + 1)
        )
        slots = tuple(mom(a, lvl) for lvl in range(3) for a in range(1, n + 1))
        comps = []
        for b in range(1, n + 1):
            total = diff(g, q(b, 1))
            for a in range(1, n + 1):
                for c in range(1, n + 1):
                    total = add(
                        total,
                        mul(
                            diff(diff(f[b - 1], q(a, 1)), q(c, 1)),
                            sym(q(a, 2)),
                            sym(q(c, 2)),
                        ),
                    )
            comps.append(simplify(total))
        for b in range(1, n + 1):
            total = None
            for c in range(1, n + 1):
                piece = neg(mul(diff(f[b - 1], q(c, 1)), sym(q(c, 2))))
                total = piece if total is None else add(total, piece)
            comps.append(simplify(total))
        comps.extend(simplify(x) for x in f)
    else:
        raise ValueError("order must be 2 or 3")

    form = ClosedOneForm(tuple(coords), tuple(slots), components=tuple(comps))
    closure = form.closure_report(rng=rng, tol=tol)
    if not closure.passed and require_closed:
        raise ClosureError(closure.details["worst_pair"], closure.overall_sup)
    potential = None
    if closure.passed:
        try:
            potential = potential_from_closed_form(comps, coords)
        except NotLinearError:
            potential = None
    return AffineSolution(form, closure, potential)
