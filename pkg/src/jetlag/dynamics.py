"""Runnable form of Morse families: implicit systems, multiplier resolution,
fixed-step RK4 with per-stage constraint solving, trajectory lifting.

A degenerate point (singular constraint Jacobian) aborts integration with a
typed error; the toolkit treats that as structure, not noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import diff, linear_coefficients
from .errors import (
    ChartMismatchError,
    ConstraintViolationError,
    NonCotangentChartError,
    NotLinearError,
    NumericFailureError,
    SingularJacobianError,
    StepSizeError,
)
from .expr import Expr, eval_expr, lambdify, neg, simplify
from .families import MorseFamily

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ImplicitSystem:
    """q' = dE/dp, p' = -dE/dq plus algebraic constraints in the multipliers."""

    states: tuple
    rhs: dict
    constraints: tuple
    multipliers: tuple
    energy: Expr
    label: str = ""

    def __post_init__(self):
        if set(self.rhs) != set(self.states):
            raise ChartMismatchError("rhs must cover every state exactly once")


@dataclass
class Trajectory:
    times: list
    samples: list  # one {Symbol: float} binding per time, fixed symbol set
    columns: tuple  # symbol order for CSV
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.samples):
            raise ChartMismatchError("one sample per time required")
        if any(b - a <= 0 for a, b in zip(self.times, self.times[1:])):
            raise ChartMismatchError("times must be strictly increasing")

    def column(self, symbol):
        return np.array([s[symbol] for s in self.samples])

    def energies(self):
        return np.array(self.meta["energy"]) if "energy" in self.meta else None


def assemble(mf: MorseFamily) -> ImplicitSystem:
    """Differential part from the canonical pairing, constraints from fibers."""
    base = mf.base
    if not base.positions or len(base.positions) != len(base.momenta):
        raise NonCotangentChartError(f"chart {base.space} is not cotangent-type")
    total = mf.total_energy
    rhs = {}
    for x, y in zip(base.positions, base.momenta):
        rhs[x] = diff(total, y)
        rhs[y] = simplify(neg(diff(total, x)))
    constraints = tuple(simplify(c) for c in mf.fiber_equations())
    return ImplicitSystem(
        states=tuple(base.positions) + tuple(base.momenta),
        rhs=rhs,
        constraints=constraints,
        multipliers=tuple(mf.all_fibers),
        energy=total,
        label=mf.label,
    )


class _MultiplierSolver:
    """Resolve constraint multipliers at a state point.

    Linear constraints solve directly (square solve, or least squares with a
    full-column-rank check); nonlinear ones go through Newton with warm
    starting.  Singular Jacobians raise with the observed rank.
    """

    def __init__(self, sys: ImplicitSystem):
        self.sys = sys
        self.n_mult = len(sys.multipliers)
        self.n_cons = len(sys.constraints)
        self.symbols = list(sys.states) + list(sys.multipliers)
        params = set()
        for e in list(sys.constraints) + [sys.rhs[s] for s in sys.states]:
            params |= {s for s in e.free if s not in self.symbols}
        self.params = sorted(params)
        self.all_symbols = self.symbols + self.params
        try:
            matrix, residue = linear_coefficients(sys.constraints, sys.multipliers)
            self.linear = True
            flat = [entry for row in matrix for entry in row]
            self._matrix_fn = lambdify(flat, list(sys.states) + self.params)
            self._residue_fn = lambdify(residue, list(sys.states) + self.params)
        except NotLinearError:
            self.linear = False
            self._cons_fn = lambdify(list(sys.constraints), self.all_symbols)
            jac = [
                [diff(c, m) for m in sys.multipliers] for c in sys.constraints
            ]
            self._jac_fn = lambdify([e for row in jac for e in row], self.all_symbols)

    def solve(self, state_vec, param_vec, warm=None):
        state_vec = [float(v) for v in state_vec]
        if self.n_mult == 0:
            return np.zeros(0)
        if self.linear:
            try:
                a = np.array(self._matrix_fn(list(state_vec) + list(param_vec)))
                b = -np.array(self._residue_fn(list(state_vec) + list(param_vec)))
            except (OverflowError, ZeroDivisionError, ValueError) as exc:
                raise NumericFailureError(f"constraint evaluation failed: {exc}") from exc
            a = a.reshape(self.n_cons, self.n_mult)
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise NumericFailureError("constraint evaluation produced non-finite values")
            rank = np.linalg.matrix_rank(a, tol=_RANK_TOL * max(1.0, _spectral(a)))
            if rank < self.n_mult:
                raise SingularJacobianError(int(rank), self.n_mult)
            if self.n_cons == self.n_mult:
                sol = np.linalg.solve(a, b)
            else:
                sol, *_ = np.linalg.lstsq(a, b, rcond=None)
                if np.max(np.abs(a @ sol - b)) > 1e-9 * (1.0 + np.max(np.abs(b))):
                    raise ConstraintViolationError(
                        "overdetermined multiplier system is inconsistent"
                    )
            return sol
        if self.n_cons != self.n_mult:
            raise SingularJacobianError(self.n_cons, self.n_mult)
        starts = [np.array(warm)] if warm is not None else []
        starts += [np.full(self.n_mult, v) for v in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0)]
        last_error = None
        for start in starts:
            try:
                return self._newton(start, state_vec, param_vec)
            except (SingularJacobianError, NumericFailureError) as exc:
                last_error = exc
        raise last_error

    def _newton(self, lam, state_vec, param_vec):
        base = list(state_vec) + list(lam) + list(param_vec)
        for _ in range(50):
            base[len(self.sys.states) : len(self.sys.states) + self.n_mult] = list(lam)
            g = np.array(self._cons_fn(base))
            if np.max(np.abs(g)) <= 1e-12:
                return lam
            j = np.array(self._jac_fn(base)).reshape(self.n_cons, self.n_mult)
            rank = np.linalg.matrix_rank(j, tol=_RANK_TOL * max(1.0, _spectral(j)))
            if rank < self.n_mult:
                raise SingularJacobianError(int(rank), self.n_mult)
            lam = lam - np.linalg.solve(j, g)
        raise NumericFailureError("multiplier Newton iteration did not converge")


def _spectral(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def resolve_multipliers(sys: ImplicitSystem, at: dict, warm=None) -> dict:
    """Multiplier values at one point; raises SingularJacobianError when the
    constraint Jacobian cannot pin them down."""
    solver = _MultiplierSolver(sys)
    state_vec = [float(at[s]) for s in sys.states]
    param_vec = [float(at[s]) for s in solver.params]
    warm_vec = None
    if warm is not None:
        warm_vec = [float(warm[m]) for m in sys.multipliers]
    sol = solver.solve(state_vec, param_vec, warm_vec)
    return {m: float(v) for m, v in zip(sys.multipliers, sol)}


def integrate_rk4(sys: ImplicitSystem, init: dict, t0: float, t1: float, h: float) -> Trajectory:
    """Classical fixed-step RK4 on the multiplier-resolved vector field.

    Multipliers are re-resolved at every stage (warm-started); samples carry
    the resolved multiplier values and the energy.
    """
    if h <= 0:
        raise StepSizeError(f"step size must be positive, got {h}")
    if t1 < t0:
        raise StepSizeError("t1 must be >= t0")
    # t1 - t0 is expected to be an integral number of steps
    n_steps = max(0, int(round((t1 - t0) / h)))

    solver = _MultiplierSolver(sys)
    states = list(sys.states)
    mults = list(sys.multipliers)
    missing = [s for s in states if s not in init]
    if missing:
        raise ConstraintViolationError(f"initial data misses state values for {missing}")
    param_vec = []
    for s in solver.params:
        if s not in init:
            raise ConstraintViolationError(f"no value for parameter {s} in initial data")
        param_vec.append(float(init[s]))
    rhs_fn = lambdify([sys.rhs[s] for s in states], states + mults + solver.params)
    cons_fn = lambdify(list(sys.constraints), states + mults + solver.params)
    energy_fn = lambdify([sys.energy], states + mults + solver.params)

    y = np.array([float(init[s]) for s in states])
    warm = solver.solve(y, param_vec)
    g0 = cons_fn(list(y) + list(warm) + param_vec)
    if g0 and max(abs(v) for v in g0) > 1e-9:
        raise ConstraintViolationError(
            f"initial data violates constraints by {max(abs(v) for v in g0):g}"
        )

    def vector_field(yv, warm_lam):
        lam = solver.solve(yv, param_vec, warm_lam)
        args = [float(v) for v in yv] + [float(v) for v in lam] + param_vec
        try:
            out = rhs_fn(args)
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise NumericFailureError(f"vector field evaluation failed: {exc}") from exc
        for v in out:
            if isinstance(v, complex) or not math.isfinite(v):
                raise NumericFailureError("vector field produced a non-finite value")
        return np.array(out), lam

    times = [t0]
    samples = []
    energies = []

    def record(yv, lam):
        binding = {s: float(v) for s, v in zip(states, yv)}
        binding.update({m: float(v) for m, v in zip(mults, lam)})
        samples.append(binding)
        args = [float(v) for v in yv] + [float(v) for v in lam] + param_vec
        try:
            energies.append(float(energy_fn(args)[0]))
        except (OverflowError, ZeroDivisionError, ValueError):
            energies.append(float("nan"))

    record(y, warm)
    t = t0
    # overflow surfaces through the explicit finite checks, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            k1, lam1 = vector_field(y, warm)
            k2, lam2 = vector_field(y + 0.5 * h * k1, lam1)
            k3, lam3 = vector_field(y + 0.5 * h * k2, lam2)
            k4, lam4 = vector_field(y + h * k3, lam3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise NumericFailureError("state became non-finite during integration")
            t += h
            lam_end = solver.solve(y, param_vec, lam4)
            times.append(t)
            record(y, lam_end)
            warm = lam_end

    columns = tuple(states) + tuple(mults)
    meta = {
        "h": h,
        "t0": t0,
        "t1": t1,
        "energy": energies,
        "params": {str(s): v for s, v in zip(solver.params, param_vec)},
        "label": sys.label,
    }
    return Trajectory(times, samples, columns, meta)


def energy_drift(traj: Trajectory) -> float:
    """max |E(t) - E(t0)| / (1 + |E(t0)|) along the run."""
    energies = traj.energies()
    if energies is None or len(energies) == 0:
        return 0.0
    e0 = energies[0]
    return float(np.max(np.abs(energies - e0)) / (1.0 + abs(e0)))


def lift_trajectory(gamma, base: Trajectory) -> Trajectory:
    """Append momenta gamma(q(t)) to every sample of a base trajectory."""
    from .hamjac import ClosedOneForm

    if not isinstance(gamma, ClosedOneForm):
        raise ChartMismatchError("lift needs a ClosedOneForm")
    comps = gamma.component_exprs()
    out_samples = []
    for sample in base.samples:
        missing = [s for s in gamma.coordinates if s not in sample]
        if missing:
            raise ChartMismatchError(f"base sample misses coordinates {missing}")
        new = dict(sample)
        for mom, comp in zip(gamma.momentum_slots, comps):
            new[mom] = eval_expr(comp, sample)
        out_samples.append(new)
    columns = tuple(base.columns) + tuple(
        m for m in gamma.momentum_slots if m not in base.columns
    )
    return Trajectory(list(base.times), out_samples, columns, dict(base.meta))


def project_trajectory(traj: Trajectory, coordinates) -> Trajectory:
    """Restrict every sample to the given coordinates (base projection)."""
    coordinates = tuple(coordinates)
    samples = []
    for s in traj.samples:
        missing = [c for c in coordinates if c not in s]
        if missing:
            raise ChartMismatchError(f"samples do not bind {missing}")
        samples.append({c: s[c] for c in coordinates})
    meta = dict(traj.meta)
    meta.pop("energy", None)
    return Trajectory(list(traj.times), samples, coordinates, meta)


def trajectory_csv(traj: Trajectory) -> str:
    """Canonical CSV: t, roster columns, E; 17 significant digits."""
    header = ["t"] + [str(s) for s in traj.columns] + ["E"]
    lines = [",".join(header)]
    energies = traj.energies()
    for i, (t, sample) in enumerate(zip(traj.times, traj.samples)):
        row = [_fmt(t)] + [_fmt(sample[s]) for s in traj.columns]
        row.append(_fmt(float(energies[i])) if energies is not None else "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"
