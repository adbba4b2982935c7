"""Bounded-variable revised simplex with Bland's anti-cycling rule.

Two phases over equality-standard form (inequalities get slacks); nonbasic
variables rest at a bound, the dense basis inverse is updated per pivot and
refactorized periodically. A light presolve removes fixed variables, alias
rows (x - y = 0), singleton rows, and empty rows before the iteration starts.
Determinism: entering/leaving choices follow Bland's smallest-index rule over
the fixed variable registration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SolverError
from .lp import INF, LpProgram, check_feasible

FEAS_TOL = 1e-9
OPT_TOL = 1e-8
_REFACTOR_EVERY = 150


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | numerical_failure
    objective: Optional[float] = None
    assignment: dict[str, float] = field(default_factory=dict)
    message: str = ""
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "assignment": self.assignment,
            "message": self.message,
            "iterations": self.iterations,
        }


@dataclass
class _Reduced:
    names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    cost: np.ndarray
    rows: list[dict[int, float]]
    rhs: list[float]
    relations: list[str]
    fixed: dict[str, float]
    alias_of: dict[str, str]
    obj_offset: float
    infeasible_reason: Optional[str] = None


def _presolve(program: LpProgram) -> _Reduced:
    lb = {v.name: v.lb for v in program.variables}
    ub = {v.name: v.ub for v in program.variables}
    sense = 1.0 if program.sense == "min" else -1.0
    cost = {v.name: sense * program.objective.get(v.name, 0.0) for v in program.variables}

    parent: dict[str, str] = {v.name: v.name for v in program.variables}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    fixed: dict[str, float] = {}
    rows = [(c.name, dict(c.coeffs), c.relation, c.rhs) for c in program.constraints]
    reason: Optional[str] = None

    changed = True
    guard = 0
    while changed and reason is None and guard < 50:
        guard += 1
        changed = False
        # collapse aliases / fixed vars into rows
        new_rows = []
        for (name, coeffs, relation, rhs) in rows:
            agg: dict[str, float] = {}
            for var, coef in coeffs.items():
                r = find(var)
                if r in fixed:
                    rhs -= coef * fixed[r]
                else:
                    agg[r] = agg.get(r, 0.0) + coef
            agg = {v: c for v, c in agg.items() if abs(c) > 1e-14}
            if not agg:
                bad = (relation == "=" and abs(rhs) > FEAS_TOL) or (
                    relation == "<=" and rhs < -FEAS_TOL
                )
                if bad:
                    reason = f"constraint {name} reduces to {0} {relation} {rhs}"
                    break
                changed = True
                continue
            if len(agg) == 1 and relation == "=":
                (var, coef), = agg.items()
                val = rhs / coef
                if val < lb[var] - FEAS_TOL or val > ub[var] + FEAS_TOL:
                    reason = f"constraint {name} fixes {var} = {val} outside bounds"
                    break
                fixed[var] = val
                changed = True
                continue
            if len(agg) == 1 and relation == "<=":
                (var, coef), = agg.items()
                if coef > 0:
                    ub[var] = min(ub[var], rhs / coef)
                else:
                    lb[var] = max(lb[var], rhs / coef)
                if lb[var] > ub[var] + FEAS_TOL:
                    reason = f"constraint {name} empties the domain of {var}"
                    break
                changed = True
                continue
            if (
                len(agg) == 2
                and relation == "="
                and abs(rhs) <= 1e-14
            ):
                (v1, c1), (v2, c2) = sorted(agg.items())
                if abs(c1 + c2) <= 1e-14:  # x - y = 0
                    r1, r2 = find(v1), find(v2)
                    if r1 != r2:
                        parent[r1] = r2
                        lb[r2] = max(lb[r2], lb[r1])
                        ub[r2] = min(ub[r2], ub[r1])
                        cost[r2] = cost.get(r2, 0.0) + cost.get(r1, 0.0)
                        if lb[r2] > ub[r2] + FEAS_TOL:
                            reason = f"alias {v1}={v2} empties the domain"
                            break
                        changed = True
                        continue
            new_rows.append((name, agg, relation, rhs))
        if reason is None:
            rows = new_rows
        # fixed bounds
        for var in list(lb):
            r = find(var)
            if r == var and var not in fixed and ub[var] - lb[var] <= 1e-14:
                if ub[var] < lb[var] - FEAS_TOL:
                    reason = f"empty domain for {var}"
                    break
                fixed[var] = lb[var]
                changed = True

    offset = sum(fixed[v] * cost.get(v, 0.0) for v in fixed)

    live = sorted(
        v for v in lb if parent[v] == v and v not in fixed
    )
    index = {v: k for k, v in enumerate(live)}
    r_rows: list[dict[int, float]] = []
    r_rhs: list[float] = []
    r_rel: list[str] = []
    for (name, coeffs, relation, rhs) in rows:
        agg: dict[int, float] = {}
        for var, coef in coeffs.items():
            r = find(var)
            if r in fixed:
                rhs -= coef * fixed[r]
            else:
                k = index[r]
                agg[k] = agg.get(k, 0.0) + coef
        r_rows.append(agg)
        r_rhs.append(rhs)
        r_rel.append(relation)

    alias_of = {}
    for v in lb:
        r = find(v)
        if r != v:
            alias_of[v] = r
    return _Reduced(
        names=live,
        lb=np.array([lb[v] for v in live], dtype=float),
        ub=np.array([ub[v] for v in live], dtype=float),
        cost=np.array([cost[v] for v in live], dtype=float),
        rows=r_rows,
        rhs=r_rhs,
        relations=r_rel,
        fixed=fixed,
        alias_of=alias_of,
        obj_offset=offset,
        infeasible_reason=reason,
    )


class _Simplex:
    def __init__(self, A: np.ndarray, b: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.m, self.n = A.shape
        self.iterations = 0

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular basis: {exc}") from exc

    def prepare(self):
        n, m = self.n, self.m
        self.status = np.zeros(n + m, dtype=np.int8)  # 0 at-lb, 1 at-ub, 2 basic
        self.x = np.where(np.isfinite(self.lb), self.lb, 0.0)
        # artificial columns appended conceptually; store sign per row
        resid = self.b - self.A @ self.x[:n] if n else self.b.copy()
        self.art_sign = np.where(resid >= 0, 1.0, -1.0)
        self.x = np.concatenate([self.x, np.abs(resid)])
        self.lb = np.concatenate([self.lb, np.zeros(m)])
        self.ub = np.concatenate([self.ub, np.full(m, INF)])
        self.basis = list(range(n, n + m))
        self.status[n:] = 2
        self.Binv = np.diag(1.0 / self.art_sign)
        self._update_buf = np.empty((m, m))

    def col(self, j: int) -> np.ndarray:
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = self.art_sign[j - self.n]
        return e

    def _full_matrix(self) -> np.ndarray:
        art = np.diag(self.art_sign)
        return np.hstack([self.A, art]) if self.n else art

    def run_phase(self, cost: np.ndarray, max_iter: int) -> str:
        Afull = self._full_matrix()
        total = len(cost)
        basic_mask = np.zeros(total, dtype=bool)
        basic_mask[self.basis] = True
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            self.iterations += 1
            if self.iterations % _REFACTOR_EVERY == 0:
                B = Afull[:, self.basis]
                try:
                    self.Binv = np.linalg.inv(B)
                except np.linalg.LinAlgError:
                    return "numerical_failure"
            cb = cost[self.basis]
            y = cb @ self.Binv
            # block-wise pricing: Bland needs the smallest eligible index, so
            # scanning low blocks first usually avoids pricing every column
            movable = self.ub[:total] > self.lb[:total]
            entering = -1
            block = 512
            for lo in range(0, total, block):
                hi = min(lo + block, total)
                d = cost[lo:hi] - y @ Afull[:, lo:hi]
                stat = self.status[lo:hi]
                eligible = ~basic_mask[lo:hi] & movable[lo:hi] & (
                    ((stat == 0) & (d < -OPT_TOL)) | ((stat == 1) & (d > OPT_TOL))
                )
                if eligible.any():
                    entering = lo + int(np.argmax(eligible))
                    break
            if entering < 0:
                return "optimal"
            w = self.Binv @ Afull[:, entering]
            increasing = self.status[entering] == 0
            basis_arr = np.asarray(self.basis)
            xb = self.x[basis_arr]
            lbb = self.lb[basis_arr]
            ubb = self.ub[basis_arr]
            sign = 1.0 if increasing else -1.0
            # basic values move by -sign * w * t; smallest blocking ratio wins,
            # ties by smallest basic variable index (Bland)
            delta = -sign * w
            with np.errstate(divide="ignore", invalid="ignore"):
                t_low = np.where(delta < -1e-11, (xb - lbb) / (-delta), np.inf)
                t_high = np.where(delta > 1e-11, (ubb - xb) / delta, np.inf)
            t_rows = np.minimum(t_low, t_high)
            t_list = np.where(np.isnan(t_rows), np.inf, t_rows).tolist()
            best_t = self.ub[entering] - self.lb[entering]  # bound flip
            leave_pos = -1
            basis = self.basis
            for r in range(self.m):
                t = t_list[r]
                if t == np.inf:
                    continue
                if t < best_t - 1e-12 or (
                    t <= best_t + 1e-12 and leave_pos >= 0 and basis[r] < basis[leave_pos]
                ):
                    best_t = max(t, 0.0)
                    leave_pos = r
            if not np.isfinite(best_t):
                return "unbounded"
            t = max(best_t, 0.0)
            # apply step
            self.x[self.basis] = xb - sign * w * t
            self.x[entering] = self.x[entering] + sign * t
            if leave_pos < 0:
                # bound flip, basis unchanged
                self.status[entering] = 1 if increasing else 0
                continue
            leaving = self.basis[leave_pos]
            # leaving variable lands on one of its bounds
            if abs(self.x[leaving] - self.lb[leaving]) <= abs(
                (self.ub[leaving] if np.isfinite(self.ub[leaving]) else self.lb[leaving])
                - self.x[leaving]
            ):
                self.status[leaving] = 0
                self.x[leaving] = self.lb[leaving]
            else:
                self.status[leaving] = 1
                self.x[leaving] = self.ub[leaving]
            self.basis[leave_pos] = entering
            basic_mask[leaving] = False
            basic_mask[entering] = True
            self.status[entering] = 2
            # rank-one update of the basis inverse (buffer avoids reallocation)
            piv = w[leave_pos]
            if abs(piv) < 1e-12:
                return "numerical_failure"
            pivrow = self.Binv[leave_pos] / piv
            np.multiply(w[:, None], pivrow[None, :], out=self._update_buf)
            self.Binv -= self._update_buf
            self.Binv[leave_pos] = pivrow


def solve(program: LpProgram) -> LpSolution:
    """Solve an LpProgram; status optimal / infeasible / unbounded, or
    numerical_failure with diagnostics. Optimal solutions are re-checked for
    feasibility at 1e-7 before being returned."""
    red = _presolve(program)
    if red.infeasible_reason:
        return LpSolution(status="infeasible", message=red.infeasible_reason)

    n_struct = len(red.names)
    slack_rows = [r for r, rel in enumerate(red.relations) if rel == "<="]
    n = n_struct + len(slack_rows)
    m = len(red.rows)


    def expand(xvals: np.ndarray) -> dict[str, float]:
        values = dict(red.fixed)
        for k, v in enumerate(red.names):
            values[v] = float(xvals[k])
        for v, r in red.alias_of.items():
            values[v] = values.get(r, red.fixed.get(r, 0.0))
        return values

    if m == 0:
        # bounds-only program: put each variable at its cheapest finite bound
        xv = np.zeros(n_struct)
        for k in range(n_struct):
            if red.cost[k] >= 0:
                xv[k] = red.lb[k] if np.isfinite(red.lb[k]) else 0.0
            else:
                if not np.isfinite(red.ub[k]):
                    return LpSolution(status="unbounded", message=f"{red.names[k]} unbounded")
                xv[k] = red.ub[k]
        assignment = expand(xv)
        objective = float(
            sum(program.objective.get(v, 0.0) * assignment.get(v, 0.0) for v in program.objective)
        )
        return LpSolution(status="optimal", objective=objective, assignment=assignment)

    A = np.zeros((m, n))
    b = np.array(red.rhs, dtype=float)
    for r, row in enumerate(red.rows):
        for k, coef in row.items():
            A[r, k] = coef
    for s, r in enumerate(slack_rows):
        A[r, n_struct + s] = 1.0
    lb = np.concatenate([red.lb, np.zeros(len(slack_rows))])
    ub = np.concatenate([red.ub, np.full(len(slack_rows), INF)])

    sx = _Simplex(A, b, lb, ub)
    sx.prepare()
    max_iter = 200 * (m + n) + 20000

    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    try:
        status = sx.run_phase(phase1_cost, max_iter)
    except SolverError as exc:
        return LpSolution(status="numerical_failure", message=str(exc))
    if status in ("numerical_failure", "iteration_limit"):
        return LpSolution(status="numerical_failure", message=f"phase 1: {status}")
    art_value = float(phase1_cost @ sx.x)
    if art_value > 1e-7:
        return LpSolution(status="infeasible", message=f"phase 1 objective {art_value:.3e}")
    # freeze artificials at zero for phase 2
    sx.ub[n:] = 0.0

    phase2_cost = np.concatenate([red.cost, np.zeros(len(slack_rows)), np.zeros(m)])
    try:
        status = sx.run_phase(phase2_cost, max_iter)
    except SolverError as exc:
        return LpSolution(status="numerical_failure", message=str(exc))
    if status in ("numerical_failure", "iteration_limit"):
        return LpSolution(status="numerical_failure", message=f"phase 2: {status}")
    if status == "unbounded":
        return LpSolution(status="unbounded", message="phase 2 detected an unbounded ray")

    xv = sx.x[:n_struct]
    assignment = expand(xv)
    report = check_feasible(program, assignment, tolerance=1e-7)
    if not report.feasible:
        return LpSolution(
            status="numerical_failure",
            message=f"solution failed the feasibility re-check: {report.violated[0]}",
            iterations=sx.iterations,
        )
    objective = float(
        sum(program.objective.get(v, 0.0) * assignment.get(v, 0.0) for v in program.objective)
    )
    return LpSolution(
        status="optimal",
        objective=objective,
        assignment=assignment,
        iterations=sx.iterations,
    )
