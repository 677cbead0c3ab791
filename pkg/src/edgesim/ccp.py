"""Difference-of-convex programs solved by the convex-concave procedure.

A :class:`DcProgram` maximizes ``concave(v) + convex(v)`` subject to
``convex_i(v) + concave_i(v) <= 0`` and a box. An optional ``project``
callable replaces the box clip with an exact projection onto a smaller set
(box intersected with a budget, say); it receives the raw point. Each outer step replaces the convex
part of the objective and the concave parts of the constraints by their
tangents, which gives a convex subproblem whose feasible set lies inside the
original one. The subproblem is solved by projected-gradient ascent on a
log-barrier for the nonlinear constraints.

Function convention: a callable maps ``v`` to ``(value, gradient)`` for scalar
functions and ``(values, jacobian)`` with jacobian shape ``(k, n)`` for
vector-valued ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Fn = Callable[[np.ndarray], tuple]


class InfeasibleStart(ValueError):
    pass


@dataclass
class DcConstraint:
    convex: Fn
    concave: Optional[Fn] = None
    name: str = ""

    def __call__(self, v):
        val, jac = self.convex(v)
        if self.concave is not None:
            cv, cj = self.concave(v)
            val, jac = val + cv, jac + cj
        return val, jac


@dataclass
class DcProgram:
    concave: Fn
    convex: Optional[Fn]
    constraints: list
    lower: np.ndarray
    upper: np.ndarray
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def objective(self, v) -> float:
        val = self.concave(v)[0]
        if self.convex is not None:
            val += self.convex(v)[0]
        return float(val)

    def max_violation(self, v) -> float:
        worst = -np.inf
        for con in self.constraints:
            worst = max(worst, float(np.max(con(v)[0])))
        return worst


@dataclass
class ConvexProblem:
    """Maximize a concave objective subject to convex ``c(v) <= 0`` on a box."""

    objective: Fn
    constraints: list
    lower: np.ndarray
    upper: np.ndarray
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def proj(self, v):
        # clipping first and then projecting onto the budget is not the projection
        # onto the intersection, so a custom projector sees the raw point
        if self.project is not None:
            return self.project(v)
        return np.clip(v, self.lower, self.upper)

    def cons(self, v):
        if not self.constraints:
            return np.empty(0), np.empty((0, len(v)))
        vals, jacs = zip(*(c(v) for c in self.constraints))
        return np.concatenate([np.atleast_1d(x) for x in vals]), np.vstack([np.atleast_2d(j) for j in jacs])


@dataclass
class ConvexResult:
    x: np.ndarray
    value: float
    converged: bool
    iterations: int


@dataclass
class CcpTrace:
    iterates: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def value(self):
        return self.objectives[-1]


def linearize(g: Fn, x_k) -> Fn:
    """Tangent of ``g`` at ``x_k`` as a callable with the same convention."""
    x_k = np.array(x_k, dtype=float)
    g0, J0 = g(x_k)
    g0 = np.asarray(g0, dtype=float)
    J0 = np.asarray(J0, dtype=float)

    def tangent(v):
        return g0 + J0 @ (np.asarray(v, dtype=float) - x_k), J0

    return tangent


def _sum_fns(a: Fn, b: Optional[Fn]) -> Fn:
    if b is None:
        return a

    def f(v):
        va, ga = a(v)
        vb, gb = b(v)
        return va + vb, ga + gb

    return f


def project_budget(v, budget: float = 1.0):
    """Euclidean projection onto ``{v >= 0, sum(v) <= budget}`` by sorting."""
    w = np.maximum(v, 0.0)
    if w.sum() <= budget:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - budget
    idx = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_capped_budget(y, cap, budget: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {0 <= v <= cap, sum(v) <= budget}."""
    y = np.asarray(y, dtype=float)
    v = np.clip(y, 0.0, cap)
    if v.sum() <= budget:
        return v
    lo, hi = 0.0, float(y.max())
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if np.clip(y - mid, 0.0, cap).sum() > budget:
            lo = mid
        else:
            hi = mid
    return np.clip(y - hi, 0.0, cap)


def solve_convex(
    problem: ConvexProblem,
    start,
    tol: float = 1e-6,
    max_iter: int = 500,
    mu0: float | None = None,
    mu_decay: float = 0.1,
    mu_min: float = 1e-9,
) -> ConvexResult:
    """Projected-gradient ascent with backtracking and a log-barrier continuation.

    The start must satisfy every constraint. If it satisfies them strictly the
    barrier path is followed; otherwise steps are only accepted when they stay
    feasible. The best feasible iterate (never worse than the start) is
    returned.
    """
    x = problem.proj(np.array(start, dtype=float))
    f0, _ = problem.objective(x)
    cvals, _ = problem.cons(x)
    scale = max(1.0, abs(float(f0)))
    if cvals.size and cvals.max() > 1e-9 * scale:
        raise InfeasibleStart("no feasible point")
    use_barrier = bool(cvals.size) and cvals.max() < 0
    mu = 0.0
    if use_barrier:
        mu = mu0 if mu0 is not None else 1e-2 * scale / cvals.size
        mu_min = mu_min * scale

    def evaluate(v, with_grad=True):
        fv, fg = problem.objective(v)
        if not cvals.size:
            return float(fv), fg, True
        cv, cj = problem.cons(v)
        if use_barrier:
            if cv.max() >= 0:
                return -np.inf, None, False
            phi = float(fv) + mu * float(np.sum(np.log(-cv)))
            grad = fg + mu * (cj.T @ (1.0 / cv)) if with_grad else None
            return phi, grad, True
        ok = cv.max() <= 1e-12 * scale
        return (float(fv) if ok else -np.inf), fg, ok

    best_x, best_f = x.copy(), float(f0)
    phi, g, _ = evaluate(x)
    step = 1.0
    it = 0
    converged = False
    prev_x = prev_g = None
    while it < max_iter:
        if prev_x is not None:
            s = x - prev_x
            yv = g - prev_g
            sy = -float(s @ yv)
            step = float(s @ s) / sy if sy > 1e-16 else min(step * 4.0, 1e6)
            step = min(max(step, 1e-10), 1e6)
        t = step
        accepted = False
        d = None
        for _ in range(60):
            xn = problem.proj(x + t * g)
            d = xn - x
            if not np.any(d):
                break
            phin, gn, ok = evaluate(xn)
            if ok and phin >= phi + 1e-4 * float(g @ d):
                accepted = True
                break
            t *= 0.5
        it += 1
        pg = 0.0 if d is None else float(np.linalg.norm(d)) / max(t, 1e-300)
        if accepted:
            prev_x, prev_g = x, g
            x, phi, g = xn, phin, gn
            fx = float(problem.objective(x)[0])
            if fx > best_f:
                best_x, best_f = x.copy(), fx
        if not accepted or pg < tol or (accepted and np.linalg.norm(d) < tol * 1e-3):
            # stationary at this barrier weight
            if mu <= mu_min:
                converged = True
                break
            mu *= mu_decay
            phi, g, _ = evaluate(x)
            prev_x = prev_g = None
            step = 1.0
    return ConvexResult(best_x, best_f, converged, it)


def convexify(program: DcProgram, x_k) -> ConvexProblem:
    obj = program.concave
    if program.convex is not None:
        obj = _sum_fns(program.concave, linearize(program.convex, x_k))
    cons = []
    for con in program.constraints:
        cons.append(_sum_fns(con.convex, linearize(con.concave, x_k) if con.concave is not None else None))
    return ConvexProblem(obj, cons, program.lower, program.upper, program.project)


def ccp(
    program: DcProgram,
    start,
    max_outer: int = 50,
    tol: float = 1e-6,
    inner_max_iter: int = 500,
    feas_tol: float = 1e-9,
) -> CcpTrace:
    """Convex-concave procedure; the objective trace is non-decreasing."""
    x = np.array(start, dtype=float)
    if program.constraints and program.max_violation(x) > feas_tol * max(1.0, abs(program.objective(x))):
        raise InfeasibleStart("no feasible point")
    trace = CcpTrace(iterates=[x.copy()], objectives=[program.objective(x)])
    for _ in range(max_outer):
        sub = convexify(program, x)
        res = solve_convex(sub, x, tol=tol, max_iter=inner_max_iter)
        x_new = res.x
        p_new = program.objective(x_new)
        p_old = trace.objectives[-1]
        trace.iterates.append(x_new.copy())
        trace.objectives.append(p_new)
        trace.iterations += 1
        x = x_new
        if abs(p_new - p_old) < tol * max(1.0, abs(p_old)):
            trace.converged = True
            break
    return trace
