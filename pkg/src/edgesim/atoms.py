"""Array-encoded difference-of-convex programs and a compiled CCP engine.

Every function handled here is a sum of a constant, a linear form and *atoms*
``coef * phi(l @ v + b)`` with ``phi`` either a square or ``log2``. That family
covers both scheduler programs, gives exact Hessians, and lets the whole
convex-concave loop run inside numba.

The inner solver is a log-barrier method with damped Newton steps; the box
enters the barrier too, so iterates stay strictly interior. The best feasible
point of each convexified problem (never worse than its start) is kept, which
makes the outer objective trace non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .ccp import CcpTrace, DcConstraint, DcProgram, project_capped_budget

SQUARE = 0
LOG2 = 1
_LN2 = np.log(2.0)


class BlockBuilder:
    """Accumulates rows of a vector function over ``n`` variables."""

    def __init__(self, n: int):
        self.n = n
        self.const: list[float] = []
        self.lin: list[np.ndarray] = []
        self.terms: list[tuple[int, int, float, np.ndarray, float]] = []

    def add_row(self, const: float = 0.0, lin=None) -> int:
        self.const.append(float(const))
        row = np.zeros(self.n)
        if lin is not None:
            for idx, val in lin:
                row[idx] += val
        self.lin.append(row)
        return len(self.const) - 1

    def add_term(self, row: int, kind: int, coef: float, coeffs, offset: float = 0.0) -> None:
        L = np.zeros(self.n)
        for idx, val in coeffs:
            L[idx] += val
        self.terms.append((row, kind, float(coef), L, float(offset)))

    def build(self) -> "AtomBlock":
        k = len(self.const)
        T = len(self.terms)
        return AtomBlock(
            const=np.array(self.const, dtype=float),
            lin=np.array(self.lin, dtype=float).reshape(k, self.n),
            t_row=np.array([t[0] for t in self.terms], dtype=np.int64),
            t_kind=np.array([t[1] for t in self.terms], dtype=np.int64),
            t_coef=np.array([t[2] for t in self.terms], dtype=float),
            t_L=np.array([t[3] for t in self.terms], dtype=float).reshape(T, self.n),
            t_b=np.array([t[4] for t in self.terms], dtype=float),
        )


@dataclass
class AtomBlock:
    const: np.ndarray  # (k,)
    lin: np.ndarray  # (k, n)
    t_row: np.ndarray  # (T,)
    t_kind: np.ndarray
    t_coef: np.ndarray
    t_L: np.ndarray  # (T, n)
    t_b: np.ndarray

    @property
    def k(self) -> int:
        return len(self.const)

    def __call__(self, v):
        """Values and jacobian, evaluated with numpy."""
        v = np.asarray(v, dtype=float)
        y = self.t_L @ v + self.t_b
        val = self.const + self.lin @ v
        jac = self.lin.copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            sq = self.t_kind == SQUARE
            phi = np.where(sq, y * y, np.log2(np.where(y > 0, y, np.nan)))
            dphi = np.where(sq, 2.0 * y, 1.0 / (y * _LN2))
        phi = np.where(np.isnan(phi), -np.inf, phi)
        np.add.at(val, self.t_row, self.t_coef * phi)
        np.add.at(jac, self.t_row, (self.t_coef * dphi)[:, None] * self.t_L)
        return val, jac

    def scalar(self):
        def f(v):
            val, jac = self(v)
            return float(val[0]), jac[0]

        return f

    def arrays(self):
        return (self.const, self.lin, self.t_row, self.t_kind, self.t_coef, self.t_L, self.t_b)


@dataclass
class AtomProgram:
    """maximize obj_concave + obj_convex  s.t.  con_convex + con_concave <= 0, lo <= v <= hi.

    ``budget`` lists variables whose sum may not exceed one.
    """

    obj_concave: AtomBlock
    obj_convex: AtomBlock
    con_convex: AtomBlock
    con_concave: AtomBlock
    lower: np.ndarray
    upper: np.ndarray
    budget: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.lower)

    def objective(self, v) -> float:
        return float(self.obj_concave(v)[0][0] + self.obj_convex(v)[0][0])

    def constraints(self, v):
        a, _ = self.con_convex(v)
        b, _ = self.con_concave(v)
        return a + b

    def to_dc_program(self) -> DcProgram:
        """Same program for the callable-based reference kernel (budget by projection)."""
        cons = [DcConstraint(self.con_convex, self.con_concave, "all")]
        project = None
        if len(self.budget):
            idx = self.budget

            lo, hi = self.lower, self.upper

            def project(v):
                out = np.clip(v, lo, hi)
                out[idx] = project_capped_budget(v[idx], hi[idx], 1.0)
                return out

        return DcProgram(self.obj_concave.scalar(), self.obj_convex.scalar(), cons, self.lower, self.upper, project)


# ---------------------------------------------------------------- compiled core


@nb.njit(cache=True)
def _csr(t_L):
    """Row-compressed copy of the dense atom coefficient matrix."""
    na, n = t_L.shape
    ptr = np.zeros(na + 1, dtype=np.int64)
    for i in range(na):
        c = 0
        for j in range(n):
            if t_L[i, j] != 0.0:
                c += 1
        ptr[i + 1] = ptr[i] + c
    idx = np.empty(ptr[na], dtype=np.int64)
    val = np.empty(ptr[na])
    p = 0
    for i in range(na):
        for j in range(n):
            if t_L[i, j] != 0.0:
                idx[p] = j
                val[p] = t_L[i, j]
                p += 1
    return ptr, idx, val


@nb.njit(cache=True)
def _eval(const, lin, t_row, t_kind, t_coef, ptr, idx, lv, t_b, v, val, jac, want_jac):
    """val (and jac) of a block at v; returns False if a log argument is not positive."""
    k, n = lin.shape
    for r in range(k):
        acc = const[r]
        for j in range(n):
            acc += lin[r, j] * v[j]
        val[r] = acc
        if want_jac:
            for j in range(n):
                jac[r, j] = lin[r, j]
    ok = True
    for i in range(t_row.shape[0]):
        y = t_b[i]
        for p in range(ptr[i], ptr[i + 1]):
            y += lv[p] * v[idx[p]]
        r = t_row[i]
        if t_kind[i] == 0:
            val[r] += t_coef[i] * y * y
            d = 2.0 * y
        else:
            if y <= 0.0:
                ok = False
                val[r] = np.inf
                continue
            val[r] += t_coef[i] * np.log(y) / _LN2
            d = 1.0 / (y * _LN2)
        if want_jac:
            s = t_coef[i] * d
            for p in range(ptr[i], ptr[i + 1]):
                jac[r, idx[p]] += s * lv[p]
    return ok


@nb.njit(cache=True)
def _add_hess(t_row, t_kind, t_coef, ptr, idx, lv, t_b, v, weights, out):
    """out += sum over rows of weights[row] * Hessian(row)."""
    for i in range(t_row.shape[0]):
        w = weights[t_row[i]]
        if w == 0.0:
            continue
        if t_kind[i] == 0:
            d2 = 2.0
        else:
            y = t_b[i]
            for p in range(ptr[i], ptr[i + 1]):
                y += lv[p] * v[idx[p]]
            d2 = -1.0 / (y * y * _LN2)
        s = w * t_coef[i] * d2
        for p in range(ptr[i], ptr[i + 1]):
            sa = s * lv[p]
            a = idx[p]
            for q in range(ptr[i], ptr[i + 1]):
                out[a, idx[q]] += sa * lv[q]


@nb.njit(cache=True)
def _scaled_solve(Hm, rhs):
    # symmetric Jacobi scaling plus a tiny ridge keeps near-active barriers solvable
    n = rhs.shape[0]
    dsc = np.empty(n)
    for i in range(n):
        dsc[i] = 1.0 / np.sqrt(Hm[i, i])
    for i in range(n):
        for j in range(n):
            Hm[i, j] *= dsc[i] * dsc[j]
        Hm[i, i] += 1e-12
    return dsc * np.linalg.solve(Hm, dsc * rhs)


@nb.njit(cache=True)
def _scalar(const, lin, t_row, t_kind, t_coef, ptr, idx, lv, t_b, v, buf, jbuf):
    _eval(const, lin, t_row, t_kind, t_coef, ptr, idx, lv, t_b, v, buf, jbuf, False)
    return buf[0]


@nb.njit(cache=True)
def _ccp_core(
    oc_c, oc_l, oc_r, oc_k, oc_co, oc_L, oc_b,
    ov_c, ov_l, ov_r, ov_k, ov_co, ov_L, ov_b,
    cv_c, cv_l, cv_r, cv_k, cv_co, cv_L, cv_b,
    cc_c, cc_l, cc_r, cc_k, cc_co, cc_L, cc_b,
    lo, hi, start, max_outer, tol, gap_tol, max_newton, mult, newton_tol,
):
    n = start.shape[0]
    m = cv_c.shape[0]
    oc_p, oc_i, oc_v = _csr(oc_L)
    ov_p, ov_i, ov_v = _csr(ov_L)
    cv_p, cv_i, cv_v = _csr(cv_L)
    cc_p, cc_i, cc_v = _csr(cc_L)
    iterates = np.zeros((max_outer + 1, n))
    objs = np.zeros(max_outer + 1)
    b1 = np.zeros(1)
    j1 = np.zeros((1, n))
    cval = np.zeros(m)
    cjac = np.zeros((m, n))
    ccv = np.zeros(m)
    ccj = np.zeros((m, n))
    nzr = np.empty(n, dtype=np.int64)
    x = start.copy()
    iterates[0] = x
    objs[0] = _scalar(oc_c, oc_l, oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, x, b1, j1) + _scalar(
        ov_c, ov_l, ov_r, ov_k, ov_co, ov_p, ov_i, ov_v, ov_b, x, b1, j1
    )
    converged = False
    count = 0
    total_newton = 0
    scale = max(1.0, abs(objs[0]))
    n_bar = m + 2 * n
    t_start = n_bar / (1e-1 * scale)
    t_end = n_bar / (gap_tol * scale)
    for k in range(max_outer):
        # fold the tangents into the convex blocks
        _eval(ov_c, ov_l, ov_r, ov_k, ov_co, ov_p, ov_i, ov_v, ov_b, x, b1, j1, True)
        f_lin = oc_l.copy()
        f_const = oc_c.copy()
        for j in range(n):
            f_lin[0, j] += j1[0, j]
            f_const[0] += -j1[0, j] * x[j]
        f_const[0] += b1[0]
        _eval(cc_c, cc_l, cc_r, cc_k, cc_co, cc_p, cc_i, cc_v, cc_b, x, ccv, ccj, True)
        c_lin = cv_l + ccj
        c_const = cv_c + ccv - ccj @ x
        v = x.copy()
        best_v = v.copy()
        best_f = _scalar(f_const, f_lin, oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, v, b1, j1)
        t = t_start
        gf = np.zeros((1, n))
        Hm = np.zeros((n, n))
        grad = np.empty(n)
        inv = np.empty(m)
        wobj = np.empty(1)
        vn = np.empty(n)
        while True:
            for it in range(max_newton):
                total_newton += 1
                _eval(f_const, f_lin, oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, v, b1, gf, True)
                f = b1[0]
                _eval(c_const, c_lin, cv_r, cv_k, cv_co, cv_p, cv_i, cv_v, cv_b, v, cval, cjac, True)
                Hm[:, :] = 0.0
                for j in range(n):
                    dl = v[j] - lo[j]
                    dh = hi[j] - v[j]
                    grad[j] = -t * gf[0, j] - 1.0 / dl + 1.0 / dh
                    Hm[j, j] = 1.0 / (dl * dl) + 1.0 / (dh * dh)
                for r in range(m):
                    inv[r] = -1.0 / cval[r]
                    w2 = inv[r] * inv[r]
                    nn = 0
                    for j in range(n):
                        cj = cjac[r, j]
                        if cj != 0.0:
                            grad[j] += cj * inv[r]
                            nzr[nn] = j
                            nn += 1
                    for p in range(nn):
                        a = nzr[p]
                        sa = w2 * cjac[r, a]
                        for q in range(nn):
                            Hm[a, nzr[q]] += sa * cjac[r, nzr[q]]
                wobj[0] = -t
                _add_hess(oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, v, wobj, Hm)
                _add_hess(cv_r, cv_k, cv_co, cv_p, cv_i, cv_v, cv_b, v, inv, Hm)
                dv = _scaled_solve(Hm, -grad)
                lam2 = -(grad @ dv)
                if lam2 * 0.5 <= newton_tol:
                    break
                phi0 = -t * f
                for r in range(m):
                    phi0 -= np.log(-cval[r])
                for j in range(n):
                    phi0 -= np.log(v[j] - lo[j]) + np.log(hi[j] - v[j])
                s = 1.0
                moved = False
                fn = f
                for _ in range(60):
                    inside = True
                    for j in range(n):
                        vn[j] = v[j] + s * dv[j]
                        if vn[j] <= lo[j] or vn[j] >= hi[j]:
                            inside = False
                    if inside:
                        ok = _eval(c_const, c_lin, cv_r, cv_k, cv_co, cv_p, cv_i, cv_v, cv_b, vn, cval, cjac, False)
                        if ok:
                            phin = 0.0
                            for r in range(m):
                                if cval[r] >= 0.0:
                                    inside = False
                                    break
                                phin -= np.log(-cval[r])
                            if inside:
                                fn = _scalar(f_const, f_lin, oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, vn, b1, j1)
                                phin -= t * fn
                                for j in range(n):
                                    phin -= np.log(vn[j] - lo[j]) + np.log(hi[j] - vn[j])
                                if phin <= phi0 - 0.25 * s * lam2:
                                    moved = True
                                    break
                    s *= 0.5
                if not moved:
                    break
                v = vn.copy()
                if fn > best_f:
                    best_f = fn
                    best_v = v.copy()
            if t >= t_end:
                break
            t = min(t * mult, t_end)
        x = best_v
        count += 1
        iterates[count] = x
        objs[count] = _scalar(oc_c, oc_l, oc_r, oc_k, oc_co, oc_p, oc_i, oc_v, oc_b, x, b1, j1) + _scalar(
            ov_c, ov_l, ov_r, ov_k, ov_co, ov_p, ov_i, ov_v, ov_b, x, b1, j1
        )
        if abs(objs[count] - objs[count - 1]) < tol * max(1.0, abs(objs[count - 1])):
            converged = True
            break
    return iterates[: count + 1], objs[: count + 1], converged, total_newton


def _budget_rows(prog: AtomProgram) -> AtomBlock:
    """Constraint block with the budget row appended (convex side)."""
    cv = prog.con_convex
    if not len(prog.budget):
        return cv
    row = np.zeros((1, prog.n))
    row[0, prog.budget] = 1.0
    return AtomBlock(
        const=np.concatenate([cv.const, [-1.0]]),
        lin=np.vstack([cv.lin, row]),
        t_row=cv.t_row, t_kind=cv.t_kind, t_coef=cv.t_coef, t_L=cv.t_L, t_b=cv.t_b,
    )


def _pad_concave(prog: AtomProgram) -> AtomBlock:
    cc = prog.con_concave
    if not len(prog.budget):
        return cc
    return AtomBlock(
        const=np.concatenate([cc.const, [0.0]]),
        lin=np.vstack([cc.lin, np.zeros((1, prog.n))]),
        t_row=cc.t_row, t_kind=cc.t_kind, t_coef=cc.t_coef, t_L=cc.t_L, t_b=cc.t_b,
    )


def strictly_feasible(prog: AtomProgram, v) -> bool:
    v = np.asarray(v, dtype=float)
    c = _budget_rows(prog)(v)[0] + _pad_concave(prog)(v)[0]
    return bool(np.all(c < 0) and np.all(v > prog.lower) and np.all(v < prog.upper))


def ccp_compiled(prog: AtomProgram, start, max_outer: int = 50, tol: float = 1e-6, gap_tol: float = 1e-5, max_newton: int = 50, mult: float = 50.0, newton_tol: float = 1e-6) -> CcpTrace:
    """Convex-concave procedure on an atom program; start must be strictly interior."""
    from .ccp import InfeasibleStart

    start = np.asarray(start, dtype=float)
    if not strictly_feasible(prog, start):
        raise InfeasibleStart("no feasible point")
    cv = _budget_rows(prog)
    cc = _pad_concave(prog)
    its, objs, conv, newton = _ccp_core(
        *prog.obj_concave.arrays(), *prog.obj_convex.arrays(), *cv.arrays(), *cc.arrays(),
        prog.lower, prog.upper, start, int(max_outer), float(tol), float(gap_tol), int(max_newton), float(mult), float(newton_tol),
    )
    trace = CcpTrace(iterates=list(its), objectives=[float(o) for o in objs], converged=bool(conv), iterations=len(objs) - 1)
    trace.newton_steps = int(newton)
    return trace
