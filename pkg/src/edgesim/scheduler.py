"""Per-slot decisions: association, RB partitioning, the per-SBS drift-plus-penalty
subproblem with rounding, and the cloud fronthaul split.

Inside the solvers everything is expressed in packets and slots: a rate of
``a * x`` packets/slot corresponds to spectral efficiency ``x`` bits/s/Hz,
with ``a`` the packets one RB carries per slot at unit spectral efficiency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numba as nb
import numpy as np

from .atoms import LOG2, SQUARE, AtomProgram, BlockBuilder, ccp_compiled
from .ccp import CcpTrace, DcConstraint, DcProgram, ccp, project_capped_budget

LN2 = np.log(2.0)
ACCEPT_TOL = 1e-3


# ---------------------------------------------------------------- association


def associate_users(requests, cache_mask, queue_total, dist, coverage, anchors, busy):
    """Anchor each requesting user to an SBS.

    Returns ``(anchors, via_cloud, dropped)``. A user with pending packets keeps
    its anchor. Otherwise the candidates are covering SBSs that cache the
    content, ranked by total backlog, then distance, then id. Without a caching
    candidate the nearest covering SBS anchors the user and the content comes
    from the cloud. Users outside every coverage disk are dropped.
    """
    requests = np.asarray(requests)
    anchors = np.array(anchors, dtype=np.int64, copy=True)
    U = len(requests)
    via_cloud = np.zeros(U, dtype=bool)
    dropped = np.zeros(U, dtype=bool)
    for u in range(U):
        f = requests[u]
        if f < 0:
            continue
        if busy[u] and anchors[u] >= 0:
            via_cloud[u] = not cache_mask[anchors[u], f]
            continue
        cover = np.flatnonzero(coverage[:, u])
        if cover.size == 0:
            dropped[u] = True
            continue
        cand = cover[cache_mask[cover, f]]
        if cand.size:
            best = min(cand, key=lambda s: (queue_total[s], dist[s, u], s))
            anchors[u] = best
        else:
            anchors[u] = min(cover, key=lambda s: (dist[s, u], s))
            via_cloud[u] = True
    return anchors, via_cloud, dropped


def update_interference(est, measured, eta: float):
    """Exponential smoothing ``est + (1 - eta) (measured - est)``."""
    return np.maximum(est + (1.0 - eta) * (measured - est), 0.0)


def measured_interference(tx_power, gain):
    """Interference seen at (s, u, m) from every other SBS transmitting on m.

    ``tx_power`` is (S, M) watts per RB, ``gain`` is (S, U, M).
    """
    rx = tx_power[:, None, :] * gain
    return rx.sum(axis=0, keepdims=True) - rx


def partition_rbs(members, backlogs, rbs) -> dict:
    """Split ``rbs`` among ``members`` proportionally to backlog.

    Floors first, then the remainder one RB at a time round-robin in id order
    over the members with positive backlog (all members when none has any).
    """
    members = [int(m) for m in members]
    rbs = sorted(int(r) for r in rbs)
    back = np.asarray(backlogs, dtype=float)
    n = len(rbs)
    order = np.argsort(members, kind="stable")
    total = back.sum()
    if total > 0:
        counts = np.floor(n * back / total).astype(int)
        eligible = [i for i in order if back[i] > 0]
    else:
        counts = np.full(len(members), n // max(len(members), 1), dtype=int)
        eligible = list(order)
    rem = n - counts.sum()
    i = 0
    while rem > 0:
        counts[eligible[i % len(eligible)]] += 1
        rem -= 1
        i += 1
    out, pos = {}, 0
    for i in order:
        out[members[i]] = rbs[pos:pos + counts[i]]
        pos += counts[i]
    return out


# ---------------------------------------------------------------- rates


def rate_of(b, Y, zeta, alpha, omega, p_max, slot: float = 1.0):
    """Bits per slot for every (user, content) of one SBS under an integral decision.

    ``b`` is (U, M) RB matching, ``Y`` is (U, F) scheduling and ``zeta`` is the
    (U, M) CINR. Power is split equally over the allocated RBs, and a user's
    rate is shared equally by its scheduled contents.
    """
    b = np.asarray(b, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n_alloc = b.sum()
    if n_alloc == 0:
        return np.zeros_like(Y)
    se = np.log2(1.0 + b * zeta * p_max / n_alloc).sum(axis=1)
    k = np.maximum(Y.sum(axis=1), 1.0)
    return alpha * omega * slot * (se / k)[:, None] * Y


# ---------------------------------------------------------------- SBS subproblem


@dataclass
class SbsInstance:
    """One SBS's slot problem restricted to its backlogged users and contents.

    ``zeta`` already includes the transmit power: entry (u, m) is the SINR a
    single RB would reach at full power.
    """

    zeta: np.ndarray  # (U, M)
    pair_user: np.ndarray  # (P,) local user index of each backlogged (user, content)
    weight: np.ndarray  # (P,) Q + deficit
    W: np.ndarray  # (P,) packets to push this slot
    H: int
    V: float
    a: float  # packets per slot per unit spectral efficiency
    c: float  # cost floor in packets per slot
    E_floor: float = 0.0  # latency already owed by pairs left out of the instance

    @property
    def n_users(self):
        return self.zeta.shape[0]

    @property
    def n_rbs(self):
        return self.zeta.shape[1]

    @property
    def n_pairs(self):
        return len(self.pair_user)


class _Layout:
    def __init__(self, inst: SbsInstance):
        U, M, P = inst.n_users, inst.n_rbs, inst.n_pairs
        self.U, self.M, self.P = U, M, P
        UM = U * M
        self.d = slice(0, UM)
        self.psi = slice(UM, UM + P)
        self.x = slice(UM + P, 2 * UM + P)
        self.z = slice(2 * UM + P, 2 * UM + 2 * P)
        self.E = 2 * UM + 2 * P
        self.n = 2 * UM + 2 * P + 1
        # (P, U) incidence of pairs on users
        self.inc = np.zeros((P, U))
        self.inc[np.arange(P), inst.pair_user] = 1.0

    def split(self, v):
        return (
            v[self.d].reshape(self.U, self.M),
            v[self.psi],
            v[self.x].reshape(self.U, self.M),
            v[self.z],
            v[self.E],
        )


def g0(delta):
    """log2 of the total relaxed allocation, with gradient."""
    s = float(np.sum(delta))
    return np.log2(s), np.full(np.shape(delta), 1.0 / (s * LN2))


def g2(psi, x_row):
    """(psi + sum x)^2 with gradient w.r.t. (psi, x_row)."""
    t = psi + float(np.sum(x_row))
    return t * t, np.concatenate([[2 * t], np.full(len(x_row), 2 * t)])


def g3(E, z):
    """(E + z)^2 / 2 with gradient w.r.t. (E, z)."""
    t = E + z
    return 0.5 * t * t, np.array([t, t])


def g4(B, nu, alpha, X, c):
    """B^2 + y^2 with y = (1 - alpha) nu X + c, gradient w.r.t. (B, nu)."""
    y = (1.0 - alpha) * nu * X + c
    return B * B + y * y, np.array([2 * B, 2 * y * (1.0 - alpha) * X])


def f4(B, nu, alpha, X, c):
    """(B + y)^2, the convex term whose negation makes the fronthaul constraint nonconvex."""
    y = (1.0 - alpha) * nu * X + c
    t = B + y
    return t * t, np.array([2 * t, 2 * t * (1.0 - alpha) * X])


def build_sbs_program(inst: SbsInstance) -> DcProgram:
    L = _Layout(inst)
    U, M, P, n = L.U, L.M, L.P, L.n
    a, V, H = inst.a, inst.V, float(inst.H)
    w, W, c = inst.weight, inst.W, inst.c
    pu = inst.pair_user
    zeta = inst.zeta
    wsum_u = L.inc.T @ w  # (U,)

    def obj_concave(v):
        d, psi, x, z, E = L.split(v)
        X = x.sum(axis=1)
        Xp = X[pu]
        val = H * d.sum() - V * E - 0.5 * a * float(w @ (psi**2 + Xp**2))
        g = np.zeros(n)
        g[L.d] = H
        g[L.psi] = -a * w * psi
        g[L.x] = np.repeat(-a * wsum_u * X, M)
        g[L.E] = -V
        return val, g

    def obj_convex(v):
        d, psi, x, z, E = L.split(v)
        X = x.sum(axis=1)
        t = psi + X[pu]
        val = 0.5 * a * float(w @ t**2)
        g = np.zeros(n)
        g[L.psi] = a * w * t
        g[L.x] = np.repeat(a * (L.inc.T @ (w * t)), M)
        return val, g

    rows_um = np.arange(U * M)
    cols_d = L.d.start + rows_um
    cols_x = L.x.start + rows_um

    def rate_convex(v):
        d, psi, x, z, E = L.split(v)
        S = d.sum()
        inner = (S + zeta * d).ravel()
        J = np.zeros((U * M, n))
        with np.errstate(divide="ignore", invalid="ignore"):
            if S <= 0 or np.any(inner <= 0):
                return np.full(U * M, np.inf), J
            val = x.ravel() - np.log2(inner)
            coef = 1.0 / (inner * LN2)
        J[:, L.d] = -coef[:, None]
        J[rows_um, cols_d] -= zeta.ravel() * coef
        J[rows_um, cols_x] = 1.0
        return val, J

    def rate_concave(v):
        d = v[L.d]
        S = d.sum()
        J = np.zeros((U * M, n))
        if S <= 0:
            return np.full(U * M, -np.inf), J
        J[:, L.d] = 1.0 / (S * LN2)
        return np.full(U * M, np.log2(S)), J

    rows_p = np.arange(P)
    x_cols_of_pair = L.x.start + pu[:, None] * M + np.arange(M)[None, :]  # (P, M)

    def prod_convex(v):
        d, psi, x, z, E = L.split(v)
        Xp = x.sum(axis=1)[pu]
        val = z + 0.5 * a * (psi**2 + Xp**2)
        J = np.zeros((P, n))
        J[rows_p, L.z.start + rows_p] = 1.0
        J[rows_p, L.psi.start + rows_p] = a * psi
        J[rows_p[:, None], x_cols_of_pair] = (a * Xp)[:, None]
        return val, J

    def prod_concave(v):
        d, psi, x, z, E = L.split(v)
        t = psi + x.sum(axis=1)[pu]
        J = np.zeros((P, n))
        J[rows_p, L.psi.start + rows_p] = -a * t
        J[rows_p[:, None], x_cols_of_pair] = (-a * t)[:, None]
        return -0.5 * a * t**2, J

    def lat_convex(v):
        z = v[L.z]
        E = v[L.E]
        val = W + 0.5 * (E * E + z * z) - c * E
        J = np.zeros((P, n))
        J[:, L.E] = E - c
        J[rows_p, L.z.start + rows_p] = z
        return val, J

    def lat_concave(v):
        z = v[L.z]
        E = v[L.E]
        t = E + z
        J = np.zeros((P, n))
        J[:, L.E] = -t
        J[rows_p, L.z.start + rows_p] = -t
        return -0.5 * t * t, J

    # linear: one user per RB, and an RB only for users with something scheduled
    A1 = np.zeros((M, n))
    for m in range(M):
        A1[m, L.d.start + np.arange(U) * M + m] = 1.0
    A2 = np.zeros((U * M, n))
    A2[rows_um, cols_d] = 1.0
    for p in range(P):
        A2[pu[p] * M + np.arange(M), L.psi.start + p] = -1.0

    def rb_once(v):
        return A1 @ v - 1.0, A1

    def rb_needs_content(v):
        return A2 @ v, A2

    lo, hi = sbs_bounds(inst, L)
    cons = [
        DcConstraint(rate_convex, rate_concave, "rate"),
        DcConstraint(prod_convex, prod_concave, "product"),
        DcConstraint(lat_convex, lat_concave, "latency"),
        DcConstraint(rb_once, None, "rb_once"),
        DcConstraint(rb_needs_content, None, "rb_needs_content"),
    ]
    prog = DcProgram(obj_concave, obj_convex, cons, lo, hi)
    prog.layout = L
    return prog


def sbs_atoms(inst: SbsInstance) -> AtomProgram:
    """The SBS program in atom form (same rows and order as :func:`build_sbs_program`)."""
    L = _Layout(inst)
    U, M, P, n = L.U, L.M, L.P, L.n
    a, V, H, c = inst.a, inst.V, float(inst.H), inst.c
    pu = inst.pair_user
    dcol = lambda u, m: L.d.start + u * M + m
    xcol = lambda u, m: L.x.start + u * M + m
    X = lambda u: [(xcol(u, m), 1.0) for m in range(M)]
    all_d = [(dcol(u, m), 1.0) for u in range(U) for m in range(M)]

    oc = BlockBuilder(n)
    r = oc.add_row(0.0, [(i, H) for i, _ in all_d] + [(L.E, -V)])
    ov = BlockBuilder(n)
    rv = ov.add_row()
    for p in range(P):
        w = float(inst.weight[p])
        psi = [(L.psi.start + p, 1.0)]
        oc.add_term(r, SQUARE, -0.5 * a * w, psi)
        oc.add_term(r, SQUARE, -0.5 * a * w, X(pu[p]))
        ov.add_term(rv, SQUARE, 0.5 * a * w, psi + X(pu[p]))

    cv, cc = BlockBuilder(n), BlockBuilder(n)
    for u in range(U):
        for m in range(M):
            i = cv.add_row(0.0, [(xcol(u, m), 1.0)])
            cv.add_term(i, LOG2, -1.0, all_d + [(dcol(u, m), float(inst.zeta[u, m]))])
            cc.add_term(cc.add_row(), LOG2, 1.0, all_d)
    for p in range(P):
        i = cv.add_row(0.0, [(L.z.start + p, 1.0)])
        psi = [(L.psi.start + p, 1.0)]
        cv.add_term(i, SQUARE, 0.5 * a, psi)
        cv.add_term(i, SQUARE, 0.5 * a, X(pu[p]))
        cc.add_term(cc.add_row(), SQUARE, -0.5 * a, psi + X(pu[p]))
    for p in range(P):
        i = cv.add_row(float(inst.W[p]), [(L.E, -c)])
        cv.add_term(i, SQUARE, 0.5, [(L.E, 1.0)])
        cv.add_term(i, SQUARE, 0.5, [(L.z.start + p, 1.0)])
        cc.add_term(cc.add_row(), SQUARE, -0.5, [(L.E, 1.0), (L.z.start + p, 1.0)])
    for m in range(M):
        cv.add_row(-1.0, [(dcol(u, m), 1.0) for u in range(U)])
        cc.add_row()
    for u in range(U):
        mine = [(L.psi.start + p, -1.0) for p in np.flatnonzero(pu == u)]
        for m in range(M):
            cv.add_row(0.0, [(dcol(u, m), 1.0)] + mine)
            cc.add_row()
    lo, hi = sbs_bounds(inst, L)
    return AtomProgram(oc.build(), ov.build(), cv.build(), cc.build(), lo, hi)


def sbs_bounds(inst: SbsInstance, L: _Layout):
    xmax = np.log2(1.0 + inst.zeta) + 1.0
    zmax = inst.a * xmax.sum(axis=1)[inst.pair_user] + 1.0
    Wmax = float(inst.W.max()) if inst.n_pairs else 0.0
    lo = np.zeros(L.n)
    lo[-1] = inst.E_floor
    hi = np.concatenate([np.ones(L.U * L.M), np.ones(L.P), xmax.ravel(), zmax, [max(Wmax / inst.c, inst.E_floor) + 2.0]])
    return lo, hi


def sbs_start(inst: SbsInstance) -> np.ndarray:
    """Strictly feasible point: small uniform allocation, half-way auxiliaries."""
    L = _Layout(inst)
    d0 = 0.4 / max(L.M, L.U)
    psi0 = 0.5 / L.M
    d = np.full((L.U, L.M), d0)
    S = d.sum()
    x = 0.5 * np.log2(1.0 + inst.zeta * d / S)
    psi = np.full(L.P, psi0)
    z = 0.5 * inst.a * psi * x.sum(axis=1)[inst.pair_user]
    E = max(float(np.max(inst.W / inst.c)), inst.E_floor) + 0.01
    return np.concatenate([d.ravel(), psi, x.ravel(), z, [E]])


@dataclass
class RelaxedDecision:
    delta: np.ndarray  # (U, M)
    psi: np.ndarray  # (P,)
    x: np.ndarray
    z: np.ndarray
    E: float
    trace: CcpTrace | None = None


def solve_sbs_subproblem(
    inst: SbsInstance, max_outer=50, tol=1e-6, inner_max_iter=500, engine: str = "compiled", gap_tol: float = 1e-5
) -> RelaxedDecision:
    """Relaxed SBS decision by the convex-concave procedure.

    ``engine="compiled"`` runs the numba barrier-Newton loop on the atom form;
    ``"reference"`` runs the callable projected-gradient kernel.
    """
    L = _Layout(inst)
    if inst.H <= 0 or inst.n_pairs == 0 or L.M == 0:
        return RelaxedDecision(np.zeros((L.U, L.M)), np.zeros(L.P), np.zeros((L.U, L.M)), np.zeros(L.P), 0.0)
    if np.bincount(inst.pair_user, minlength=L.U).min() == 0:
        raise ValueError("every user in an SBS instance needs a backlogged content")
    if engine == "compiled":
        trace = ccp_compiled(sbs_atoms(inst), sbs_start(inst), max_outer=max_outer, tol=tol, gap_tol=gap_tol)
    else:
        prog = build_sbs_program(inst)
        trace = ccp(prog, sbs_start(inst), max_outer=max_outer, tol=tol, inner_max_iter=inner_max_iter)
    d, psi, x, z, E = L.split(trace.x)
    return RelaxedDecision(d.copy(), psi.copy(), x.copy(), z.copy(), float(E), trace)


def round_decision(delta, psi, pair_user, weight, H: int):
    """Greedy rounding by decreasing relaxed allocation.

    Returns ``(b, Y)`` with ``b`` the (U, M) matching and ``Y`` a boolean per
    backlogged pair; each matched user gets its pair with the largest
    ``weight * psi``.
    """
    delta = np.asarray(delta, dtype=float)
    U, M = delta.shape
    b = np.zeros((U, M), dtype=np.int64)
    Y = np.zeros(len(pair_user), dtype=bool)
    flat = delta.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    used = np.zeros(M, dtype=bool)
    count = 0
    for idx in order:
        if flat[idx] <= ACCEPT_TOL or count >= H:
            break
        u, m = divmod(int(idx), M)
        if used[m]:
            continue
        b[u, m] = 1
        used[m] = True
        count += 1
    score = np.asarray(weight, dtype=float) * np.asarray(psi, dtype=float)
    for u in np.flatnonzero(b.sum(axis=1)):
        mine = np.flatnonzero(pair_user == u)
        if mine.size == 0:
            b[u] = 0
            continue
        Y[mine[np.argmax(score[mine])]] = True
    return b, Y


def pair_rates(inst: SbsInstance, b, Y):
    """Packets/slot per backlogged pair under an integral decision."""
    n_alloc = b.sum()
    if n_alloc == 0:
        return np.zeros(inst.n_pairs)
    se = np.log2(1.0 + b * inst.zeta / n_alloc).sum(axis=1)
    k = np.bincount(inst.pair_user, weights=Y.astype(float), minlength=inst.n_users)
    share = np.where(k > 0, se / np.maximum(k, 1), 0.0)
    return inst.a * share[inst.pair_user] * Y


def slot_objective(inst: SbsInstance, b, Y) -> float:
    """Drift-plus-penalty slot objective of an integral decision (constants dropped)."""
    R = pair_rates(inst, b, Y)
    E = max(float(np.max(inst.W / (R + inst.c))) if inst.n_pairs else 0.0, inst.E_floor)
    return float(inst.H * b.sum() - inst.V * E + inst.weight @ R)


@nb.njit(cache=True)
def _objective_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, Y):
    U, M = zeta.shape
    P = pair_user.shape[0]
    n_alloc = 0
    for u in range(U):
        for m in range(M):
            n_alloc += b[u, m]
    se = np.zeros(U)
    if n_alloc > 0:
        for u in range(U):
            for m in range(M):
                se[u] += np.log2(1.0 + b[u, m] * zeta[u, m] / n_alloc)
    k = np.zeros(U)
    for p in range(P):
        if Y[p]:
            k[pair_user[p]] += 1.0
    E = E_floor
    gain = 0.0
    for p in range(P):
        u = pair_user[p]
        R = a * se[u] / k[u] if (Y[p] and k[u] > 0) else 0.0
        E = max(E, W[p] / (R + c))
        gain += weight[p] * R
    return H * n_alloc - V * E + gain


@nb.njit(cache=True)
def _best_schedule_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, score):
    U = zeta.shape[0]
    P = pair_user.shape[0]
    Y = np.zeros(P, dtype=np.bool_)
    matched = np.zeros(U, dtype=np.bool_)
    for u in range(U):
        matched[u] = b[u].sum() > 0
    # start from each matched user's single best pair
    for u in range(U):
        if not matched[u]:
            continue
        best, arg = -np.inf, -1
        for p in range(P):
            if pair_user[p] == u and score[p] > best:
                best, arg = score[p], p
        if arg >= 0:
            Y[arg] = True
    for u in range(U):
        if not matched[u]:
            continue
        mine = np.flatnonzero(pair_user == u)
        ranked = mine[np.argsort(-score[mine], kind="mergesort")]
        best_val, best_k = -np.inf, 1
        for kk in range(1, ranked.shape[0] + 1):
            for p in mine:
                Y[p] = False
            for i in range(kk):
                Y[ranked[i]] = True
            val = _objective_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, Y)
            if val > best_val + 1e-12:
                best_val, best_k = val, kk
        for p in mine:
            Y[p] = False
        for i in range(best_k):
            Y[ranked[i]] = True
    return Y


@nb.njit(cache=True)
def _polish_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, Y0, score, max_passes):
    U, M = b.shape
    b = b.copy()
    best_Y = Y0.copy()
    best_val = _objective_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, best_Y)
    Yc = _best_schedule_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, score)
    vc = _objective_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, b, Yc)
    if vc > best_val:
        best_Y, best_val = Yc, vc
    for _ in range(max_passes):
        improved = False
        for m in range(M):
            cur = -1
            for u in range(U):
                if b[u, m]:
                    cur = u
            for owner in range(-1, U):
                if owner == cur:
                    continue
                cand = b.copy()
                cand[:, m] = 0
                if owner >= 0:
                    cand[owner, m] = 1
                if cand.sum() > H:
                    continue
                Yn = _best_schedule_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, cand, score)
                val = _objective_nb(zeta, pair_user, weight, W, H, V, a, c, E_floor, cand, Yn)
                if val > best_val + 1e-9:
                    b, best_Y, best_val = cand, Yn, val
                    cur = owner
                    improved = True
        if not improved:
            break
    return b, best_Y


def _inst_args(inst: SbsInstance):
    return (
        np.ascontiguousarray(inst.zeta, dtype=float),
        np.asarray(inst.pair_user, dtype=np.int64),
        np.asarray(inst.weight, dtype=float),
        np.asarray(inst.W, dtype=float),
        int(inst.H),
        float(inst.V),
        float(inst.a),
        float(inst.c),
        float(inst.E_floor),
    )


def _best_schedule(inst: SbsInstance, b, order_score):
    """Per matched user, schedule the prefix of its pairs (by ``order_score``) that
    maximizes the slot objective, one user at a time."""
    return _best_schedule_nb(*_inst_args(inst), np.asarray(b, dtype=np.int64), np.asarray(order_score, dtype=float))


def polish_decision(inst: SbsInstance, b, Y, psi, max_passes: int = 3):
    """Local improvement of a rounded decision under the exact slot objective.

    Chooses how many backlogged contents each matched user serves, then tries
    moving single RBs to another user (or leaving them idle). Never returns a
    worse decision than the one given.
    """
    score = np.asarray(inst.weight, dtype=float) * (np.asarray(psi, dtype=float) + 1e-9)
    return _polish_nb(
        *_inst_args(inst), np.asarray(b, dtype=np.int64), np.asarray(Y, dtype=bool), score, int(max_passes)
    )


def enumerate_optimum(inst: SbsInstance):
    """Exhaustive search over matchings and schedules (tiny instances only)."""
    U, M, P = inst.n_users, inst.n_rbs, inst.n_pairs
    best = (-np.inf, None, None)
    worst = np.inf
    for owners in product(range(-1, U), repeat=M):
        b = np.zeros((U, M), dtype=np.int64)
        for m, u in enumerate(owners):
            if u >= 0:
                b[u, m] = 1
        if b.sum() > inst.H:
            continue
        for ys in product((False, True), repeat=P):
            Y = np.array(ys, dtype=bool)
            served = np.bincount(inst.pair_user, weights=Y.astype(float), minlength=U) > 0
            if np.any((b.sum(axis=1) > 0) & ~served):
                continue
            val = slot_objective(inst, b, Y)
            worst = min(worst, val)
            if val > best[0]:
                best = (val, b, Y)
    return best[0], best[1], best[2], worst


# ---------------------------------------------------------------- fronthaul


@dataclass
class FronthaulInstance:
    weight: np.ndarray  # (P,) Q + deficit of each backlogged cloud queue
    W: np.ndarray  # (P,) packets to push
    V: float
    a: float  # packets per slot for the whole fronthaul, (1 - alpha) X / l_p
    c: float  # cost floor in packets per slot
    nu_max: np.ndarray | None = None  # (P,) share cap, e.g. Q / a so no share exceeds the backlog

    def caps(self) -> np.ndarray:
        P = len(self.weight)
        if self.nu_max is None:
            return np.ones(P)
        return np.clip(np.asarray(self.nu_max, dtype=float), 1e-9, 1.0)


def build_fronthaul_program(inst: FronthaulInstance) -> DcProgram:
    P = len(inst.weight)
    n = P + 1
    a, c, V = inst.a, inst.c, inst.V
    w, W = inst.weight, inst.W
    rows = np.arange(P)

    def obj(v):
        nu, B = v[:P], v[P]
        g = np.zeros(n)
        g[:P] = w * a
        g[P] = -V
        return float(a * w @ nu - V * B), g

    def lat_convex(v):
        nu, B = v[:P], v[P]
        y = a * nu + c
        J = np.zeros((P, n))
        J[rows, rows] = y * a
        J[:, P] = B
        return W + 0.5 * (B * B + y * y), J

    def lat_concave(v):
        nu, B = v[:P], v[P]
        t = B + a * nu + c
        J = np.zeros((P, n))
        J[rows, rows] = -t * a
        J[:, P] = -t
        return -0.5 * t * t, J

    Bmax = float(np.max(W)) / c + 2.0

    cap = inst.caps()

    def project(v):
        out = v.copy()
        out[:P] = project_capped_budget(v[:P], cap, 1.0)
        out[P] = min(max(v[P], 0.0), Bmax)
        return out

    lo = np.zeros(n)
    hi = np.concatenate([cap, [Bmax]])
    return DcProgram(obj, None, [DcConstraint(lat_convex, lat_concave, "fronthaul_latency")], lo, hi, project)


def fronthaul_atoms(inst: FronthaulInstance) -> AtomProgram:
    P = len(inst.weight)
    n = P + 1
    a, c, V = inst.a, inst.c, inst.V
    oc = BlockBuilder(n)
    oc.add_row(0.0, [(p, a * float(inst.weight[p])) for p in range(P)] + [(P, -V)])
    ov = BlockBuilder(n)
    ov.add_row()
    cv, cc = BlockBuilder(n), BlockBuilder(n)
    for p in range(P):
        i = cv.add_row(float(inst.W[p]))
        cv.add_term(i, SQUARE, 0.5, [(P, 1.0)])
        cv.add_term(i, SQUARE, 0.5, [(p, a)], c)
        cc.add_term(cc.add_row(), SQUARE, -0.5, [(P, 1.0), (p, a)], c)
    Bmax = float(np.max(inst.W)) / c + 2.0
    lo = np.zeros(n)
    hi = np.concatenate([inst.caps(), [Bmax]])
    return AtomProgram(oc.build(), ov.build(), cv.build(), cc.build(), lo, hi, budget=np.arange(P))


def fronthaul_start(inst: FronthaulInstance) -> np.ndarray:
    P = len(inst.weight)
    nu = np.minimum(np.full(P, 0.5 / P), 0.5 * inst.caps())
    B = float(np.max(inst.W / (inst.a * nu + inst.c))) + 0.01
    return np.concatenate([nu, [B]])


def solve_fronthaul(
    inst: FronthaulInstance, max_outer=50, tol=1e-6, inner_max_iter=500, engine: str = "compiled", gap_tol: float = 1e-5
):
    """Returns ``(nu, B, trace)``; empty instances give ``nu = 0, B = 0``."""
    P = len(inst.weight)
    if P == 0 or not np.any(inst.W > 0):
        return np.zeros(P), 0.0, None
    if engine == "compiled":
        trace = ccp_compiled(fronthaul_atoms(inst), fronthaul_start(inst), max_outer=max_outer, tol=tol, gap_tol=gap_tol)
    else:
        prog = build_fronthaul_program(inst)
        trace = ccp(prog, fronthaul_start(inst), max_outer=max_outer, tol=tol, inner_max_iter=inner_max_iter)
    return trace.x[:P].copy(), float(trace.x[P]), trace


def fronthaul_objective(inst: FronthaulInstance, nu) -> float:
    """Slot objective with B at its smallest feasible value."""
    nu = np.asarray(nu, dtype=float)
    B = float(np.max(inst.W / (inst.a * nu + inst.c)))
    return float(inst.a * inst.weight @ nu - inst.V * B)


# ---------------------------------------------------------------- checks


def check_decision(b, Y_user, H: int, rb_set, eps: float = 0.0) -> list[str]:
    """Constraint violations of one SBS's integral decision.

    ``b`` is (U, M_total), ``Y_user`` is (U, F) 0/1 scheduling.
    """
    errs = []
    b = np.asarray(b)
    Y_user = np.asarray(Y_user)
    if b.sum() > H:
        errs.append("more RBs matched than available")
    if np.any(b.sum(axis=0) > 1):
        errs.append("RB matched to more than one user")
    if np.any((b.sum(axis=1) > 0) & (Y_user.sum(axis=1) == 0)):
        errs.append("RB matched to a user with nothing scheduled")
    if not np.all(np.isin(Y_user, (0, 1))) or not np.all(np.isin(b, (0, 1))):
        errs.append("non-binary decision")
    outside = np.setdiff1d(np.flatnonzero(b.sum(axis=0)), np.asarray(list(rb_set), dtype=np.int64))
    if outside.size:
        errs.append("RB used outside the SBS's share")
    return errs
