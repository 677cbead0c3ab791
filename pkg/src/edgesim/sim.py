"""The two-timescale slot loop for the proposed scheme (with and without SBS
clustering) and the two baselines.

Random streams are split per concern (topology and catalog, request trace,
channel, method decisions) so that every method run under one seed sees the
same network, the same requests and the same fading.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import baselines as bl
from .caching import (
    ClassModel,
    LearnerState,
    blend_popularity,
    check_strategy,
    checkpoint_json,
    cloud_feedback,
    commit_cache,
    learn_step,
)
from .clustering import ClusterAssignment, content_similarity, sbs_similarity, select_cluster_heads, spectral_cluster
from .config import SimConfig
from .demand import demand_vector, generate_trace, sample_catalog
from .metrics import RunRecord
from .queues import (
    QueueLedger,
    SlotTransition,
    access_cost,
    cache_update_time,
    cloud_deficit_bound,
    fronthaul_cost,
    step_cloud_queue,
    step_deficit_queue,
    step_resource_queue,
    step_user_queue,
    user_deficit_bound,
)
from .scheduler import (
    FronthaulInstance,
    SbsInstance,
    associate_users,
    check_decision,
    measured_interference,
    pair_rates,
    partition_rbs,
    polish_decision,
    round_decision,
    solve_fronthaul,
    solve_sbs_subproblem,
    update_interference,
)
from .topology import sample_topology, step_channel

log = logging.getLogger(__name__)

METHODS = ("PC", "PNC", "B1", "B2")
PHASES = (
    "channel",
    "requests",
    "clustering",
    "cache_commit",
    "association",
    "interference",
    "sbs_solve",
    "fronthaul",
    "transmit",
    "learning",
    "record",
)
EPS = 1e-9


@dataclass
class SbsDecision:
    sbs: int
    users: np.ndarray  # global user ids, local order
    rbs: np.ndarray  # global RB ids held this slot
    b: np.ndarray  # (len(users), len(rbs)) 0/1
    Y: np.ndarray  # (len(users), F) 0/1
    E: float = 0.0
    iterations: int = 0


@dataclass
class SlotDecision:
    sbs: list
    nu: np.ndarray  # (S, F)
    B: float = 0.0


@dataclass
class Streams:
    topology: np.random.Generator
    trace: np.random.Generator
    channel: np.random.Generator
    method: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "Streams":
        return cls(*(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)))


def build_trace(cfg: SimConfig, seed: int, horizon: int):
    """Network, catalog and request trace for one seed (identical for all methods)."""
    st = Streams.from_seed(seed)
    net = sample_topology(cfg, st.topology)
    catalog = sample_catalog(cfg, st.topology)
    trace = generate_trace(cfg, net.num_ue, horizon, st.trace)
    return net, catalog, trace


class World:
    """Complete simulator state for one (config, method, seed)."""

    def __init__(self, cfg: SimConfig, method: str, seed: int, horizon: int, trace=None, debug: bool = False):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        self.cfg = cfg
        self.method = method
        self.seed = seed
        self.horizon = horizon
        self.debug = debug
        st = Streams.from_seed(seed)
        self.streams = st
        self.net = sample_topology(cfg, st.topology)
        self.catalog = sample_catalog(cfg, st.topology)
        S, U, F, M = self.net.num_sbs, self.net.num_ue, cfg.catalog_size, cfg.num_rbs
        self.S, self.U, self.F, self.M = S, U, F, M
        self.trace = generate_trace(cfg, U, horizon, st.trace) if trace is None else np.asarray(trace)
        if self.trace.shape != (horizon, U):
            raise ValueError(f"trace shape {self.trace.shape} does not match ({horizon}, {U})")
        self.rng = st.method
        self.coverage = self.net.coverage(cfg.coverage_radius)
        self.noise = cfg.noise_psd * cfg.bandwidth_per_rb
        self.a = cfg.packet_rate_scale
        self.c_pk = cfg.cost_floor / cfg.bits_per_packet
        self.a_c = (1.0 - cfg.alpha) * cfg.fronthaul_capacity / cfg.bits_per_packet
        self.sizes = self.catalog.sizes.astype(float)
        self.qos = self.catalog.qos_latency

        self.ledger = QueueLedger.empty(S, U, F, np.zeros(S, dtype=np.int64))
        self.rb_sets: list[list[int]] = [[] for _ in range(S)]
        self.pools: dict[int, list[int]] = {}
        self.anchors = np.full(U, -1, dtype=np.int64)
        self.pending: dict[tuple[int, int], list[list[float]]] = {}
        self.pend_user = np.zeros(U)
        self.caches: list[list[int]] = [[] for _ in range(S)]
        self.clusters = ClusterAssignment(np.arange(S, dtype=np.int64), S)
        self.models: list[ClassModel | None] = [None] * S
        self.learners: list[LearnerState | None] = [None] * S
        self.played = np.full(S, -1, dtype=np.int64)
        self.blended = np.full((S, F), 1.0 / F)
        self.cloud = LearnerState.fresh(F)
        self.cloud_played = int(self.rng.integers(F))
        self.window_demand = np.zeros((S, F))
        self.request_counts = np.zeros((S, F))
        self.est_I = np.zeros((S, U, M))
        self.prev_tx = np.zeros((S, M))
        self.pf = bl.PfTracker(U, cfg.pf_memory)
        self.record = RunRecord.allocate(horizon, S)
        self.tau = np.zeros(S)
        self.t = 0
        # optional audit trails
        self.phase_log: list[str] = []
        self.cluster_log: list[dict] = []
        self.ccp_log: list[tuple] = []
        self.checkpoints: list[str] = []
        self.decision_rows: list[tuple] = []
        self.capture_drift = False
        self.transitions: list[tuple] = []

    # ------------------------------------------------------------ helpers

    @property
    def proposed(self) -> bool:
        return self.method in ("PC", "PNC")

    def _phase(self, name: str) -> None:
        if self.debug:
            self.phase_log.append(f"{self.t}:{name}")

    def _busy(self) -> np.ndarray:
        return (self.ledger.Q_user.sum(axis=(0, 2)) > EPS) | (self.pend_user > EPS)

    def _cache_mask(self) -> np.ndarray:
        mask = np.zeros((self.S, self.F), dtype=bool)
        for s, c in enumerate(self.caches):
            mask[s, c] = True
        return mask

    def _zeta(self, s: int, users, rbs) -> np.ndarray:
        g = self.net.channel_gain[s][np.ix_(users, rbs)]
        I = self.est_I[s][np.ix_(users, rbs)]
        return self.cfg.tx_power_max * g / (self.noise + I)

    def _capacity_estimate(self) -> np.ndarray:
        """(S, U) packets/slot a user could get from an SBS over all M RBs."""
        zeta = self.cfg.tx_power_max * self.net.channel_gain / (self.noise + self.est_I)
        return self.a * np.log2(1.0 + zeta).sum(axis=2)

    # ------------------------------------------------------------ phases

    def _recluster(self) -> None:
        cfg, S = self.cfg, self.S
        D = self.window_demand
        if self.method == "PC":
            Msim = sbs_similarity(D)
            seed = int(self.rng.integers(2**31))
            assign = spectral_cluster(Msim, "auto", seed=seed, k_max=cfg.max_clusters)
            self.clusters = select_cluster_heads(Msim, assign)
        elif self.method == "PNC":
            self.clusters = select_cluster_heads(sbs_similarity(D), ClusterAssignment(np.zeros(S, dtype=np.int64), 1))
        else:
            self.clusters = ClusterAssignment(np.arange(S, dtype=np.int64), S, list(range(S)))
        backlog = self.ledger.Q_user.sum(axis=(1, 2))
        self.pools = {}
        for k in range(self.clusters.K):
            mem = self.clusters.members(k)
            split = partition_rbs(mem, backlog[mem], range(self.M))
            for s in mem:
                self.rb_sets[s] = list(split[int(s)])
            self.pools[k] = []
        self.ledger.H = np.array([len(r) for r in self.rb_sets], dtype=np.int64)
        if self.proposed:
            for s in range(S):
                Msim = content_similarity(D[s], self.blended[s], cfg.sigma_c_sq)
                seed = int(self.rng.integers(2**31))
                classes = spectral_cluster(Msim, "auto", seed=seed, k_max=cfg.max_clusters)
                self.models[s] = ClassModel.build(classes.labels, cfg.max_cache_updates, cfg.action_cap)
                self.learners[s] = LearnerState.fresh(len(self.models[s].actions))
                self.played[s] = -1
        if self.debug:
            entry = {"slot": self.t, "sbs": self.clusters.to_dict()}
            if self.proposed:
                entry["content_classes"] = [m.labels.tolist() for m in self.models]
            self.cluster_log.append(entry)
        self.window_demand = np.zeros_like(D)

    def _commit(self, charge: bool) -> None:
        cfg = self.cfg
        self.tau[:] = 0.0
        for s in range(self.S):
            old = self.caches[s]
            if self.proposed:
                prof = blend_popularity(self.learners[s].strategy, self.cloud.strategy, self.models[s], cfg.beta)
                new, tau, a_idx = commit_cache(
                    prof, self.models[s], old, cfg.cache_size, cfg.max_cache_updates, self.rng,
                    self.sizes, cfg.fronthaul_capacity, cfg.bits_per_packet, cfg.cache_update_form,
                )
                self.played[s] = a_idx
                self.blended[s] = prof.blended
            else:
                if self.method == "B1":
                    new = bl.b1_cache(old, self.F, cfg.cache_size, cfg.max_cache_updates, self.rng)
                else:
                    new = bl.b2_cache(old, self.request_counts[s], cfg.cache_size, cfg.max_cache_updates)
                tau = cache_update_time(
                    new, old, self.sizes, cfg.fronthaul_capacity, cfg.bits_per_packet,
                    cfg.max_cache_updates, cfg.cache_update_form,
                )
            self.caches[s] = list(new)
            self.tau[s] = tau if charge else 0.0
        if self.debug and self.proposed:
            self.checkpoints.append(checkpoint_json({s: self.learners[s] for s in range(self.S)}, dict(enumerate(self.caches))))

    def _associate(self, req):
        busy = self._busy()
        mask = self._cache_mask()
        if self.method == "B1":
            return bl.b1_associate(req, mask, self.coverage, self.anchors, busy, self.rng)
        if self.method == "B2":
            return bl.b2_associate(req, mask, self.net.distances, self.coverage, self.anchors, busy)
        total = self.ledger.Q_user.sum(axis=(1, 2))
        return associate_users(req, mask, total, self.net.distances, self.coverage, self.anchors, busy)

    def _local_users(self, s: int) -> np.ndarray:
        Q = self.ledger.Q_user[s]
        return np.flatnonzero((self.anchors == s) & (Q.sum(axis=1) > EPS))

    def _schedule_proposed(self, s: int, users, rbs, cap) -> SbsDecision:
        cfg = self.cfg
        Q = self.ledger.Q_user[s][users]
        G = self.ledger.G_user[s][users]
        pu, pf = np.nonzero(Q > EPS)
        weight = Q[pu, pf] + G[pu, pf]
        W = np.minimum(Q[pu, pf], cap[s, users][pu])
        # only each user's heaviest contents enter the program; the rest stay
        # unscheduled and their latency becomes a floor on the slot latency
        keep = np.zeros(len(pu), dtype=bool)
        for i in range(len(users)):
            mine = np.flatnonzero(pu == i)
            keep[mine[np.lexsort((mine, -weight[mine]))][: cfg.max_pairs_per_user]] = True
        E_floor = float((W[~keep] / self.c_pk).max(initial=0.0))
        pu, pf, weight, W = pu[keep], pf[keep], weight[keep], W[keep]
        zeta = self._zeta(s, users, rbs)
        inst = SbsInstance(zeta, pu, weight, W, len(rbs), cfg.lyapunov_V, self.a, self.c_pk, E_floor)
        rel = solve_sbs_subproblem(inst, max_outer=cfg.ccp_max_outer, tol=cfg.ccp_tol, gap_tol=cfg.ccp_gap_tol)
        if rel.trace is not None and np.any(np.diff(rel.trace.objectives) < -1e-9):
            raise RuntimeError("non-monotone CCP trace")
        b, Yp = round_decision(rel.delta, rel.psi, pu, inst.weight, inst.H)
        b, Yp = polish_decision(inst, b, Yp, rel.psi)
        Y = np.zeros((len(users), self.F), dtype=np.int64)
        Y[pu[Yp], pf[Yp]] = 1
        R = pair_rates(inst, b, Yp)
        E = max(float(np.max(W / (R + self.c_pk))) if len(W) else 0.0, E_floor)
        its = rel.trace.iterations if rel.trace is not None else 0
        if self.debug and rel.trace is not None:
            for k, obj in enumerate(rel.trace.objectives):
                self.ccp_log.append((f"{self.t}:{s}", k, obj))
        return SbsDecision(s, users, np.asarray(rbs), b, Y, E, its)

    def _schedule(self, cap) -> list[SbsDecision]:
        out = []
        for s in range(self.S):
            users = self._local_users(s)
            rbs = self.rb_sets[s]
            if users.size == 0 or len(rbs) == 0:
                continue
            if self.proposed:
                out.append(self._schedule_proposed(s, users, rbs, cap))
                continue
            Q = self.ledger.Q_user[s][users]
            if self.method == "B1":
                b, Y = bl.b1_schedule(Q, len(rbs), self.rng)
            else:
                se = np.log2(1.0 + self.cfg.tx_power_max * self.net.channel_gain[s][np.ix_(users, rbs)] / self.noise)
                b, Y = bl.b2_schedule(Q, se, self.pf.avg[users])
            out.append(SbsDecision(s, users, np.asarray(rbs), b, Y))
        return out

    def _fronthaul(self) -> tuple[np.ndarray, float]:
        Qc = self.ledger.Q_cloud
        if not self.proposed:
            return bl.equal_fronthaul(Qc), 0.0
        idx = np.argwhere(Qc > EPS)
        nu = np.zeros_like(Qc)
        if idx.size == 0:
            return nu, 0.0
        q = Qc[idx[:, 0], idx[:, 1]]
        g = self.ledger.G_cloud[idx[:, 0], idx[:, 1]]
        # a share beyond the backlog would go unused
        inst = FronthaulInstance(q + g, np.minimum(q, self.a_c), self.cfg.lyapunov_V, self.a_c, self.c_pk, q / self.a_c)
        x, B, trace = solve_fronthaul(inst, max_outer=self.cfg.ccp_max_outer, tol=self.cfg.ccp_tol, gap_tol=self.cfg.ccp_gap_tol)
        if trace is not None and np.any(np.diff(trace.objectives) < -1e-9):
            raise RuntimeError("non-monotone CCP trace")
        nu[idx[:, 0], idx[:, 1]] = np.clip(x, 0.0, 1.0)
        total = nu.sum()
        if total > 1.0:
            nu /= total
        return nu, B

    def _check(self, dec: SlotDecision) -> list[str]:
        errs = []
        for d in dec.sbs:
            H = int(self.ledger.H[d.sbs])
            b_full = np.zeros((len(d.users), self.M), dtype=np.int64)
            b_full[:, d.rbs] = d.b
            for e in check_decision(b_full, d.Y, H, self.rb_sets[d.sbs]):
                errs.append(f"SBS {d.sbs}: {e}")
        if dec.nu.sum() > 1.0 + 1e-9 or dec.nu.min() < 0 or dec.nu.max() > 1.0:
            errs.append("fronthaul fractions outside the budget")
        for s, c in enumerate(self.caches):
            if len(c) > self.cfg.cache_size or len(set(c)) != len(c):
                errs.append(f"SBS {s}: cache exceeds its size")
        for k in range(self.clusters.K):
            held = [r for s in self.clusters.members(k) for r in self.rb_sets[s]]
            if len(held) != len(set(held)):
                errs.append(f"cluster {k}: RB held by two members")
        return errs

    # ------------------------------------------------------------ slot

    def run_slot(self) -> None:
        cfg, t = self.cfg, self.t
        S, U, F = self.S, self.U, self.F
        led = self.ledger

        before = None
        if self.capture_drift:
            before = QueueLedger(
                led.Q_user.copy(), led.Q_cloud.copy(), led.H.copy(), led.G_user.copy(), led.G_cloud.copy(), led.avg_arrival
            )

        self._phase("channel")
        step_channel(self.net, self.streams.channel)

        self._phase("requests")
        req = self.trace[t]
        D = demand_vector(req, self.coverage, F)
        self.window_demand += D
        self.request_counts += D

        self._phase("clustering")
        clustering_slot = t % cfg.T1 == 0
        if clustering_slot:
            self._recluster()

        self._phase("cache_commit")
        if t % cfg.T2 == 0:
            self._commit(charge=not clustering_slot)
        else:
            self.tau[:] = 0.0

        self._phase("association")
        anchors, via_cloud, dropped = self._associate(req)
        self.anchors = anchors
        user_arr = np.zeros((S, U, F))
        cloud_new = np.zeros((S, F))
        hits = 0
        for u in np.flatnonzero((req >= 0) & ~dropped):
            f, s = int(req[u]), int(anchors[u])
            if via_cloud[u]:
                cloud_new[s, f] += 1
                self.pending.setdefault((s, f), []).append([u, self.sizes[f]])
                self.pend_user[u] += self.sizes[f]
            else:
                user_arr[s, u, f] += self.sizes[f]
                hits += 1

        self._phase("interference")
        measured = measured_interference(self.prev_tx, self.net.channel_gain)
        self.est_I = update_interference(self.est_I, measured, cfg.interference_smoothing)
        cap = self._capacity_estimate()

        self._phase("sbs_solve")
        decisions = [] if clustering_slot else self._schedule(cap)

        self._phase("fronthaul")
        if clustering_slot:
            nu, B = np.zeros((S, F)), 0.0
        else:
            nu, B = self._fronthaul()
        dec = SlotDecision(decisions, nu, B)
        errs = self._check(dec)
        if errs:
            raise RuntimeError(f"slot {t}: " + "; ".join(errs))

        self._phase("transmit")
        tx = np.zeros((S, self.M))
        for d in dec.sbs:
            used = d.rbs[d.b.sum(axis=0) > 0]
            if used.size:
                tx[d.sbs, used] = cfg.tx_power_max / used.size
        rx = tx[:, None, :] * self.net.channel_gain  # (S, U, M)
        total_rx = rx.sum(axis=0)
        served = np.zeros((S, U, F))
        rate_pk = np.zeros((S, U, F))
        se_user = np.zeros(U)
        for d in dec.sbs:
            s = d.sbs
            for i, u in enumerate(d.users):
                rbs = d.rbs[d.b[i] > 0]
                k = d.Y[i].sum()
                if rbs.size == 0 or k == 0:
                    continue
                sig = rx[s, u, rbs]
                sinr = sig / (self.noise + total_rx[u, rbs] - sig)
                se = float(np.log2(1.0 + sinr).sum())
                se_user[u] += se
                r = self.a * se / k
                rate_pk[s, u, d.Y[i] > 0] = r
                if self.debug:
                    for m in rbs:
                        for f in np.flatnonzero(d.Y[i]):
                            self.decision_rows.append((t, s, int(u), int(m), int(f)))
        served = np.minimum(led.Q_user, rate_pk)
        W_user = np.minimum(led.Q_user, cap[:, :, None])
        J_user = access_cost(W_user, rate_pk * cfg.bits_per_packet, cfg.bits_per_packet, cfg.cost_floor)
        Qc = led.Q_cloud
        service_c = self.a_c * nu
        served_c = np.minimum(Qc, service_c)
        W_c = np.minimum(Qc, self.a_c)
        J_cloud = fronthaul_cost(W_c, nu, cfg.alpha, cfg.fronthaul_capacity, cfg.bits_per_packet, cfg.cost_floor)
        # cloud deliveries reach the anchor's queue in request order
        for (s, f), fifo in list(self.pending.items()):
            left = served_c[s, f]
            while fifo and left > EPS:
                u, rem = fifo[0]
                got = min(rem, left)
                user_arr[s, u, f] += got
                self.pend_user[u] = max(self.pend_user[u] - got, 0.0)
                left -= got
                fifo[0][1] -= got
                if fifo[0][1] <= EPS:
                    fifo.pop(0)
            if not fifo:
                del self.pending[(s, f)]

        Q_next = step_user_queue(led.Q_user, served, user_arr)
        Qc_next = step_cloud_queue(Qc, nu, cloud_new, self.sizes[None, :], cfg.alpha, cfg.fronthaul_capacity, cfg.bits_per_packet)
        led.avg_arrival.update(user_arr)
        ubound = user_deficit_bound(cfg.epsilon_u, led.avg_arrival.value, self.qos[None, None, :])
        cbound = np.broadcast_to(cloud_deficit_bound(cfg.epsilon_s, self.qos, self.sizes)[None, :], Qc.shape)
        G_next = step_deficit_queue(led.G_user, Q_next, ubound)
        Gc_next = step_deficit_queue(led.G_cloud, Qc_next, cbound)

        # RB bookkeeping: matched RBs return to the cluster pool, which is shared
        # out again among members that still have backlog
        alloc = np.zeros(S, dtype=np.int64)
        for d in dec.sbs:
            used = [int(r) for r in d.rbs[d.b.sum(axis=0) > 0]]
            alloc[d.sbs] = len(used)
            k = int(self.clusters.labels[d.sbs])
            self.rb_sets[d.sbs] = [r for r in self.rb_sets[d.sbs] if r not in used]
            self.pools[k].extend(used)
        h = np.zeros(S, dtype=np.int64)
        backlog = Q_next.sum(axis=(1, 2))
        for k in range(self.clusters.K):
            pool = self.pools.get(k, [])
            if not pool:
                continue
            mem = [int(s) for s in self.clusters.members(k) if backlog[s] > EPS]
            if not mem:
                continue
            split = partition_rbs(mem, backlog[mem], pool)
            for s in mem:
                self.rb_sets[s] = sorted(self.rb_sets[s] + list(split[s]))
                h[s] = len(split[s])
            self.pools[k] = []
        H_next = np.array([step_resource_queue(int(led.H[s]), int(alloc[s]), int(h[s]), self.M) for s in range(S)])
        if not np.array_equal(H_next, [len(r) for r in self.rb_sets]):
            raise RuntimeError(f"slot {t}: RB inventory out of sync")

        if self.capture_drift:
            tr = SlotTransition(
                user_served=served, user_arrived=user_arr, user_bound=ubound,
                cloud_served=served_c, cloud_arrived=self.sizes[None, :] * cloud_new, cloud_bound=cbound,
                rb_allocated=alloc, rb_arrival=(H_next - before.H + alloc),
            )
            self.transitions.append((before, tr))

        led.Q_user, led.Q_cloud, led.G_user, led.G_cloud, led.H = Q_next, Qc_next, G_next, Gc_next, H_next
        led.check(self.M)
        self.pf.update(se_user)
        self.prev_tx = tx

        self._phase("learning")
        Jmax = np.array([J_user[s].max(initial=0.0) for s in range(S)])
        Qmax = np.array([Q_next[s].max(initial=0.0) for s in range(S)])
        if self.proposed and not clustering_slot:
            for s in range(S):
                if self.played[s] < 0:
                    continue
                fb = -(Jmax[s] + Qmax[s] + self.tau[s])
                st = learn_step(self.learners[s], int(self.played[s]), fb, cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.xi_s, cfg.clip_regret)
                check_strategy(st.strategy)
                self.learners[s] = st
            fb = cloud_feedback(J_cloud, Qc_next, self.cloud_played)
            self.cloud = learn_step(self.cloud, self.cloud_played, fb, cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.xi_c, cfg.clip_regret)
            check_strategy(self.cloud.strategy)
            self.cloud_played = int(self.rng.choice(F, p=self.cloud.strategy))

        self._phase("record")
        rec = self.record
        rec.labels[t] = self.clusters.labels
        rec.requests[t] = int((req >= 0).sum())
        rec.hits[t] = hits
        rec.drops[t] = int(dropped.sum())
        nz = Q_next[Q_next > EPS]
        rec.queue_mean[t] = float(nz.mean()) if nz.size else 0.0
        its = [d.iterations for d in dec.sbs if d.iterations]
        rec.ccp_iterations[t] = float(np.mean(its)) if its else np.nan
        if not clustering_slot:
            rec.J_sbs[t] = Jmax
            rec.Q_sbs[t] = Qmax
            rec.tau[t] = self.tau
            rec.J_cloud[t] = J_cloud.max(initial=0.0)
            rec.Q_cloud[t] = Qc_next.max(initial=0.0)
        self.t += 1

    def run(self) -> RunRecord:
        while self.t < self.horizon:
            self.run_slot()
        return self.record


def run_slot(t: int, world: World) -> World:
    """Advance ``world`` by one slot; ``t`` must be the world's current slot."""
    if t != world.t:
        raise ValueError(f"world is at slot {world.t}, not {t}")
    world.run_slot()
    return world


def simulate(cfg: SimConfig, method: str, seed: int, horizon: int, trace=None, debug: bool = False) -> World:
    w = World(cfg, method, seed, horizon, trace=trace, debug=debug)
    w.run()
    return w
