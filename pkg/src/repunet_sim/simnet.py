"""Round-based network simulation.

Each round is barrier-synchronized on a virtual clock: every node trains,
broadcasts, receives what arrives before the aggregation timeout, scores its
neighbors, aggregates the models it trusts and shares its opinions. Messages
that miss the timeout are delivered in a later round as stale models.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import trainer
from .aggregation import AggregationPolicy, filter_models, reputation_weighted_aggregate
from .config import ScenarioConfig
from .core import ConfigError, MetricVector, ModelMessage, RngStream, SimClock
from .metrics import (
    FlowHistory,
    change_observation,
    fraction_changed_score,
    fraction_within_limits,
    latency_score,
    measure_latency,
    message_flow_score,
    missing_model_penalty,
    model_similarity,
)
from .reputation import (
    ReputationState,
    dynamic_weights,
    fuse_feedback,
    intermediate_score,
    update_reputation,
)

log = logging.getLogger(__name__)


# -- topology and attacks ------------------------------------------------------

def _is_connected(adj) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(adj)


def build_topology(kind: str, n: int, edge_prob: float = 0.3, seed: int = 0, max_tries: int = 10_000) -> list:
    """Adjacency lists (sorted) for a connected, symmetric, loop-free graph."""
    if n < 2:
        raise ConfigError("n_nodes", f"need at least 2 nodes, got {n}")
    if kind == "fully":
        return [[j for j in range(n) if j != i] for i in range(n)]
    if kind == "ring":
        if n == 2:
            return [[1], [0]]
        return [sorted({(i - 1) % n, (i + 1) % n}) for i in range(n)]
    if kind == "random":
        rng = np.random.default_rng(seed)
        iu, ju = np.triu_indices(n, k=1)
        for _ in range(max_tries):
            keep = rng.random(iu.size) < edge_prob
            adj = [[] for _ in range(n)]
            for a, b in zip(iu[keep], ju[keep]):
                adj[a].append(int(b))
                adj[b].append(int(a))
            if _is_connected(adj):
                return [sorted(x) for x in adj]
        raise RuntimeError(f"no connected graph with edge_prob={edge_prob} after {max_tries} draws")
    raise ConfigError("topology.kind", f"unknown topology {kind!r}")


def select_attackers(n: int, fraction: float, rng: np.random.Generator) -> frozenset:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    k = int(math.floor(n * fraction + 0.5))
    if k == 0:
        return frozenset()
    return frozenset(int(x) for x in rng.choice(n, size=k, replace=False))


def apply_poisoning(model, sigma: float, rng: np.random.Generator) -> np.ndarray:
    model = np.asarray(model, dtype=np.float64)
    if sigma == 0:
        return model.copy()
    return model + rng.normal(0.0, sigma, size=model.shape)


def apply_delay(send_time: float, delay_s: float) -> float:
    return send_time + delay_s


def apply_flooding(base_messages: int, multiplier: int) -> int:
    return int(base_messages) * int(multiplier)


# -- round records -------------------------------------------------------------

@dataclass
class LinkRecord:
    """One evaluator's view of one neighbor in one round."""

    round: int
    node: int
    neighbor: int
    metrics: MetricVector
    weights: np.ndarray
    score: float
    reputation: float
    accepted: bool
    received: bool
    model_round: int | None
    latency: float | None
    messages: int
    feedback: float | None


@dataclass
class NodeRecord:
    round: int
    node: int
    is_attacker: bool
    f1: float
    loss: float
    accepted_models: int
    cost_units: int


@dataclass
class RoundLog:
    round: int
    start_time: float
    end_time: float
    links: list = field(default_factory=list)
    nodes: list = field(default_factory=list)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    attackers: frozenset
    adjacency: list
    logs: list


# -- simulation ----------------------------------------------------------------

class Simulation:
    def __init__(self, cfg: ScenarioConfig):
        cfg.validate()
        self.cfg = cfg
        self.rng = RngStream(cfg.seed)
        n = cfg.n_nodes
        self.n = n
        topo_seed = int(self.rng.stream("topology").integers(2**63))
        self.adjacency = build_topology(cfg.topology.kind, n, cfg.topology.edge_prob, topo_seed)
        if cfg.attack.kind == "none":
            self.attackers = frozenset()
        else:
            self.attackers = select_attackers(n, cfg.attack.attacker_fraction, self.rng.stream("attack", "select"))

        tc = cfg.trainer
        data_rng = self.rng.stream("data")
        means = data_rng.normal(0.0, tc.class_sep, size=(tc.n_classes, tc.dim_in))
        n_train = n * tc.samples_per_node
        n_test = max(tc.n_classes, int(round(n_train * tc.test_fraction / (1.0 - tc.test_fraction))))
        self.train_set = trainer.generate_dataset(n_train, tc.dim_in, tc.n_classes,
                                                  int(data_rng.integers(2**63)), means=means)
        self.test_set = trainer.generate_dataset(n_test, tc.dim_in, tc.n_classes,
                                                 int(data_rng.integers(2**63)), means=means)
        shards = trainer.dirichlet_partition(self.train_set.labels, cfg.dirichlet_alpha, n,
                                             int(self.rng.stream("partition").integers(2**63)))
        self.shards = [self.train_set.subset(s) for s in shards]

        self.models = [trainer.init_model(tc.dim_in, tc.n_classes) for _ in range(n)]
        rc = cfg.reputation
        self.states = [ReputationState(rc.fraction_lambda, rc.mu_smooth, rc.tau, rc.delta, rc.bootstrap_window)
                       for _ in range(n)]
        self.flows = [FlowHistory(params=rc.flow.params()) for _ in range(n)]
        self.gamma = rc.similarity_weights()
        self.history_weights = rc.history_weights()
        self.policy = AggregationPolicy(exclusion_threshold=rc.threshold if rc.enabled else 0.0)

        self.clock = SimClock()
        self.round_starts: list = []
        self.prev_counts: list = []
        self.pending: list = []  # (receiver, ModelMessage) that missed their round
        self.logs: list = []
        self.round = 0

    # streams are re-derived per (node, round) so results never depend on call order
    def _stream(self, *names) -> np.random.Generator:
        return self.rng.stream(*names)

    def run_round(self) -> RoundLog:
        cfg = self.cfg
        r = self.round
        n = self.n
        tc = cfg.trainer
        rc = cfg.reputation
        attack = cfg.attack
        active = attack.is_active(r)
        intensity = attack.effective_intensity()
        t0 = self.clock.now()
        self.round_starts.append(t0)
        deadline = t0 + cfg.timeout_s

        # 1. local training
        starts = [m.copy() for m in self.models]
        trained = []
        for i in range(n):
            shard = self.shards[i]
            trained.append(trainer.local_train(starts[i], shard.features, shard.labels,
                                               tc.epochs, tc.lr, tc.n_classes, tc.batch_size))
        updates = [trained[i] - starts[i] for i in range(n)]

        # 2. broadcast
        counts = {}
        outgoing = []  # (receiver, message)
        for i in range(n):
            attacking = active and i in self.attackers
            payload = trained[i]
            send_time = t0
            if attacking and attack.kind == "poisoning":
                sigma = intensity * float(np.linalg.norm(updates[i]))
                payload = apply_poisoning(trained[i], sigma, self._stream("poison", i, r))
            if attacking and attack.kind == "delayer":
                send_time = apply_delay(t0, intensity)
            per_link = cfg.network.base_messages
            if attacking and attack.kind == "flooding":
                per_link = apply_flooding(per_link, int(intensity))
            jitter = self._stream("latency", i, r).random(len(self.adjacency[i]))
            for j, u in zip(self.adjacency[i], jitter):
                counts[(i, j)] = per_link
                arrival = send_time + cfg.network.base_latency + cfg.network.jitter * float(u)
                outgoing.append((j, ModelMessage(i, r, payload, send_time, arrival)))

        # 3. delivery up to the deadline; late messages wait for a later round
        inbox = [dict() for _ in range(n)]
        still_pending = []
        on_time = []
        for receiver, msg in self.pending + outgoing:
            if msg.arrival_time <= deadline:
                prev = inbox[receiver].get(msg.sender)
                if prev is None or msg.model_round >= prev.model_round:
                    inbox[receiver][msg.sender] = msg
                on_time.append(msg.arrival_time)
            else:
                still_pending.append((receiver, msg))
        self.pending = still_pending
        current_late = any(m.model_round == r for _, m in still_pending)
        end_time = deadline if current_late else max(on_time, default=t0)

        # 4. metrics and local reputation
        local_rep = [dict() for _ in range(n)]
        partial = {}
        for i in range(n):
            state = self.states[i]
            flow = self.flows[i]
            flow.current = counts
            flow.previous = self.prev_counts
            weight_rng = self._stream("weights", i, r)
            for j in self.adjacency[i]:
                rec = state.record(j)
                msg = inbox[i].get(j)
                # baselines only learn from neighbors that are still trusted
                trusted = not rec.reputations or rec.reputations[-1] >= rc.threshold or not rc.gate_baselines
                if msg is not None:
                    sim = model_similarity(trained[i], msg.params, self.gamma)
                    rec.last_similarity = sim
                    f, t = change_observation(msg.params, starts[i], updates[i], mode=rc.fraction_reference)
                    frac = fraction_changed_score(rec.fraction, f, t)
                    if trusted and fraction_within_limits(rec.fraction, f, t):
                        rec.fraction.record(f, t, frac)
                    else:
                        rec.fraction.prev_final = frac
                    lat_value = measure_latency(msg.arrival_time, msg.model_round, r, self.round_starts)
                    lat = latency_score(rec.latency, lat_value, r)
                    if trusted:
                        rec.latency.record(lat_value, lat)
                    else:
                        rec.latency.prev_smoothed = lat
                else:
                    sim = rec.last_similarity
                    frac = missing_model_penalty(rec.fraction.prev_final)
                    rec.fraction.prev_final = frac
                    lat_value = None
                    lat = missing_model_penalty(rec.latency.prev_smoothed)
                    rec.latency.prev_smoothed = lat
                msg_score = message_flow_score(flow, (j, i), r)
                flow.record((j, i), msg_score)

                mv = MetricVector(sim, frac, lat, msg_score)
                ref = rec.reference_means(r, mv)
                w = dynamic_weights(mv, ref, rc.weight_floor, weight_rng)
                score = intermediate_score(mv, w)
                if r == 0 or not rec.reputations:
                    rep = rc.initial
                else:
                    rep = update_reputation(state, j, score, self.history_weights)
                rec.rounds.append(r)
                rec.metrics.append(mv)
                rec.weights.append(w)
                rec.scores.append(score)
                rec.message_counts.append(counts[(j, i)])
                rec.trusted.append(trusted)
                local_rep[i][j] = rep
                partial[(i, j)] = (mv, w, score, msg, lat_value)

        # 5. feedback fusion with opinions issued this round by trusted neighbors
        final_rep = [dict() for _ in range(n)]
        for i in range(n):
            for j in self.adjacency[i]:
                rep = local_rep[i][j]
                fb_mean = None
                if rc.feedback and r > 0:
                    fb = [local_rep[k][j] for k in self.adjacency[i]
                          if k != j and j in local_rep[k] and local_rep[i][k] >= rc.threshold]
                    if fb:
                        fb_mean = float(np.mean(fb))
                        rep = fuse_feedback(rep, fb, rc.eta)
                rec = self.states[i].record(j)
                rec.reputations.append(rep)
                rec.feedback.append(fb_mean)
                final_rep[i][j] = rep

        # 6. filter and aggregate
        links = []
        nodes = []
        new_models = []
        for i in range(n):
            messages = [inbox[i][j] for j in self.adjacency[i] if j in inbox[i]]
            reps = final_rep[i] if rc.enabled else {j: 1.0 for j in self.adjacency[i]}
            kept = filter_models(messages, reps, self.policy)
            accepted_senders = {m.sender for m, _ in kept}
            new_models.append(reputation_weighted_aggregate(
                trained[i], [(m.params, w) for m, w in kept], self.policy))
            for j in self.adjacency[i]:
                mv, w, score, msg, lat_value = partial[(i, j)]
                links.append(LinkRecord(
                    round=r, node=i, neighbor=j, metrics=mv, weights=w,
                    score=score, reputation=final_rep[i][j] if rc.enabled else 1.0,
                    accepted=j in accepted_senders, received=msg is not None,
                    model_round=None if msg is None else msg.model_round,
                    latency=lat_value, messages=counts[(j, i)],
                    feedback=self.states[i].record(j).feedback[-1],
                ))
            cost = sum(counts[(j, i)] for j in self.adjacency[i])
            nodes.append((i, len(kept), cost))
        self.models = new_models

        for i, n_kept, cost in nodes:
            shard = self.shards[i]
            f1 = trainer.evaluate_f1(self.models[i], self.test_set)
            loss = trainer.logistic_loss(self.models[i], shard.features, shard.labels, tc.n_classes)
            nodes[i] = NodeRecord(r, i, i in self.attackers, f1, loss, n_kept, cost)

        self.prev_counts = list(counts.values())
        self.clock.advance_to(end_time)
        entry = RoundLog(r, t0, self.clock.now(), links, nodes)
        self.logs.append(entry)
        self.round += 1
        log.debug("round %d done at t=%.2f", r, self.clock.now())
        return entry

    def run(self, rounds: int | None = None) -> ScenarioResult:
        total = self.cfg.rounds if rounds is None else rounds
        for _ in range(total):
            self.run_round()
        return ScenarioResult(self.cfg, self.attackers, self.adjacency, self.logs)


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> ScenarioResult:
    """Run ``cfg.rounds`` rounds; write exports to ``out_dir`` when given."""
    result = Simulation(cfg).run()
    if out_dir is not None:
        from .export import write_run
        write_run(result, out_dir)
    return result
