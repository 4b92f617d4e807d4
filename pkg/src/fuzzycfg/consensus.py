"""Consensus seeking over fuzzy affinities.

Agents start one-per-group and repeatedly reassign themselves to the group
maximizing a blend of cohesion (k1, mean affinity to the group) and
separation (k2, mean dissimilarity to everyone else), until a full sweep
changes nothing. The same machinery clusters a community into super-agents
whose relation rows are member averages, and expands a super-level
configuration back into elementary ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .agents import Message, MessageKind
from .fuzzy import FuzzyRelation, TOL, average_rows, validate_relation


class ConsensusError(ValueError):
    pass


class GeneralizationUnavailable(Exception):
    """Raised when a community's internal relation cannot support
    super-agent creation; the caller falls back to elementary agents."""


@dataclass(frozen=True)
class ConsensusParams:
    alpha: float = 0.5
    max_sweeps: int = 100
    tie_break: str = "smallest-label"

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ConsensusError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.max_sweeps < 1:
            raise ConsensusError("max_sweeps must be >= 1")


@dataclass(frozen=True)
class ConsensusGroup:
    members: frozenset[str]

    @property
    def label(self) -> str:
        return min(self.members)


@dataclass(frozen=True)
class Partition:
    groups: tuple[ConsensusGroup, ...]

    @classmethod
    def of(cls, member_sets) -> "Partition":
        groups = sorted(
            (ConsensusGroup(frozenset(m)) for m in member_sets if m),
            key=lambda g: g.label,
        )
        seen: set[str] = set()
        for g in groups:
            if seen & g.members:
                raise ConsensusError("groups are not disjoint")
            seen |= g.members
        return cls(tuple(groups))

    @classmethod
    def singletons(cls, ids) -> "Partition":
        return cls.of([{i} for i in ids])

    @property
    def member_of(self) -> dict[str, str]:
        return {m: g.label for g in self.groups for m in g.members}

    @property
    def agents(self) -> frozenset[str]:
        return frozenset(m for g in self.groups for m in g.members)

    def group_of(self, agent_id: str) -> ConsensusGroup:
        for g in self.groups:
            if agent_id in g.members:
                return g
        raise ConsensusError(f"agent {agent_id!r} not in partition")

    def move(self, agent_id: str, target_label: str) -> "Partition":
        """Move one agent into the group currently labelled target_label,
        compacting any emptied source group."""
        sets = []
        for g in self.groups:
            members = set(g.members) - {agent_id}
            if g.label == target_label:
                members.add(agent_id)
            sets.append(members)
        return Partition.of(sets)

    def canonical(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(sorted(g.members)) for g in self.groups)


@dataclass(frozen=True)
class Scores:
    k1: float
    k2: float
    k: float


def _score(i: str, members, universe, mu: FuzzyRelation, alpha: float) -> Scores:
    row = mu.row(i)
    col = {c: j for j, c in enumerate(mu.cols)}
    try:
        inside = [row[col[g]] for g in members]
        outside = [row[col[g]] for g in universe if g not in members]
    except KeyError as exc:
        raise ConsensusError(f"missing affinity entry ({i}, {exc.args[0]})") from None
    k1 = float(np.mean(inside)) if inside else 0.0
    # empty complement: separation is vacuously perfect
    k2 = float(np.mean([1.0 - v for v in outside])) if outside else 1.0
    return Scores(k1, k2, alpha * k1 + (1.0 - alpha) * k2)


def affinity_scores(
    i: str, partition: Partition, mu: FuzzyRelation, params: ConsensusParams
) -> dict[str, Scores]:
    """Per-group (k1, k2, k) for agent i against the partition as given."""
    universe = sorted(partition.agents)
    return {
        g.label: _score(i, g.members, universe, mu, params.alpha)
        for g in partition.groups
    }


def assignment_scores(
    i: str, partition: Partition, mu: FuzzyRelation, params: ConsensusParams
) -> dict[str, Scores]:
    """Scores used when i itself belongs to the partition: each group is
    evaluated as it would stand with i assigned to it (i's own group is
    unchanged), matching the assignment step's "add s_i to the part"."""
    universe = sorted(partition.agents)
    return {
        g.label: _score(i, g.members | {i}, universe, mu, params.alpha)
        for g in partition.groups
    }


def _pick(scores: dict[str, Scores]) -> str:
    best = max(s.k for s in scores.values())
    return min(label for label, s in scores.items() if s.k >= best - TOL)


def consensus_step(
    i: str, partition: Partition, mu: FuzzyRelation, params: ConsensusParams
) -> tuple[Partition, bool, list[Message]]:
    """One step: i joins its argmax-k group; diffusion messages are produced
    only on modification. The current group wins over any equal-k rival
    (stability bias), so i moves only for a strict improvement; among
    equally-improving rivals the smallest label wins."""
    scores = assignment_scores(i, partition, mu, params)
    current = partition.group_of(i).label
    if scores[current].k >= max(s.k for s in scores.values()) - TOL:
        return partition, False, []
    target = _pick(scores)
    if target == current:
        return partition, False, []
    moved = partition.move(i, target)
    new_label = moved.member_of[i]
    outbound = [
        Message(MessageKind.ASSIGNMENT_UPDATE, i, {"agent": i, "group": new_label}),
        Message(MessageKind.PARTITION_UPDATE, i, {"groups": moved.canonical()}),
    ]
    return moved, True, outbound


@dataclass
class ConsensusOutcome:
    partition: Partition
    sweeps: int
    converged: bool
    messages: list[Message] = field(default_factory=list)


def seek_consensus(
    agent_ids, mu: FuzzyRelation, params: ConsensusParams | None = None
) -> ConsensusOutcome:
    """Run full sweeps from the singleton partition until a sweep changes
    nothing. A revisited partition state or max_sweeps exhaustion stops the
    loop with converged=False."""
    params = params or ConsensusParams()
    order = list(agent_ids)
    if not order:
        raise ConsensusError("cannot seek consensus over no agents")
    partition = Partition.singletons(order)
    seen = {partition.canonical()}
    messages: list[Message] = []
    sweeps = 0
    converged = False
    while sweeps < params.max_sweeps:
        sweeps += 1
        changed = False
        for i in order:
            partition, moved, outbound = consensus_step(i, partition, mu, params)
            changed = changed or moved
            messages.extend(outbound)
        if not changed:
            converged = True
            break
        state = partition.canonical()
        if state in seen:
            break
        seen.add(state)
    return ConsensusOutcome(partition, sweeps, converged, messages)


@dataclass
class CoClusterOutcome:
    """Aligned pair: configuration groups and the solutions assigned to
    each (the diagonal blocks of the consensus matrix)."""

    config_partition: Partition
    solution_assignment: dict[str, str]  # solution id -> config group label
    sweeps: int
    converged: bool

    def aligned(self) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
        out = []
        for g in self.config_partition.groups:
            sols = tuple(
                sorted(s for s, lbl in self.solution_assignment.items() if lbl == g.label)
            )
            out.append((sols, tuple(sorted(g.members))))
        return out


def co_cluster(
    solutions,
    configurations,
    mu: FuzzyRelation,
    params: ConsensusParams | None = None,
) -> CoClusterOutcome:
    """Alternate Table-1 sweeps across a rectangular affinity: solutions
    attach to configuration groups, then configurations regroup around the
    induced solution groups (via the transpose), until a joint fixpoint."""
    params = params or ConsensusParams()
    sols = list(solutions)
    configs = list(configurations)
    if tuple(sols) != mu.rows or tuple(configs) != mu.cols:
        raise ConsensusError("affinity matrix does not match the given id lists")
    mu_t = mu.transpose()

    config_partition = Partition.singletons(configs)
    assignment: dict[str, str] = {}
    prev_state = None
    sweeps = 0
    converged = False
    seen = set()
    while sweeps < params.max_sweeps:
        sweeps += 1
        for s in sols:
            scores = affinity_scores(s, config_partition, mu, params)
            assignment[s] = _pick(scores)
        # group solutions by the configuration group they chose
        sol_sets: dict[str, set[str]] = {}
        for s, lbl in assignment.items():
            sol_sets.setdefault(lbl, set()).add(s)
        sol_partition = Partition.of(sol_sets.values())
        # configurations pick a solution group through the transpose
        config_choice = {
            g: _pick(affinity_scores(g, sol_partition, mu_t, params)) for g in configs
        }
        cfg_sets: dict[str, set[str]] = {}
        for g, lbl in config_choice.items():
            cfg_sets.setdefault(lbl, set()).add(g)
        config_partition = Partition.of(cfg_sets.values())

        state = (tuple(sorted(assignment.items())), config_partition.canonical())
        if state == prev_state:
            converged = True
            break
        if state in seen:
            break
        seen.add(state)
        prev_state = state

    # final attachment against the settled configuration groups
    for s in sols:
        assignment[s] = _pick(affinity_scores(s, config_partition, mu, params))
    return CoClusterOutcome(config_partition, assignment, sweeps, converged)


@dataclass(frozen=True)
class SuperAgent:
    id: str
    members: tuple[str, ...]
    # relation name -> averaged row over the members
    lifted_knowledge: dict[str, np.ndarray] = field(default_factory=dict, hash=False)


def super_id(members) -> str:
    return "+".join(sorted(members))


def cluster_community(
    community_ids,
    internal_relation: FuzzyRelation,
    inter_relations: dict[str, FuzzyRelation],
    params: ConsensusParams | None = None,
) -> list[SuperAgent]:
    """Self-cluster one community and lift its rows of every
    inter-community relation by member averaging."""
    ids = list(community_ids)
    problems = validate_relation(internal_relation)
    if problems:
        raise GeneralizationUnavailable(
            "; ".join(str(p) for p in problems)
        )
    if set(internal_relation.rows) != set(ids) or set(internal_relation.cols) != set(ids):
        raise GeneralizationUnavailable(
            "internal relation is not square over the community"
        )
    outcome = seek_consensus(sorted(ids), internal_relation, params)
    supers = []
    for group in outcome.partition.groups:
        members = tuple(sorted(group.members))
        lifted = {
            name: average_rows(rel, members) for name, rel in inter_relations.items()
        }
        supers.append(SuperAgent(super_id(members), members, lifted))
    return sorted(supers, key=lambda s: s.id)


def expand_configuration(
    super_config: dict[str, str],
    slots: dict[str, dict[str, list[str]]],
    ratings: dict[str, float],
    epsilon: float = 0.05,
) -> list[dict[str, str]]:
    """Expand a super-level selection into elementary configurations.

    ``slots`` maps each super-function slot to its elementary functions and
    their candidate solutions. Per slot, any solution rated within epsilon
    of the slot's maximum is admissible; the result is the cartesian
    product, one solution per elementary function, in lexicographic order.
    """
    if epsilon < 0:
        raise ConsensusError("epsilon must be >= 0")
    missing = set(slots) - set(super_config)
    if missing:
        raise ConsensusError(f"selection does not cover slots: {sorted(missing)}")

    elem_functions: list[str] = []
    per_function: list[list[str]] = []
    for slot in slots:
        slot_solutions = [s for sols in slots[slot].values() for s in sols]
        slot_max = max(ratings[s] for s in slot_solutions)
        admissible = {s for s in slot_solutions if ratings[s] >= slot_max - epsilon - TOL}
        for func, sols in slots[slot].items():
            choices = sorted(s for s in sols if s in admissible)
            if not choices:
                raise ConsensusError(
                    f"no admissible solution for function {func!r} "
                    f"(inconsistent ratings in slot {slot!r})"
                )
            elem_functions.append(func)
            per_function.append(choices)

    expansions = [
        dict(zip(elem_functions, combo))
        for combo in itertools.product(*per_function)
    ]
    expansions.sort(key=lambda cfg: tuple(cfg[f] for f in sorted(cfg)))
    return expansions
