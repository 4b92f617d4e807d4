"""Four-phase product configuration: relation building, solution rating,
local optima, and consensus grouping, plus the generalized variant that
pre-clusters communities into super-agents.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .agents import AgentSystem, FuzzyAgent, Message, MessageKind
from .consensus import (
    CoClusterOutcome,
    ConsensusError,
    ConsensusParams,
    GeneralizationUnavailable,
    cluster_community,
    co_cluster,
    expand_configuration,
    seek_consensus,
)
from .fuzzy import FuzzyError, FuzzyRelation, TOL, validate_relation

REQUIREMENTS = "requirements"
FUNCTIONS = "functions"
SOLUTIONS = "solutions"


def constraint_community(domain: str) -> str:
    return f"constraint:{domain}"


class ModelValidationError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class UpdateRejected(ValueError):
    pass


@dataclass(frozen=True)
class AgentSpec:
    id: str
    label: str = ""
    roles: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolutionSpec:
    id: str
    label: str = ""
    function: str = ""
    evaluation: float = 0.0  # membership of the solution in its function slot


@dataclass(frozen=True)
class PipelineOptions:
    alpha: float = 0.5
    epsilon: float = 0.05
    max_sweeps: int = 100
    generalized: bool = False
    score: str = "mean"  # "mean" | "min"
    sweep_order: tuple[str, ...] | None = None

    def consensus_params(self) -> ConsensusParams:
        return ConsensusParams(alpha=self.alpha, max_sweeps=self.max_sweeps)


@dataclass(frozen=True)
class ConfigurationModel:
    requirements: tuple[AgentSpec, ...] = ()
    functions: tuple[AgentSpec, ...] = ()
    solutions: tuple[SolutionSpec, ...] = ()
    constraints: dict[str, tuple[AgentSpec, ...]] = field(default_factory=dict)
    rf: FuzzyRelation | None = None
    cs: dict[str, FuzzyRelation] = field(default_factory=dict)
    internal: dict[str, FuzzyRelation] = field(default_factory=dict)
    options: PipelineOptions = PipelineOptions()

    def function_ids(self) -> list[str]:
        return [f.id for f in self.functions]

    def solution_ids(self) -> list[str]:
        return [s.id for s in self.solutions]

    def slot_solutions(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {f.id: [] for f in self.functions}
        for s in self.solutions:
            out.setdefault(s.function, []).append(s.id)
        return out


def validate_model(model: ConfigurationModel) -> list[str]:
    problems: list[str] = []
    all_ids: set[str] = set()

    def check_ids(specs, community):
        for spec in specs:
            if spec.id in all_ids:
                problems.append(f"{community}: duplicate agent id {spec.id!r}")
            all_ids.add(spec.id)

    check_ids(model.requirements, REQUIREMENTS)
    check_ids(model.functions, FUNCTIONS)
    check_ids(model.solutions, SOLUTIONS)
    for domain, agents in model.constraints.items():
        check_ids(agents, constraint_community(domain))

    if not (model.functions or model.requirements or model.solutions):
        problems.append("no communities declared")

    function_ids = set(model.function_ids())
    for s in model.solutions:
        if s.function not in function_ids:
            problems.append(f"solution {s.id!r}: unknown function slot {s.function!r}")
        if not (0.0 <= s.evaluation <= 1.0):
            problems.append(
                f"solution {s.id!r}: evaluation {s.evaluation} outside [0, 1]"
            )
    for f, sols in model.slot_solutions().items():
        if f in function_ids and not sols:
            problems.append(f"function {f!r} has no solutions")

    def check_relation(name, rel, rows, cols):
        for v in validate_relation(rel):
            problems.append(f"{name}: {v}")
        if set(rel.rows) != set(rows):
            problems.append(f"{name}: row ids do not match the declared agents")
        if set(rel.cols) != set(cols):
            problems.append(f"{name}: column ids do not match the declared agents")

    if model.rf is not None:
        check_relation(
            "requirements_functions",
            model.rf,
            [r.id for r in model.requirements],
            model.function_ids(),
        )
    for domain, rel in model.cs.items():
        agents = model.constraints.get(domain)
        if agents is None:
            problems.append(f"constraint relation for undeclared domain {domain!r}")
            continue
        check_relation(
            f"constraints:{domain}", rel, [a.id for a in agents], model.solution_ids()
        )
    community_ids = {
        REQUIREMENTS: [r.id for r in model.requirements],
        FUNCTIONS: model.function_ids(),
        **{
            constraint_community(d): [a.id for a in agents]
            for d, agents in model.constraints.items()
        },
    }
    for community, rel in model.internal.items():
        ids = community_ids.get(community)
        if ids is None:
            problems.append(f"internal relation for unknown community {community!r}")
            continue
        check_relation(f"internal:{community}", rel, ids, ids)
    return problems


# --- phase 1: relation building -------------------------------------------


@dataclass(frozen=True)
class Level:
    """One granularity at which phases 1-3 run: elementary agents, or
    super-agents after community clustering. Each slot maps its elementary
    functions to their candidate solutions."""

    slot_order: tuple[str, ...]
    slots: dict[str, dict[str, list[str]]]
    fs: FuzzyRelation
    rf: FuzzyRelation | None
    cs: dict[str, FuzzyRelation]

    def own_slot(self, solution_id: str) -> str:
        for slot, funcs in self.slots.items():
            if any(solution_id in sols for sols in funcs.values()):
                return slot
        raise ConsensusError(f"solution {solution_id!r} has no slot")


def functions_solutions_matrix(model: ConfigurationModel) -> FuzzyRelation:
    rows = tuple(model.function_ids())
    cols = tuple(model.solution_ids())
    arr = np.zeros((len(rows), len(cols)))
    for j, s in enumerate(model.solutions):
        arr[rows.index(s.function), j] = s.evaluation
    return FuzzyRelation(rows, cols, arr)


def elementary_level(model: ConfigurationModel) -> Level:
    slots = {f: {f: sols} for f, sols in model.slot_solutions().items()}
    return Level(
        slot_order=tuple(model.function_ids()),
        slots=slots,
        fs=functions_solutions_matrix(model),
        rf=model.rf,
        cs=dict(model.cs),
    )


def build_relations(model: ConfigurationModel) -> dict[str, FuzzyRelation]:
    """Declared relations plus the composed requirements-to-solutions one."""
    from .fuzzy import compose_max_min

    problems = validate_model(model)
    if problems:
        raise ModelValidationError(problems)
    out = {"functions_solutions": functions_solutions_matrix(model)}
    if model.rf is not None:
        out["requirements_functions"] = model.rf
        out["requirements_solutions"] = compose_max_min(
            model.rf, out["functions_solutions"]
        )
    for domain, rel in model.cs.items():
        out[f"constraints:{domain}"] = rel
    return out


# --- phase 2: solution rating ---------------------------------------------


def evaluate_solutions(level: Level) -> dict[str, float]:
    """Rating = min(slot membership, slot relevance, constraint fit)."""
    relevance = {slot: 1.0 for slot in level.slots}
    if level.rf is not None:
        for slot in level.slots:
            col = level.rf.col_index(slot)
            relevance[slot] = float(level.rf.entries[:, col].max())
    ratings: dict[str, float] = {}
    for slot, funcs in level.slots.items():
        for sols in funcs.values():
            for s in sols:
                r = min(level.fs.at(slot, s), relevance[slot])
                for rel in level.cs.values():
                    col = rel.col_index(s)
                    if rel.entries.shape[0]:
                        r = min(r, float(rel.entries[:, col].min()))
                ratings[s] = r
    return ratings


# --- phase 3: local optima and scoring ------------------------------------


@dataclass(frozen=True)
class Configuration:
    """One selected solution per slot, with its global fuzzy score."""

    selections: tuple[tuple[str, str], ...]  # (slot, solution) in slot order
    score: float

    def selection_map(self) -> dict[str, str]:
        return dict(self.selections)

    def solution_row(self) -> tuple[str, ...]:
        return tuple(sol for _, sol in self.selections)


def _argmax_solution(candidates: list[str], ratings: dict[str, float]) -> str:
    best = max(ratings[s] for s in candidates)
    return min(s for s in candidates if ratings[s] >= best - TOL)


def slot_selection(
    level: Level, ratings: dict[str, float], fixed: dict[str, str] | None = None
) -> dict[str, str]:
    fixed = fixed or {}
    out = {}
    for slot in level.slot_order:
        if slot in fixed:
            out[slot] = fixed[slot]
            continue
        candidates = [s for sols in level.slots[slot].values() for s in sols]
        out[slot] = _argmax_solution(candidates, ratings)
    return out


def score_selection(
    selection: dict[str, str], ratings: dict[str, float], aggregator: str = "mean"
) -> float:
    values = [ratings[s] for s in selection.values()]
    if aggregator == "min":
        return float(min(values))
    if aggregator == "mean":
        return float(np.mean(values))
    raise ConsensusError(f"unknown score aggregator {aggregator!r}")


def local_optimum(
    solution_id: str, level: Level, ratings: dict[str, float], aggregator: str = "mean"
) -> Configuration:
    """The configuration this solution prefers: itself in its own slot,
    argmax-rated solutions everywhere else."""
    own = level.own_slot(solution_id)
    selection = slot_selection(level, ratings, fixed={own: solution_id})
    ordered = tuple((slot, selection[slot]) for slot in level.slot_order)
    return Configuration(ordered, score_selection(selection, ratings, aggregator))


def solution_config_affinity(
    solution_id: str, config: Configuration, local_opts: dict[str, Configuration]
) -> float:
    """Fraction of slots on which the configuration agrees with the
    solution's own local optimum."""
    mine = local_opts[solution_id].selection_map()
    theirs = config.selection_map()
    if not mine:
        return 1.0
    agree = sum(1 for slot, sol in mine.items() if theirs.get(slot) == sol)
    return agree / len(mine)


# --- phase 4 + orchestration ----------------------------------------------


@dataclass
class ConsensusSection:
    config_labels: tuple[str, ...]
    configurations: dict[str, Configuration]
    outcome: CoClusterOutcome | None
    # solution-vs-candidate affinity matrix the grouping ran on; kept for
    # block-diagonal visualization
    affinity: FuzzyRelation | None = None


@dataclass
class ConfigurationResult:
    optimal_configurations: list[Configuration]
    ratings: dict[str, float]
    consensus: ConsensusSection | None
    provenance: dict[str, Any]

    def core(self) -> Any:
        """Everything except provenance, for equality checks."""
        consensus = None
        if self.consensus is not None:
            consensus = (
                self.consensus.config_labels,
                tuple(sorted(self.consensus.configurations.items())),
                self.consensus.outcome.config_partition.canonical()
                if self.consensus.outcome
                else None,
                tuple(sorted(self.consensus.outcome.solution_assignment.items()))
                if self.consensus.outcome
                else None,
            )
        return (
            tuple(self.optimal_configurations),
            tuple(sorted(self.ratings.items())),
            consensus,
        )


def generalized_level(
    model: ConfigurationModel, params: ConsensusParams
) -> tuple[Level, dict[str, Any]]:
    """Cluster the requirement, function and constraint communities into
    super-agents and lift every relation by member averaging. Communities
    with missing or malformed internal relations fall back to elementary
    agents; the fallbacks are reported alongside the level."""
    notes: dict[str, Any] = {"fallbacks": [], "super_agents": {}}
    fs = functions_solutions_matrix(model)

    def try_cluster(community, ids, inter):
        rel = model.internal.get(community)
        if rel is None:
            notes["fallbacks"].append(f"{community}: no internal relation")
            return None
        try:
            supers = cluster_community(ids, rel, inter, params)
        except GeneralizationUnavailable as exc:
            notes["fallbacks"].append(f"{community}: {exc}")
            return None
        notes["super_agents"][community] = [
            {"id": s.id, "members": list(s.members)} for s in supers
        ]
        return supers

    req_ids = [r.id for r in model.requirements]
    func_ids = model.function_ids()
    req_supers = try_cluster(
        REQUIREMENTS, req_ids, {"rf": model.rf} if model.rf is not None else {}
    )
    func_supers = try_cluster(FUNCTIONS, func_ids, {"fs": fs})

    # lift R x F: averaged over member rows (requirement side) and member
    # columns (function side)
    rf = model.rf
    if rf is not None and req_supers is not None:
        rows = tuple(s.id for s in req_supers)
        rf = FuzzyRelation(rows, rf.cols, np.array([s.lifted_knowledge["rf"] for s in req_supers]))

    slot_groups: list[tuple[str, tuple[str, ...]]]
    if func_supers is not None:
        slot_groups = [(s.id, s.members) for s in func_supers]
    else:
        slot_groups = [(f, (f,)) for f in func_ids]
    # order super-slots by their first member in declared function order
    order_index = {f: i for i, f in enumerate(func_ids)}
    slot_groups.sort(key=lambda sg: min(order_index[m] for m in sg[1]))

    slot_sols = model.slot_solutions()
    slots = {
        sid: {f: list(slot_sols[f]) for f in sorted(members, key=order_index.get)}
        for sid, members in slot_groups
    }
    slot_order = tuple(sid for sid, _ in slot_groups)

    fs_rows = np.array(
        [fs.entries[[fs.row_index(f) for f in members]].mean(axis=0) for _, members in slot_groups]
    )
    level_fs = FuzzyRelation(slot_order, fs.cols, fs_rows)
    if rf is not None and func_supers is not None:
        cols_idx = [[rf.col_index(f) for f in members] for _, members in slot_groups]
        lifted = np.array([rf.entries[:, idx].mean(axis=1) for idx in cols_idx]).T
        rf = FuzzyRelation(rf.rows, slot_order, lifted)
    elif rf is not None:
        rf = FuzzyRelation(rf.rows, slot_order, rf.entries[:, [rf.col_index(f) for f in slot_order]])

    cs: dict[str, FuzzyRelation] = {}
    for domain, rel in model.cs.items():
        community = constraint_community(domain)
        supers = try_cluster(community, [a.id for a in model.constraints[domain]], {"cs": rel})
        if supers is not None:
            rows = tuple(s.id for s in supers)
            cs[domain] = FuzzyRelation(
                rows, rel.cols, np.array([s.lifted_knowledge["cs"] for s in supers])
            )
        else:
            cs[domain] = rel

    level = Level(slot_order=slot_order, slots=slots, fs=level_fs, rf=rf, cs=cs)
    return level, notes


def _emit(callback, kind: str, **payload) -> None:
    if callback is not None:
        callback(kind, payload)


def run_configuration(model: ConfigurationModel, emit=None) -> ConfigurationResult:
    """Run the full pipeline on a model snapshot.

    ``emit(kind, payload)`` receives phase/sweep progress events; the result
    is a pure function of the model.
    """
    problems = validate_model(model)
    if problems:
        raise ModelValidationError(problems)
    opts = model.options
    params = opts.consensus_params()
    provenance: dict[str, Any] = {
        "options": {
            "alpha": opts.alpha,
            "epsilon": opts.epsilon,
            "max_sweeps": opts.max_sweeps,
            "generalized": opts.generalized,
            "score": opts.score,
        },
        "mode": "generalized" if opts.generalized else "elementary",
    }

    _emit(emit, "phase-started", phase=1)
    if opts.generalized:
        level, notes = generalized_level(model, params)
        provenance["generalization"] = notes
        # expansion back to elementary configurations is only needed when
        # some community actually merged; all-singleton clustering leaves
        # the elementary structure untouched
        generalization_active = any(
            len(s["members"]) > 1
            for supers in notes["super_agents"].values()
            for s in supers
        )
        if not notes["super_agents"]:
            level = elementary_level(model)
            provenance["mode"] = "elementary"
    else:
        level = elementary_level(model)
        generalization_active = False
    system = as_agent_system(model)
    share_evaluations(system, level)
    _emit(emit, "phase-finished", phase=1)

    _emit(emit, "phase-started", phase=2)
    ratings = evaluate_solutions(level)
    _emit(emit, "phase-finished", phase=2)

    _emit(emit, "phase-started", phase=3)
    solution_ids = model.solution_ids()
    local_opts = {
        s: local_optimum(s, level, ratings, opts.score) for s in solution_ids
    }
    candidates: list[Configuration] = []
    for s in solution_ids:
        cfg = local_opts[s]
        if cfg not in candidates:
            candidates.append(cfg)
    candidates.sort(key=lambda c: c.solution_row())
    best = max(c.score for c in candidates)
    optimal = [c for c in candidates if c.score >= best - TOL]

    if generalization_active:
        expanded: list[dict[str, str]] = []
        for cfg in optimal:
            for elem in expand_configuration(
                cfg.selection_map(), level.slots, ratings, opts.epsilon
            ):
                if elem not in expanded:
                    expanded.append(elem)
        elem_order = model.function_ids()
        optimal = [
            Configuration(
                tuple((f, sel[f]) for f in elem_order),
                score_selection(sel, ratings, opts.score),
            )
            for sel in expanded
        ]
        optimal.sort(key=lambda c: c.solution_row())
    _emit(emit, "phase-finished", phase=3)

    _emit(emit, "phase-started", phase=4)
    consensus = None
    if len(candidates) > 1:
        labels = tuple(f"G{j + 1}" for j in range(len(candidates)))
        by_label = dict(zip(labels, candidates))
        arr = np.array(
            [
                [solution_config_affinity(s, c, local_opts) for c in candidates]
                for s in solution_ids
            ]
        )
        mu = FuzzyRelation(tuple(solution_ids), labels, arr)
        outcome = co_cluster(solution_ids, list(labels), mu, params)
        _emit(
            emit,
            "partition-changed",
            groups=outcome.config_partition.canonical(),
            converged=outcome.converged,
        )
        provenance["consensus_sweeps"] = outcome.sweeps
        provenance["consensus_converged"] = outcome.converged
        consensus = ConsensusSection(labels, by_label, outcome, affinity=mu)
    else:
        consensus = ConsensusSection((), {}, None)
        provenance["consensus_note"] = "single candidate configuration; nothing to group"
    _emit(emit, "phase-finished", phase=4)

    return ConfigurationResult(optimal, ratings, consensus, provenance)


def as_agent_system(model: ConfigurationModel) -> AgentSystem:
    """Materialize the model as communities of fuzzy agents with the
    declared relations attached as interactions."""
    system = AgentSystem()
    for r in model.requirements:
        system.add(FuzzyAgent(r.id, REQUIREMENTS, r.label, r.roles))
    for f in model.functions:
        system.add(FuzzyAgent(f.id, FUNCTIONS, f.label, f.roles))
    for s in model.solutions:
        system.add(FuzzyAgent(s.id, SOLUTIONS, s.label))
    for domain, agents in model.constraints.items():
        for a in agents:
            system.add(FuzzyAgent(a.id, constraint_community(domain), a.label, a.roles))
    fs = functions_solutions_matrix(model)
    system.interactions[(FUNCTIONS, SOLUTIONS)] = fs
    if model.rf is not None:
        system.interactions[(REQUIREMENTS, FUNCTIONS)] = model.rf
    for domain, rel in model.cs.items():
        system.interactions[(constraint_community(domain), SOLUTIONS)] = rel
    return system


def share_evaluations(system: AgentSystem, level: Level) -> int:
    """Phase-1 diffusion: each community broadcasts its relation rows to
    the community it evaluates."""
    delivered = 0
    for (src, dst), rel in sorted(system.interactions.items()):
        msg = Message(
            MessageKind.EVALUATION_SHARE,
            sender=src,
            payload={
                "relation": f"{src}->{dst}",
                "ratings": rel.entries.tolist(),
                "length": len(rel.rows),
            },
        )
        delivered += system.broadcast(dst, msg)
    return delivered


# --- incremental updates ---------------------------------------------------


@dataclass(frozen=True)
class CellEdit:
    relation: str  # "functions_solutions" | "requirements_functions"
    #               | "constraints:<domain>" | "internal:<community>"
    row: str
    col: str
    value: float


@dataclass(frozen=True)
class AddSolution:
    id: str
    function: str
    evaluation: float
    label: str = ""


@dataclass(frozen=True)
class RemoveAgent:
    id: str


@dataclass(frozen=True)
class OptionChange:
    name: str
    value: Any


Update = CellEdit | AddSolution | RemoveAgent | OptionChange


def apply_update(model: ConfigurationModel, update: Update) -> ConfigurationModel:
    """Apply one update, returning the new model. Updates with dangling
    references are rejected and leave the model untouched. The result of a
    recompute equals a fresh run on the updated model."""
    if isinstance(update, CellEdit):
        return _apply_cell_edit(model, update)
    if isinstance(update, AddSolution):
        if update.id in set(model.solution_ids()) | {f.id for f in model.functions} | {
            r.id for r in model.requirements
        }:
            raise UpdateRejected(f"agent id {update.id!r} already exists")
        if update.function not in set(model.function_ids()):
            raise UpdateRejected(f"unknown function slot {update.function!r}")
        if not (0.0 <= update.evaluation <= 1.0):
            raise UpdateRejected(f"evaluation {update.evaluation} outside [0, 1]")
        for domain in model.cs:
            raise UpdateRejected(
                f"cannot add a solution while constraint relation {domain!r} "
                "pins the solution axis"
            )
        return replace(
            model,
            solutions=model.solutions
            + (SolutionSpec(update.id, update.label, update.function, update.evaluation),),
        )
    if isinstance(update, RemoveAgent):
        return _apply_remove(model, update.id)
    if isinstance(update, OptionChange):
        if update.name not in PipelineOptions.__dataclass_fields__:
            raise UpdateRejected(f"unknown option {update.name!r}")
        try:
            opts = replace(model.options, **{update.name: update.value})
            opts.consensus_params()
        except (TypeError, ConsensusError) as exc:
            raise UpdateRejected(str(exc)) from None
        return replace(model, options=opts)
    raise UpdateRejected(f"unknown update type {type(update).__name__}")


def _apply_cell_edit(model: ConfigurationModel, edit: CellEdit) -> ConfigurationModel:
    try:
        value = float(edit.value)
    except (TypeError, ValueError):
        raise UpdateRejected(f"value {edit.value!r} is not a number") from None
    if not (0.0 <= value <= 1.0):
        raise UpdateRejected(f"value {value} outside [0, 1]")
    if edit.relation == "functions_solutions":
        for idx, s in enumerate(model.solutions):
            if s.id == edit.col:
                if s.function != edit.row:
                    raise UpdateRejected(
                        f"solution {s.id!r} belongs to slot {s.function!r}; "
                        "cells outside the slot are fixed at 0"
                    )
                sols = list(model.solutions)
                sols[idx] = replace(s, evaluation=value)
                return replace(model, solutions=tuple(sols))
        raise UpdateRejected(f"unknown solution {edit.col!r}")
    if edit.relation == "requirements_functions":
        if model.rf is None:
            raise UpdateRejected("model declares no requirements_functions relation")
        try:
            return replace(model, rf=model.rf.with_entry(edit.row, edit.col, value))
        except FuzzyError as exc:
            raise UpdateRejected(str(exc)) from None
    kind, _, name = edit.relation.partition(":")
    if kind == "constraints" and name:
        rel = model.cs.get(name)
        if rel is None:
            raise UpdateRejected(f"unknown constraint domain {name!r}")
        try:
            cs = dict(model.cs)
            cs[name] = rel.with_entry(edit.row, edit.col, value)
            return replace(model, cs=cs)
        except FuzzyError as exc:
            raise UpdateRejected(str(exc)) from None
    if kind == "internal" and name:
        rel = model.internal.get(name)
        if rel is None:
            raise UpdateRejected(f"no internal relation for community {name!r}")
        try:
            internal = dict(model.internal)
            internal[name] = rel.with_entry(edit.row, edit.col, value)
            return replace(model, internal=internal)
        except FuzzyError as exc:
            raise UpdateRejected(str(exc)) from None
    raise UpdateRejected(f"unknown relation {edit.relation!r}")


def _apply_remove(model: ConfigurationModel, agent_id: str) -> ConfigurationModel:
    referenced = []
    if model.rf is not None and (agent_id in model.rf.rows or agent_id in model.rf.cols):
        referenced.append("requirements_functions")
    for domain, rel in model.cs.items():
        if agent_id in rel.rows or agent_id in rel.cols:
            referenced.append(f"constraints:{domain}")
    for community, rel in model.internal.items():
        if agent_id in rel.rows:
            referenced.append(f"internal:{community}")
    if referenced:
        raise UpdateRejected(
            f"agent {agent_id!r} is referenced by: {', '.join(referenced)}"
        )
    if any(f.id == agent_id for f in model.functions):
        if any(s.function == agent_id for s in model.solutions):
            raise UpdateRejected(f"function {agent_id!r} still has solutions")
        return replace(
            model, functions=tuple(f for f in model.functions if f.id != agent_id)
        )
    if any(s.id == agent_id for s in model.solutions):
        remaining = tuple(s for s in model.solutions if s.id != agent_id)
        removed = next(s for s in model.solutions if s.id == agent_id)
        if not any(s.function == removed.function for s in remaining):
            raise UpdateRejected(
                f"removing {agent_id!r} would empty slot {removed.function!r}"
            )
        return replace(model, solutions=remaining)
    if any(r.id == agent_id for r in model.requirements):
        return replace(
            model, requirements=tuple(r for r in model.requirements if r.id != agent_id)
        )
    for domain, agents in model.constraints.items():
        if any(a.id == agent_id for a in agents):
            constraints = dict(model.constraints)
            constraints[domain] = tuple(a for a in agents if a.id != agent_id)
            return replace(model, constraints=constraints)
    raise UpdateRejected(f"unknown agent {agent_id!r}")
