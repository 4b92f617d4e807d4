"""Model documents, result rendering, and block-diagonal reordering.

The document format is versioned YAML. All membership degrees are decimal
literals in [0, 1] (comma decimals from source tables are normalized to
dots). Relations may be written dense (rows/cols/entries) or sparse
(default + cells); internal relations additionally accept
``identity: true`` with optional cell overrides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Any

import numpy as np
import yaml

from .consensus import CoClusterOutcome, ConsensusError, Partition
from .fuzzy import FuzzyRelation
from .pipeline import (
    AgentSpec,
    Configuration,
    ConfigurationModel,
    ConfigurationResult,
    ConsensusSection,
    PipelineOptions,
    SolutionSpec,
    validate_model,
)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ParseIssue:
    message: str
    entity: str | None = None
    line: int | None = None

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.entity is not None:
            where.append(f"entity {self.entity}")
        prefix = f"[{', '.join(where)}] " if where else ""
        return prefix + self.message


class ModelParseError(ValueError):
    def __init__(self, issues: list[ParseIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


def _relation_from_node(node: Any, rows: list[str], cols: list[str], entity: str,
                        issues: list[ParseIssue]) -> FuzzyRelation | None:
    if not isinstance(node, dict):
        issues.append(ParseIssue("relation must be a mapping", entity))
        return None
    if node.get("identity"):
        arr = np.eye(len(rows))
        rel_rows, rel_cols = list(rows), list(cols)
    elif "entries" in node:
        rel_rows = list(node.get("rows", rows))
        rel_cols = list(node.get("cols", cols))
        arr = np.asarray(node["entries"], dtype=float)
        if arr.ndim != 2 or arr.shape != (len(rel_rows), len(rel_cols)):
            issues.append(
                ParseIssue(
                    f"entries shape {arr.shape} does not match "
                    f"{len(rel_rows)}x{len(rel_cols)}",
                    entity,
                )
            )
            return None
    else:
        default = float(node.get("default", 0.0))
        rel_rows, rel_cols = list(rows), list(cols)
        arr = np.full((len(rel_rows), len(rel_cols)), default)
    for cell in node.get("cells", node.get("overrides", [])):
        try:
            r, c, v = cell
            arr[rel_rows.index(r), rel_cols.index(c)] = float(v)
        except (ValueError, TypeError):
            issues.append(ParseIssue(f"bad cell {cell!r}", entity))
            return None
    return FuzzyRelation(tuple(rel_rows), tuple(rel_cols), arr)


def _agents(node: Any, entity: str, issues: list[ParseIssue]) -> list[AgentSpec]:
    out = []
    for item in node or []:
        if not isinstance(item, dict) or "id" not in item:
            issues.append(ParseIssue(f"agent entry needs an id: {item!r}", entity))
            continue
        out.append(
            AgentSpec(
                str(item["id"]),
                str(item.get("label", "")),
                tuple(item.get("roles", [])),
            )
        )
    return out


def parse_model(text: str, validate: bool = True) -> ConfigurationModel:
    """Parse a model document; raises ModelParseError with located issues.
    Never returns a partially-built model. With ``validate=False`` only
    structural problems are raised, so semantic checks can be reported
    separately."""
    issues: list[ParseIssue] = []
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = None
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise ModelParseError([ParseIssue(f"syntax error: {exc}", line=line)]) from None
    if not isinstance(doc, dict):
        raise ModelParseError([ParseIssue("document is not a mapping")])
    if doc.get("format_version") != FORMAT_VERSION:
        issues.append(
            ParseIssue(
                f"unsupported format_version {doc.get('format_version')!r}; "
                f"expected {FORMAT_VERSION}"
            )
        )

    communities = doc.get("communities") or {}
    if not communities:
        issues.append(ParseIssue("no communities"))
        raise ModelParseError(issues)

    requirements = _agents(communities.get("requirements"), "requirements", issues)
    functions = _agents(communities.get("functions"), "functions", issues)
    solutions: list[SolutionSpec] = []
    for item in communities.get("solutions") or []:
        if not isinstance(item, dict) or "id" not in item:
            issues.append(ParseIssue(f"solution entry needs an id: {item!r}", "solutions"))
            continue
        try:
            evaluation = float(item.get("evaluation", 0.0))
        except (TypeError, ValueError):
            issues.append(
                ParseIssue(
                    f"evaluation {item.get('evaluation')!r} is not a number",
                    str(item["id"]),
                )
            )
            continue
        solutions.append(
            SolutionSpec(
                str(item["id"]),
                str(item.get("label", "")),
                str(item.get("function", "")),
                evaluation,
            )
        )
    constraints = {
        str(domain): tuple(_agents(agents, f"constraints:{domain}", issues))
        for domain, agents in (communities.get("constraints") or {}).items()
    }

    req_ids = [a.id for a in requirements]
    func_ids = [a.id for a in functions]
    sol_ids = [s.id for s in solutions]

    relations = doc.get("relations") or {}
    rf = None
    if "requirements_functions" in relations:
        rf = _relation_from_node(
            relations["requirements_functions"], req_ids, func_ids,
            "requirements_functions", issues,
        )
    cs = {}
    for domain, node in (relations.get("constraints") or {}).items():
        agents = constraints.get(str(domain), ())
        rel = _relation_from_node(
            node, [a.id for a in agents], sol_ids, f"constraints:{domain}", issues
        )
        if rel is not None:
            cs[str(domain)] = rel

    internal = {}
    internal_node = doc.get("internal_relations") or {}
    for community, node in internal_node.items():
        community = str(community)
        if community == "constraints":
            for domain, sub in (node or {}).items():
                agents = constraints.get(str(domain), ())
                ids = [a.id for a in agents]
                rel = _relation_from_node(sub, ids, ids, f"internal:constraint:{domain}", issues)
                if rel is not None:
                    internal[f"constraint:{domain}"] = rel
            continue
        ids = {"requirements": req_ids, "functions": func_ids}.get(community)
        if ids is None:
            issues.append(ParseIssue(f"unknown community {community!r}", "internal_relations"))
            continue
        rel = _relation_from_node(node, ids, ids, f"internal:{community}", issues)
        if rel is not None:
            internal[community] = rel

    opts_node = doc.get("options") or {}
    try:
        sweep_order = opts_node.get("sweep_order")
        options = PipelineOptions(
            alpha=float(opts_node.get("alpha", 0.5)),
            epsilon=float(opts_node.get("epsilon", 0.05)),
            max_sweeps=int(opts_node.get("max_sweeps", 100)),
            generalized=bool(opts_node.get("generalized", False)),
            score=str(opts_node.get("score", "mean")),
            sweep_order=tuple(sweep_order) if sweep_order else None,
        )
    except (TypeError, ValueError, ConsensusError) as exc:
        issues.append(ParseIssue(f"bad options: {exc}", "options"))
        options = PipelineOptions()

    model = ConfigurationModel(
        requirements=tuple(requirements),
        functions=tuple(functions),
        solutions=tuple(solutions),
        constraints=constraints,
        rf=rf,
        cs=cs,
        internal=internal,
        options=options,
    )
    if validate:
        for problem in validate_model(model):
            issues.append(ParseIssue(problem))
    if issues:
        raise ModelParseError(issues)
    return model


def _relation_node(rel: FuzzyRelation) -> dict[str, Any]:
    return {
        "rows": list(rel.rows),
        "cols": list(rel.cols),
        "entries": [[float(v) for v in row] for row in rel.entries],
    }


def serialize_model(model: ConfigurationModel) -> str:
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "options": {
            "alpha": model.options.alpha,
            "epsilon": model.options.epsilon,
            "max_sweeps": model.options.max_sweeps,
            "generalized": model.options.generalized,
            "score": model.options.score,
        },
        "communities": {
            "requirements": [
                {"id": a.id, "label": a.label} for a in model.requirements
            ],
            "functions": [{"id": a.id, "label": a.label} for a in model.functions],
            "solutions": [
                {
                    "id": s.id,
                    "label": s.label,
                    "function": s.function,
                    "evaluation": float(s.evaluation),
                }
                for s in model.solutions
            ],
        },
    }
    if model.options.sweep_order:
        doc["options"]["sweep_order"] = list(model.options.sweep_order)
    if model.constraints:
        doc["communities"]["constraints"] = {
            d: [{"id": a.id, "label": a.label} for a in agents]
            for d, agents in model.constraints.items()
        }
    relations: dict[str, Any] = {}
    if model.rf is not None:
        relations["requirements_functions"] = _relation_node(model.rf)
    if model.cs:
        relations["constraints"] = {d: _relation_node(r) for d, r in model.cs.items()}
    if relations:
        doc["relations"] = relations
    if model.internal:
        internal: dict[str, Any] = {}
        for community, rel in model.internal.items():
            if community.startswith("constraint:"):
                internal.setdefault("constraints", {})[
                    community.split(":", 1)[1]
                ] = _relation_node(rel)
            else:
                internal[community] = _relation_node(rel)
        doc["internal_relations"] = internal
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def load_fixture(name: str) -> str:
    """Read a bundled fixture document ('conveyor' or 'conveyor_tie')."""
    return (
        resources.files("fuzzycfg.fixtures").joinpath(f"{name}.yaml").read_text("utf-8")
    )


def fixture_model(name: str) -> ConfigurationModel:
    return parse_model(load_fixture(name))


# --- result rendering -------------------------------------------------------


def render_result(result: ConfigurationResult, format: str = "table") -> str:
    if format == "structured":
        return json.dumps(result_to_dict(result), indent=2, sort_keys=True)
    if format != "table":
        raise ValueError(f"unknown format {format!r}")
    lines = ["Optimal configurations:"]
    for cfg in result.optimal_configurations:
        lines.append("  " + " ".join(cfg.solution_row()) + f"   (score {cfg.score:.6f})")
    consensus = result.consensus
    if consensus is None or consensus.outcome is None:
        lines.append("")
        lines.append("Consensus groups: omitted (single candidate configuration).")
    else:
        lines.append("")
        lines.append("Consensus groups:")
        for sols, cfgs in consensus.outcome.aligned():
            lines.append(
                "  configurations [" + " ".join(cfgs) + "] <- solutions ["
                + " ".join(sols) + "]"
            )
        lines.append("")
        lines.append("Candidate configurations:")
        for label in consensus.config_labels:
            cfg = consensus.configurations[label]
            lines.append(
                f"  {label}: " + " ".join(cfg.solution_row()) + f"   (score {cfg.score:.6f})"
            )
    return "\n".join(lines) + "\n"


def result_to_dict(result: ConfigurationResult) -> dict[str, Any]:
    out: dict[str, Any] = {
        "optimal_configurations": [
            {"selections": [list(p) for p in cfg.selections], "score": cfg.score}
            for cfg in result.optimal_configurations
        ],
        "ratings": dict(sorted(result.ratings.items())),
        "provenance": result.provenance,
    }
    consensus = result.consensus
    if consensus is not None and consensus.outcome is not None:
        out["consensus"] = {
            "labels": list(consensus.config_labels),
            "configurations": {
                label: {
                    "selections": [list(p) for p in cfg.selections],
                    "score": cfg.score,
                }
                for label, cfg in consensus.configurations.items()
            },
            "groups": [list(g) for g in consensus.outcome.config_partition.canonical()],
            "solution_assignment": dict(
                sorted(consensus.outcome.solution_assignment.items())
            ),
            "sweeps": consensus.outcome.sweeps,
            "converged": consensus.outcome.converged,
        }
        if consensus.affinity is not None:
            out["consensus"]["affinity"] = _relation_node(consensus.affinity)
    else:
        out["consensus"] = None
    return out


def result_from_dict(doc: dict[str, Any]) -> ConfigurationResult:
    def config(node) -> Configuration:
        return Configuration(
            tuple((slot, sol) for slot, sol in node["selections"]),
            float(node["score"]),
        )

    consensus = None
    node = doc.get("consensus")
    if node is not None:
        outcome = CoClusterOutcome(
            config_partition=Partition.of([set(g) for g in node["groups"]]),
            solution_assignment=dict(node["solution_assignment"]),
            sweeps=int(node["sweeps"]),
            converged=bool(node["converged"]),
        )
        affinity = None
        if "affinity" in node:
            rel = node["affinity"]
            affinity = FuzzyRelation(
                tuple(rel["rows"]), tuple(rel["cols"]), np.array(rel["entries"])
            )
        consensus = ConsensusSection(
            tuple(node["labels"]),
            {label: config(c) for label, c in node["configurations"].items()},
            outcome,
            affinity=affinity,
        )
    else:
        consensus = ConsensusSection((), {}, None)
    return ConfigurationResult(
        [config(c) for c in doc["optimal_configurations"]],
        {k: float(v) for k, v in doc["ratings"].items()},
        consensus,
        doc.get("provenance", {}),
    )


# --- block-diagonal layout --------------------------------------------------


@dataclass(frozen=True)
class BlockLayout:
    row_order: tuple[str, ...]
    col_order: tuple[str, ...]
    # one (row span, col span) per consensus group; half-open index ranges
    block_spans: tuple[tuple[tuple[int, int], tuple[int, int]], ...]


def reorder_blocks(mu: FuzzyRelation, consensus: CoClusterOutcome) -> BlockLayout:
    """Permute rows/cols so every consensus group is a contiguous diagonal
    block; groups are ordered by their smallest configuration id."""
    if set(mu.cols) != set(consensus.config_partition.agents):
        raise ConsensusError("partition does not cover the matrix columns")
    if set(mu.rows) != set(consensus.solution_assignment):
        raise ConsensusError("solution assignment does not cover the matrix rows")
    row_order: list[str] = []
    col_order: list[str] = []
    spans = []
    for sols, cfgs in consensus.aligned():
        r0, c0 = len(row_order), len(col_order)
        row_order.extend(sols)
        col_order.extend(cfgs)
        spans.append(((r0, len(row_order)), (c0, len(col_order))))
    return BlockLayout(tuple(row_order), tuple(col_order), tuple(spans))


def layout_matrix(mu: FuzzyRelation, layout: BlockLayout) -> np.ndarray:
    ridx = [mu.row_index(r) for r in layout.row_order]
    cidx = [mu.col_index(c) for c in layout.col_order]
    return mu.entries[np.ix_(ridx, cidx)]
