"""Shared fixtures: synthetic matrices, random models, and the brute-force
stability oracle used to cross-check the consensus engine."""

from __future__ import annotations

import random

import numpy as np
import pytest

from fuzzycfg.consensus import ConsensusParams, Partition
from fuzzycfg.fuzzy import FuzzyRelation
from fuzzycfg.pipeline import (
    AgentSpec,
    ConfigurationModel,
    PipelineOptions,
    SolutionSpec,
)


def square_relation(ids, entries) -> FuzzyRelation:
    return FuzzyRelation(tuple(ids), tuple(ids), np.asarray(entries, dtype=float))


def planted_block_matrix(sizes, within=0.9, cross=0.1):
    """Block-constant similarity with agents interleaved across blocks, so
    recovery cannot rely on the initial ordering."""
    n = sum(sizes)
    ids = [f"a{i:02d}" for i in range(n)]
    blocks: list[list[str]] = [[] for _ in sizes]
    remaining = list(sizes)
    b = 0
    for agent in ids:  # round-robin assignment interleaves the blocks
        while remaining[b % len(sizes)] == 0:
            b += 1
        blocks[b % len(sizes)].append(agent)
        remaining[b % len(sizes)] -= 1
        b += 1
    block_of = {a: j for j, members in enumerate(blocks) for a in members}
    arr = np.full((n, n), cross)
    for i, ai in enumerate(ids):
        for j, aj in enumerate(ids):
            if block_of[ai] == block_of[aj]:
                arr[i, j] = within
    return square_relation(ids, arr), [frozenset(m) for m in blocks]


def brute_force_scores(i, members, universe, mu: FuzzyRelation, alpha):
    """Independent re-derivation of (k1, k2, k) straight from the summation
    formulas, without going through the engine's scoring code."""
    k1_terms = [mu.at(i, g) for g in members]
    k2_terms = [1.0 - mu.at(i, g) for g in universe if g not in members]
    k1 = sum(k1_terms) / len(k1_terms) if k1_terms else 0.0
    k2 = sum(k2_terms) / len(k2_terms) if k2_terms else 1.0
    return k1, k2, alpha * k1 + (1 - alpha) * k2


def assert_locally_stable(partition: Partition, mu: FuzzyRelation, alpha, tol=1e-9):
    """No agent can strictly raise its own k by unilaterally joining any
    other group: enumerated move by move."""
    universe = sorted(partition.agents)
    for i in universe:
        own = partition.group_of(i)
        _, _, k_stay = brute_force_scores(i, sorted(own.members), universe, mu, alpha)
        for group in partition.groups:
            if group is own:
                continue
            target = sorted(set(group.members) | {i})
            _, _, k_move = brute_force_scores(i, target, universe, mu, alpha)
            assert k_move <= k_stay + tol, (
                f"agent {i} improves {k_stay} -> {k_move} by joining {target}"
            )


def random_model(rng: random.Random, with_internal=False, generalized=False,
                 epsilon=0.05) -> ConfigurationModel:
    """Small random model whose per-slot ratings sit on a 0.1 grid with a
    unique argmax per slot (gaps exceed the expansion window)."""
    n_func = rng.randint(2, 4)
    functions = tuple(AgentSpec(f"F{i+1}") for i in range(n_func))
    solutions = []
    sid = 0
    for f in functions:
        grid = [round(0.1 * v, 1) for v in range(1, 11)]
        values = rng.sample(grid, rng.randint(1, 3))
        for v in values:
            sid += 1
            solutions.append(SolutionSpec(f"S{sid:02d}", function=f.id, evaluation=v))
    requirements = tuple(AgentSpec(f"R{i+1}") for i in range(rng.randint(0, 3)))
    internal = {}
    if with_internal:
        internal["functions"] = FuzzyRelation.identity([f.id for f in functions])
        if requirements:
            internal["requirements"] = FuzzyRelation.identity(
                [r.id for r in requirements]
            )
    options = PipelineOptions(
        alpha=rng.choice([0.0, 0.5, 1.0]),
        epsilon=epsilon,
        generalized=generalized,
        score=rng.choice(["mean", "min"]),
    )
    return ConfigurationModel(
        requirements=requirements,
        functions=functions,
        solutions=tuple(solutions),
        internal=internal,
        options=options,
    )


@pytest.fixture
def params():
    return ConsensusParams()
