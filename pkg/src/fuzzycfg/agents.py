"""Communities of fuzzy agents: knowledge, mailboxes, and a deterministic
sweep scheduler.

Agents never run on their own threads here; the engine drives them in a
fixed token order so every run is reproducible. Roles and organizations are
carried as inert metadata.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .fuzzy import FuzzyRelation


class AgentError(ValueError):
    pass


class MessageKind(Enum):
    PARTITION_UPDATE = "partition-update"
    ASSIGNMENT_UPDATE = "assignment-update"
    RELATION_UPDATE = "relation-update"
    EVALUATION_SHARE = "evaluation-share"


# payload shape each kind must carry
_PAYLOAD_KEYS = {
    MessageKind.PARTITION_UPDATE: {"groups"},
    MessageKind.ASSIGNMENT_UPDATE: {"agent", "group"},
    MessageKind.RELATION_UPDATE: {"relation", "cells"},
    MessageKind.EVALUATION_SHARE: {"relation", "ratings"},
}


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: str
    payload: dict[str, Any]

    def well_formed(self) -> bool:
        return isinstance(self.payload, dict) and _PAYLOAD_KEYS[self.kind] <= set(
            self.payload
        )


@dataclass
class FuzzyAgent:
    id: str
    community: str
    label: str = ""
    roles: tuple[str, ...] = ()
    # knowledge: the agent's rows of every relation it takes part in,
    # plus the latest partition snapshot it has observed
    knowledge: dict[str, Any] = field(default_factory=dict)
    mailbox: deque[Message] = field(default_factory=deque)
    rejected: list[tuple[Message, str]] = field(default_factory=list)

    def deliver(self, message: Message) -> None:
        self.mailbox.append(message)

    def observe(self, message: Message | None = None) -> dict[str, Any]:
        """Consume one message (the given one, or the mailbox head) and fold
        it into knowledge. Malformed messages are rejected and logged."""
        if message is None:
            if not self.mailbox:
                raise AgentError(f"agent {self.id}: nothing to observe")
            message = self.mailbox.popleft()
        elif self.mailbox and self.mailbox[0] is message:
            self.mailbox.popleft()

        if not message.well_formed():
            self.rejected.append((message, "malformed payload"))
            return self.knowledge

        kind = message.kind
        if kind is MessageKind.PARTITION_UPDATE:
            self.knowledge["partition"] = message.payload["groups"]
        elif kind is MessageKind.ASSIGNMENT_UPDATE:
            assignments = self.knowledge.setdefault("assignments", {})
            assignments[message.payload["agent"]] = message.payload["group"]
        elif kind is MessageKind.RELATION_UPDATE:
            rel = self.knowledge.setdefault("relations", {}).setdefault(
                message.payload["relation"], {}
            )
            cells = message.payload["cells"]
            if not isinstance(cells, dict):
                self.rejected.append((message, "cells must be a mapping"))
                return self.knowledge
            rel.update(cells)
        elif kind is MessageKind.EVALUATION_SHARE:
            ratings = message.payload["ratings"]
            expected = message.payload.get("length")
            if expected is not None and len(ratings) != expected:
                self.rejected.append((message, "rating vector length mismatch"))
                return self.knowledge
            self.knowledge.setdefault("ratings", {})[
                message.payload["relation"]
            ] = list(ratings)
        return self.knowledge


@dataclass
class SweepSchedule:
    """Token-passing turn order; one cycle visits every agent exactly once."""

    order: list[str]
    cursor: int = 0

    def __post_init__(self) -> None:
        if len(set(self.order)) != len(self.order):
            raise AgentError("schedule order contains duplicates")

    def next_token(self) -> str:
        if not self.order:
            raise AgentError("empty schedule")
        holder = self.order[self.cursor]
        self.cursor = (self.cursor + 1) % len(self.order)
        return holder


@dataclass
class AgentSystem:
    agents: dict[str, FuzzyAgent] = field(default_factory=dict)
    # directed community pairs with an attached relation
    interactions: dict[tuple[str, str], FuzzyRelation] = field(default_factory=dict)
    organizations: dict[str, tuple[str, ...]] = field(default_factory=dict)
    declared_communities: set[str] = field(default_factory=set)

    def add(self, agent: FuzzyAgent) -> None:
        if agent.id in self.agents:
            raise AgentError(f"duplicate agent id {agent.id!r}")
        self.agents[agent.id] = agent
        self.declared_communities.add(agent.community)

    def community(self, name: str) -> list[FuzzyAgent]:
        if name not in self.declared_communities:
            raise AgentError(f"unknown community {name!r}")
        members = [a for a in self.agents.values() if a.community == name]
        return sorted(members, key=lambda a: a.id)

    def communities(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for a in sorted(self.agents.values(), key=lambda a: a.id):
            out.setdefault(a.community, []).append(a.id)
        return out

    def default_schedule(self, community: str | None = None) -> SweepSchedule:
        # lexicographic id order unless the model document overrides it
        ids = (
            sorted(self.agents)
            if community is None
            else [a.id for a in self.community(community)]
        )
        return SweepSchedule(ids)

    def broadcast(self, recipients: str, message: Message) -> int:
        """Deliver to a community or named organization, in schedule order."""
        if recipients in self.organizations:
            targets = [self.agents[i] for i in sorted(self.organizations[recipients])]
        else:
            targets = self.community(recipients)
        for agent in targets:
            agent.deliver(message)
        return len(targets)
