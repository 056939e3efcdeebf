"""Broadcast packet-erasure channels for the source and the relay.

A channel is a pair of joint reception distributions: the source PEC over
subsets of ``{d1, d2, r}`` and the relay PEC over subsets of ``{d1, d2}``.
Compatibility probabilities take one or more *terms*; each term is a
conjunction of literals (``"d1"`` or ``"~d1"``) and nodes a term does not
mention are don't-care.  A reception outcome is compatible with the query
when it satisfies at least one term.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import yaml

S_NODES = ("d1", "d2", "r")
R_NODES = ("d1", "d2")
NORM_TOL = 1e-12
MAX_REJECTIONS = 100_000


class ChannelError(ValueError):
    """Raised for malformed channel descriptions or queries."""


def _subsets(nodes: tuple[str, ...]) -> list[frozenset[str]]:
    out = []
    for k in range(len(nodes) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(nodes, k))
    return out


S_OUTCOMES = _subsets(S_NODES)
R_OUTCOMES = _subsets(R_NODES)


def subset_key(subset: Iterable[str]) -> str:
    """Document key of a reception subset: sorted, comma-joined, ``-`` if empty."""
    items = sorted(subset)
    return ",".join(items) if items else "-"


def parse_subset_key(key: str) -> frozenset[str]:
    key = key.strip()
    if key in ("-", ""):
        return frozenset()
    return frozenset(part.strip() for part in key.split(","))


Literal = tuple[str, bool]  # (node, received?)
Term = tuple[Literal, ...]


@dataclass(frozen=True)
class CompatQuery:
    sender: str
    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        if self.sender not in ("s", "r"):
            raise ChannelError(f"unknown sender {self.sender!r}")
        allowed = S_NODES if self.sender == "s" else R_NODES
        for term in self.terms:
            nodes = [node for node, _ in term]
            if len(set(nodes)) != len(nodes):
                raise ChannelError(f"repeated node in term {term}")
            for node in nodes:
                if node not in allowed:
                    raise ChannelError(f"literal {node!r} not allowed for sender {self.sender}")

    def matches(self, outcome: frozenset[str]) -> bool:
        return any(all((node in outcome) == want for node, want in term) for term in self.terms)

    @classmethod
    def parse(cls, sender: str, *terms: str) -> "CompatQuery":
        """Build a query from strings such as ``"d1 ~d2"``; one string per term."""
        parsed = []
        for text in terms:
            lits = []
            for tok in text.split():
                if tok.startswith(("~", "!", "-")):
                    lits.append((tok[1:], False))
                else:
                    lits.append((tok, True))
            parsed.append(tuple(lits))
        return cls(sender, tuple(parsed))


@dataclass(frozen=True)
class ChannelSpec:
    """Joint reception laws of the two PECs.

    ``s_joint`` maps every subset of ``{d1,d2,r}`` to its probability and
    ``r_joint`` every subset of ``{d1,d2}``.  Missing subsets are an error.
    """

    s_joint: Mapping[frozenset[str], float]
    r_joint: Mapping[frozenset[str], float]

    def __post_init__(self) -> None:
        for name, table, outcomes in (("s", self.s_joint, S_OUTCOMES), ("r", self.r_joint, R_OUTCOMES)):
            if set(table) != set(outcomes):
                missing = [subset_key(o) for o in outcomes if o not in table]
                extra = [subset_key(o) for o in table if o not in outcomes]
                raise ChannelError(f"{name}-PEC table: missing {missing} extra {extra}")
            vals = [float(table[o]) for o in outcomes]
            if any(v < 0 or not math.isfinite(v) for v in vals):
                raise ChannelError(f"{name}-PEC table has a negative or non-finite entry")
            if abs(math.fsum(vals) - 1.0) > NORM_TOL:
                raise ChannelError(f"{name}-PEC table sums to {math.fsum(vals)!r}, not 1")
        object.__setattr__(self, "s_joint", {o: float(self.s_joint[o]) for o in S_OUTCOMES})
        object.__setattr__(self, "r_joint", {o: float(self.r_joint[o]) for o in R_OUTCOMES})

    @classmethod
    def independent(cls, s_marg: Mapping[str, float] | tuple, r_marg: Mapping[str, float] | tuple) -> "ChannelSpec":
        """Expand per-receiver success probabilities into joint tables by products."""
        s_marg = dict(zip(S_NODES, s_marg)) if not isinstance(s_marg, Mapping) else dict(s_marg)
        r_marg = dict(zip(R_NODES, r_marg)) if not isinstance(r_marg, Mapping) else dict(r_marg)
        for marg, nodes in ((s_marg, S_NODES), (r_marg, R_NODES)):
            if set(marg) != set(nodes):
                raise ChannelError(f"marginals must name exactly {nodes}")
            for v in marg.values():
                if not 0.0 <= float(v) <= 1.0:
                    raise ChannelError(f"marginal {v!r} outside [0,1]")

        def expand(marg, outcomes, nodes):
            return {
                o: math.prod(float(marg[n]) if n in o else 1.0 - float(marg[n]) for n in nodes)
                for o in outcomes
            }

        return cls(expand(s_marg, S_OUTCOMES, S_NODES), expand(r_marg, R_OUTCOMES, R_NODES))

    def table(self, sender: str) -> Mapping[frozenset[str], float]:
        return self.s_joint if sender == "s" else self.r_joint

    def prob(self, q: CompatQuery) -> float:
        return math.fsum(p for o, p in self.table(q.sender).items() if q.matches(o))

    def p(self, sender: str, *terms: str) -> float:
        """Shorthand: ``ch.p("s", "d1 ~d2", "r")``."""
        return self.prob(CompatQuery.parse(sender, *terms))

    def exact(self, sender: str, received: Iterable[str]) -> float:
        """Probability that exactly ``received`` succeed."""
        return self.table(sender)[frozenset(received)]

    def marginal(self, sender: str, node: str) -> float:
        return self.p(sender, node)

    def to_document(self) -> dict:
        return {
            "joint": {
                "s": {subset_key(o): p for o, p in self.s_joint.items()},
                "r": {subset_key(o): p for o, p in self.r_joint.items()},
            }
        }


def compat_prob(ch: ChannelSpec, q: CompatQuery) -> float:
    return ch.prob(q)


ZERO_CHANNEL = ChannelSpec.independent((0.0, 0.0, 0.0), (0.0, 0.0))
EXAMPLE_CHANNEL = ChannelSpec.independent((0.15, 0.25, 0.8), (0.75, 0.85))


def channel_from_document(doc: Mapping) -> ChannelSpec:
    if not isinstance(doc, Mapping):
        raise ChannelError("channel document must be a mapping")
    if "joint" in doc:
        joint = doc["joint"]
        try:
            s = {parse_subset_key(k): float(v) for k, v in joint["s"].items()}
            r = {parse_subset_key(k): float(v) for k, v in joint["r"].items()}
        except (KeyError, TypeError, AttributeError) as exc:
            raise ChannelError(f"bad joint tables: {exc}") from exc
        return ChannelSpec(s, r)
    if "marginals" in doc:
        if not doc.get("independent", False):
            raise ChannelError("marginals require 'independent: true'")
        marg = doc["marginals"]
        try:
            return ChannelSpec.independent(
                {n: float(marg["s"][n]) for n in S_NODES},
                {n: float(marg["r"][n]) for n in R_NODES},
            )
        except (KeyError, TypeError) as exc:
            raise ChannelError(f"bad marginals: {exc}") from exc
    raise ChannelError("channel document needs 'joint' or 'marginals'")


def load_channel(source: str | Path | Mapping) -> ChannelSpec:
    """Load a channel from a YAML/JSON file path, a YAML string, or a mapping."""
    if isinstance(source, Mapping):
        return channel_from_document(source)
    path = Path(source)
    text = path.read_text() if path.exists() else str(source)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ChannelError(f"unparseable channel document: {exc}") from exc
    return channel_from_document(doc)


def is_strong_relaying(ch: ChannelSpec) -> bool:
    """Relay PEC strictly better than the source PEC on every destination pattern."""
    for term in ("d1 ~d2", "~d1 d2", "d1 d2"):
        if not ch.p("r", term) > ch.p("s", term):
            return False
    return True


def _random_spec(rng: np.random.Generator, mode: str) -> ChannelSpec:
    if mode == "uniform-independent":
        return ChannelSpec.independent(tuple(rng.uniform(size=3)), tuple(rng.uniform(size=2)))
    if mode == "dirichlet-joint":
        s = rng.dirichlet(np.ones(8))
        r = rng.dirichlet(np.ones(4))
        s = s / s.sum()
        r = r / r.sum()
        return ChannelSpec(dict(zip(S_OUTCOMES, s)), dict(zip(R_OUTCOMES, r)))
    raise ChannelError(f"unknown sampling mode {mode!r}")


def sample_channel(
    seed: int | np.random.Generator,
    mode: str = "uniform-independent",
    constraint: str = "none",
) -> ChannelSpec:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if constraint not in ("none", "strong-relaying"):
        raise ChannelError(f"unknown constraint {constraint!r}")
    for _ in range(MAX_REJECTIONS):
        ch = _random_spec(rng, mode)
        if constraint == "none" or is_strong_relaying(ch):
            return ch
    raise ChannelError("rejection budget exhausted")
