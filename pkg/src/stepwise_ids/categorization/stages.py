"""Stage definitions of the step-wise cascade, their routing and the stage file format.

A cascade is an ordered list of binary stages.  Each stage is trained on the
records whose label is in its ``population`` and marks ``positives`` as 1.
Routing is implied by the populations: a branch that covers one label is a
terminal emitting that label; a branch covering several labels leads to the
stage whose population is exactly that set.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..dataset.core import Dataset
from ..dataset.labels import CAT1, AttackLabel, by_count, parse_labels
from ..errors import InvalidCascade, MissingClass

Branch = Union[str, AttackLabel]  # a stage id or a terminal label


@dataclass(frozen=True)
class StageSpec:
    stage_id: str
    population: frozenset
    positives: frozenset
    features: Optional[tuple] = None  # source feature names; None uses the cascade-wide subset
    drop_constant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "population", frozenset(self.population))
        object.__setattr__(self, "positives", frozenset(self.positives))
        if self.features is not None:
            object.__setattr__(self, "features", tuple(self.features))

    @property
    def negatives(self) -> frozenset:
        return self.population - self.positives

    def with_features(self, features) -> "StageSpec":
        return replace(self, features=None if features is None else tuple(features))


@dataclass(frozen=True)
class Routing:
    """Where each stage sends its Positive and Negative records."""

    root: str
    on_positive: dict = field(default_factory=dict)
    on_negative: dict = field(default_factory=dict)

    def terminals(self) -> list:
        return [b for m in (self.on_positive, self.on_negative) for b in m.values()
                if isinstance(b, AttackLabel)]


def _branch(labels: frozenset, by_population: dict, stage_id: str, side: str) -> Branch:
    if len(labels) == 1:
        return next(iter(labels))
    if labels not in by_population:
        names = ", ".join(sorted(str(l) for l in labels))
        raise InvalidCascade(f"stage {stage_id}: no stage handles the {side} branch {{{names}}}")
    return by_population[labels]


def resolve_routing(specs) -> Routing:
    """Validate ``specs`` and derive the routing tree; raises InvalidCascade."""
    specs = list(specs)
    if not specs:
        raise InvalidCascade("a cascade needs at least one stage")
    by_population = {}
    for s in specs:
        if not s.positives or not s.negatives:
            raise InvalidCascade(f"stage {s.stage_id}: positive and negative sets must both be nonempty")
        if not s.positives <= s.population:
            raise InvalidCascade(f"stage {s.stage_id}: positives are not a subset of the population")
        if s.population in by_population:
            raise InvalidCascade(f"stages {by_population[s.population]} and {s.stage_id} share a population")
        by_population[s.population] = s.stage_id
    ids = [s.stage_id for s in specs]
    if len(set(ids)) != len(ids):
        raise InvalidCascade("duplicate stage ids")

    root = specs[0]
    on_pos, on_neg = {}, {}
    for s in specs:
        on_pos[s.stage_id] = _branch(s.positives, by_population, s.stage_id, "positive")
        on_neg[s.stage_id] = _branch(s.negatives, by_population, s.stage_id, "negative")

    # every non-root stage must be reached from exactly one branch
    parents = {}
    for sid in ids:
        for child in (on_pos[sid], on_neg[sid]):
            if isinstance(child, str):
                parents.setdefault(child, []).append(sid)
    for s in specs[1:]:
        if len(parents.get(s.stage_id, [])) != 1:
            raise InvalidCascade(f"stage {s.stage_id} is not reachable from stage {root.stage_id}")
    if root.stage_id in parents:
        raise InvalidCascade(f"the first stage {root.stage_id} must be the root")

    routing = Routing(root.stage_id, on_pos, on_neg)
    emitted = routing.terminals()
    if sorted(emitted) != sorted(root.population) or len(set(emitted)) != len(emitted):
        raise InvalidCascade("terminal branches must emit every label in scope exactly once")
    return routing


def _chain(groups, population, prefix, counter_start, specs, inner=False):
    """Append stages separating ``groups`` one at a time, each against the rest."""
    n = counter_start
    for i, group in enumerate(groups[:-1]):
        if inner:
            sid = f"{prefix}{chr(ord('b') + i)}"
        else:
            sid = str(n)
            n += 1
        specs.append(StageSpec(sid, population, frozenset(group),
                               drop_constant=inner and i == 0))
        if len(group) > 1:
            _chain([[m] for m in group], frozenset(group), sid, 0, specs, inner=True)
        population = population - frozenset(group)
    last = groups[-1]
    if len(last) > 1:
        # a multi-label tail group still needs its own stages
        _chain([[m] for m in last], frozenset(last), prefix or str(n), 0, specs, inner=True)
    return n


def default_groups(counts: dict) -> list:
    """Attack groups in stage order: Cat.1 kept together, everything else alone.

    Groups are ordered by the training count of their largest member; members
    inside a group by their own count.
    """
    attacks = [l for l in counts if l.is_attack and counts[l] > 0]
    cat1 = by_count([l for l in attacks if l in CAT1], counts)
    groups = [[l] for l in attacks if l not in CAT1]
    if cat1:
        groups.append(cat1)
    groups.sort(key=lambda g: (-max(counts[l] for l in g), min(l.code for l in g)))
    return groups


def build_default_cascade_spec(train: Dataset, groups=None) -> list:
    """Stage 1 splits Normal from all attacks; then one attack group per stage.

    With the UNSW-NB15 counts this gives stages 1, 2 (Generic), 3 (Cat.1) with
    3b (Exploits, constant features dropped), 3c (DoS) and 3d (Analysis vs
    Backdoor), 4 (Reconnaissance) and 5 (Shellcode vs Worm).
    """
    present = train.label_set()
    if AttackLabel.NORMAL not in present:
        raise MissingClass("the cascade needs Normal training records")
    counts = {l: int((train.attack_labels == l.code).sum()) for l in present}
    if groups is None:
        groups = default_groups(counts)
    else:
        groups = [by_count(parse_labels(g), counts) for g in groups]
    if not groups:
        raise MissingClass("the cascade needs at least one attack class in training")
    attacks = frozenset(l for g in groups for l in g)
    specs = [StageSpec("1", attacks | {AttackLabel.NORMAL}, attacks)]
    _chain(groups, attacks, "", 2, specs)
    return specs


# spec file: one INI section per stage, in routing order
#
#   [stage 3b]
#   population = DoS, Exploits, Analysis, Backdoor
#   positive = Exploits
#   drop_constant = yes
#   features = sbytes, dbytes        (optional)


def format_cascade_spec(specs) -> str:
    parser = configparser.ConfigParser()
    for s in specs:
        section = {
            "population": ", ".join(str(l) for l in sorted(s.population)),
            "positive": ", ".join(str(l) for l in sorted(s.positives)),
            "drop_constant": "yes" if s.drop_constant else "no",
        }
        if s.features is not None:
            section["features"] = ", ".join(s.features)
        parser[f"stage {s.stage_id}"] = section
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse_cascade_spec(text: str) -> list:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidCascade(f"unreadable cascade spec: {exc}") from None
    specs = []
    for name in parser.sections():
        if not name.lower().startswith("stage "):
            raise InvalidCascade(f"unexpected section [{name}]")
        sec = parser[name]
        try:
            population = parse_labels(sec["population"])
            positives = parse_labels(sec["positive"])
        except KeyError as exc:
            raise InvalidCascade(f"[{name}] is missing {exc}") from None
        features = None
        if "features" in sec:
            features = tuple(f.strip() for f in sec["features"].split(",") if f.strip())
        try:
            drop = sec.getboolean("drop_constant", fallback=False)
        except ValueError as exc:
            raise InvalidCascade(f"[{name}]: {exc}") from None
        specs.append(StageSpec(name[6:].strip(), population, positives, features, drop))
    resolve_routing(specs)
    return specs


def read_cascade_spec(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_cascade_spec(fh.read())


def write_cascade_spec(specs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_cascade_spec(specs))
