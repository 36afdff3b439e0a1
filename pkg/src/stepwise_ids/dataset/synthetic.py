"""Seeded synthetic flow datasets with per-class feature distributions.

Spec files extend the schema format with class sections::

    x0,numeric
    proto,categorical
    [Normal] 560
    x0 = gaussian 0 1
    proto = categorical tcp:0.7 udp:0.3
    [Generic] 400
    x0 = uniform 9 11
    proto = categorical tcp:1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaError
from .core import Dataset
from .labels import AttackLabel, parse_label
from .schema import CATEGORICAL, NUMERIC, Feature, FeatureSchema, parse_schema_lines


@dataclass(frozen=True)
class Gaussian:
    mean: float
    std: float = 1.0

    def sample(self, rng, n):
        return rng.normal(self.mean, self.std, size=n)


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def sample(self, rng, n):
        return rng.uniform(self.low, self.high, size=n)


@dataclass(frozen=True)
class Categorical:
    probs: tuple  # ((category, weight), ...)

    def sample(self, rng, n):
        cats = np.array([c for c, _ in self.probs], dtype=object)
        p = np.array([w for _, w in self.probs], dtype=np.float64)
        return cats[rng.choice(len(cats), size=n, p=p / p.sum())]


@dataclass(frozen=True)
class ClassSpec:
    count: int
    distributions: dict  # feature name -> distribution


@dataclass(frozen=True)
class SynthSpec:
    features: tuple
    classes: dict  # AttackLabel -> ClassSpec, in generation order
    label_column: str = "attack_cat"

    def __post_init__(self):
        if len(self.classes) < 2:
            raise SchemaError("a synthetic spec needs at least two classes")
        for label, cls in self.classes.items():
            if cls.count < 1:
                raise SchemaError(f"{label}: count must be >= 1")
            for f in self.features:
                dist = cls.distributions.get(f.name)
                if dist is None:
                    raise SchemaError(f"{label}: no distribution for feature {f.name!r}")
                if (f.kind == CATEGORICAL) != isinstance(dist, Categorical):
                    raise SchemaError(f"{label}: distribution kind does not match feature {f.name!r}")

    @property
    def schema(self) -> FeatureSchema:
        return FeatureSchema(tuple(self.features), self.label_column)

    @property
    def counts(self) -> dict:
        return {label: cls.count for label, cls in self.classes.items()}


def synthesize(spec: SynthSpec, seed: int) -> Dataset:
    """Draw exactly ``count`` records per class, then shuffle; deterministic in (spec, seed)."""
    rng = np.random.default_rng(seed)
    blocks = {f.name: [] for f in spec.features}
    labels = []
    for label, cls in spec.classes.items():
        for f in spec.features:
            blocks[f.name].append(cls.distributions[f.name].sample(rng, cls.count))
        labels.append(np.full(cls.count, label.code, dtype=np.int8))
    order = rng.permutation(sum(cls.count for cls in spec.classes.values()))
    columns = []
    for f in spec.features:
        col = np.concatenate(blocks[f.name])[order]
        columns.append(col.astype(np.float64) if f.kind == NUMERIC else col.astype(object))
    return Dataset(spec.schema, tuple(columns), np.concatenate(labels)[order], f"synthetic:{seed}")


def _parse_distribution(text: str, lineno: int):
    parts = text.split()
    if not parts:
        raise SchemaError(f"spec line {lineno}: empty distribution")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "gaussian":
            return Gaussian(*map(float, args))
        if kind == "uniform":
            return Uniform(*map(float, args))
        if kind == "categorical":
            probs = []
            for item in args:
                cat, _, weight = item.rpartition(":")
                probs.append((cat, float(weight)))
            return Categorical(tuple(probs))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"spec line {lineno}: {exc}") from None
    raise SchemaError(f"spec line {lineno}: unknown distribution {kind!r}")


def parse_synth_spec(text: str) -> SynthSpec:
    schema_lines, classes = [], {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name, _, count = line[1:].partition("]")
            current = parse_label(name.strip())
            classes[current] = (int(count.strip()), {})
        elif current is None:
            schema_lines.append(line)
        else:
            name, sep, dist = line.partition("=")
            if not sep:
                raise SchemaError(f"spec line {lineno}: expected 'feature = distribution'")
            classes[current][1][name.strip()] = _parse_distribution(dist, lineno)
    schema = parse_schema_lines(schema_lines)
    return SynthSpec(
        schema.features,
        {label: ClassSpec(count, dists) for label, (count, dists) in classes.items()},
        schema.label_column,
    )


def read_synth_spec(path) -> SynthSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_synth_spec(fh.read())


def _format_distribution(dist) -> str:
    if isinstance(dist, Gaussian):
        return f"gaussian {dist.mean!r} {dist.std!r}"
    if isinstance(dist, Uniform):
        return f"uniform {dist.low!r} {dist.high!r}"
    return "categorical " + " ".join(f"{c}:{w!r}" for c, w in dist.probs)


def format_synth_spec(spec: SynthSpec) -> str:
    lines = [f"{f.name},{f.kind}" for f in spec.features]
    lines.append(f"{spec.label_column},label")
    for label, cls in spec.classes.items():
        lines.append(f"[{label.value}] {cls.count}")
        lines.extend(f"{name} = {_format_distribution(d)}" for name, d in cls.distributions.items())
    return "\n".join(lines) + "\n"


# presets used by the test suite and the `synth` command

def scaled_counts(counts: dict, divisor: float, labels=None) -> dict:
    """Scale class counts down, rounding up so every class keeps at least one record."""
    labels = list(counts) if labels is None else labels
    return {label: max(1, math.ceil(counts[label] / divisor)) for label in labels}


_PROTOCOLS = (("tcp", 0.6), ("udp", 0.3), ("arp", 0.1))


def separable_spec(counts: dict, spacing: float = 10.0, n_noise: int = 1,
                   shared=(), off_axis_std: float = 1.0) -> SynthSpec:
    """Every attack class gets its own signal feature, shifted ``spacing`` stddevs.

    Normal records and all other classes draw it from N(0, off_axis_std), so any
    two classes differ along at least one axis and each attack-vs-Normal model
    can only fire on its own class.  Labels listed in ``shared`` use one common
    signal feature, which makes them indistinguishable from each other while
    staying apart from the rest.

    ``off_axis_std`` is the spread of the signal features a class does not own.
    Setting it to 0 removes the chance extremes a tree could latch onto when a
    class has only a handful of training records.
    """
    shared = [parse_label(x) for x in shared]
    slot = {}
    for label in counts:
        if not label.is_attack:
            continue
        key = shared[0] if label in shared else label
        if key not in slot:
            slot[key] = len(slot)
    signals = [f"x{k}" for k in range(len(slot))]
    features = [Feature(name) for name in signals]
    features += [Feature(f"noise{i}") for i in range(n_noise)]
    features.append(Feature("proto", CATEGORICAL))
    classes = {}
    for label, count in counts.items():
        k = slot.get(shared[0] if label in shared else label) if label.is_attack else None
        dists = {name: Gaussian(spacing, 1.0) if j == k else Gaussian(0.0, off_axis_std)
                 for j, name in enumerate(signals)}
        for i in range(n_noise):
            dists[f"noise{i}"] = Gaussian(0.0, 1.0)
        dists["proto"] = Categorical(_PROTOCOLS)
        classes[label] = ClassSpec(count, dists)
    return SynthSpec(tuple(features), classes)


def default_labels(include_fuzzers=False) -> list:
    return [label for label in AttackLabel if include_fuzzers or label is not AttackLabel.FUZZERS]
