"""Attack-label taxonomy of the UNSW-NB15 flow records."""

from __future__ import annotations

import enum

from ..errors import UnknownLabel


class AttackLabel(enum.Enum):
    """Traffic classes, declared in descending order of training-set size."""

    NORMAL = "Normal"
    GENERIC = "Generic"
    EXPLOITS = "Exploits"
    FUZZERS = "Fuzzers"
    DOS = "DoS"
    RECONNAISSANCE = "Reconnaissance"
    ANALYSIS = "Analysis"
    BACKDOOR = "Backdoor"
    SHELLCODE = "Shellcode"
    WORM = "Worm"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "AttackLabel":
        return ALL_LABELS[int(code)]

    @property
    def is_attack(self) -> bool:
        return self is not AttackLabel.NORMAL

    def __lt__(self, other):
        if not isinstance(other, AttackLabel):
            return NotImplemented
        return self.code < other.code

    def __str__(self):
        return self.value


ALL_LABELS = tuple(AttackLabel)
_CODES = {label: i for i, label in enumerate(ALL_LABELS)}

ATTACK_LABELS = tuple(label for label in ALL_LABELS if label.is_attack)
EXCLUDED_BY_DEFAULT = frozenset({AttackLabel.FUZZERS})

# Published split sizes of the UNSW-NB15 training / testing CSVs.
TRAIN_COUNTS = {
    AttackLabel.NORMAL: 56000,
    AttackLabel.GENERIC: 40000,
    AttackLabel.EXPLOITS: 33393,
    AttackLabel.FUZZERS: 18184,
    AttackLabel.DOS: 12264,
    AttackLabel.ANALYSIS: 2000,
    AttackLabel.RECONNAISSANCE: 10491,
    AttackLabel.SHELLCODE: 1133,
    AttackLabel.BACKDOOR: 1743,
    AttackLabel.WORM: 130,
}
TEST_COUNTS = {
    AttackLabel.NORMAL: 37000,
    AttackLabel.GENERIC: 18871,
    AttackLabel.EXPLOITS: 11132,
    AttackLabel.FUZZERS: 6062,
    AttackLabel.DOS: 4089,
    AttackLabel.ANALYSIS: 677,
    AttackLabel.RECONNAISSANCE: 3496,
    AttackLabel.SHELLCODE: 378,
    AttackLabel.BACKDOOR: 583,
    AttackLabel.WORM: 45,
}

# DoS, Exploits, Analysis and Backdoor behave alike and share one cascade branch.
CAT1 = frozenset({AttackLabel.DOS, AttackLabel.EXPLOITS, AttackLabel.ANALYSIS, AttackLabel.BACKDOOR})

# Row order of the per-class accuracy tables.
REPORT_ORDER = (
    AttackLabel.NORMAL,
    AttackLabel.GENERIC,
    AttackLabel.EXPLOITS,
    AttackLabel.DOS,
    AttackLabel.ANALYSIS,
    AttackLabel.BACKDOOR,
    AttackLabel.RECONNAISSANCE,
    AttackLabel.SHELLCODE,
    AttackLabel.WORM,
    AttackLabel.FUZZERS,
)

_ALIASES = {
    "": AttackLabel.NORMAL,
    "benign": AttackLabel.NORMAL,
    "backdoors": AttackLabel.BACKDOOR,
    "worms": AttackLabel.WORM,
    "fuzzer": AttackLabel.FUZZERS,
    "exploit": AttackLabel.EXPLOITS,
}
_BY_NAME = {label.value.lower(): label for label in ALL_LABELS}
_BY_NAME.update({label.name.lower(): label for label in ALL_LABELS})


def parse_label(token, row=None) -> AttackLabel:
    """Parse a label token case-insensitively; the empty token means Normal."""
    if isinstance(token, AttackLabel):
        return token
    key = str(token).strip().lower()
    label = _BY_NAME.get(key) or _ALIASES.get(key)
    if label is None:
        raise UnknownLabel(row, token)
    return label


def parse_labels(tokens) -> frozenset:
    """Parse a comma-separated string or an iterable of tokens into a label set."""
    if isinstance(tokens, str):
        tokens = [t for t in tokens.split(",") if t.strip()]
    return frozenset(parse_label(t) for t in tokens)


def by_count(labels, counts=None) -> list:
    """Sort labels by sample count, largest first; ties fall back to taxonomy order."""
    counts = TRAIN_COUNTS if counts is None else counts
    return sorted(labels, key=lambda label: (-counts.get(label, 0), label.code))
