"""Synchronous majority-rule dynamics on a :class:`Topology`."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _backend
from .rng import SplitMix64
from .topology import FormatError, Topology


class Color(str, Enum):
    BLUE = "B"
    RED = "R"

    @classmethod
    def parse(cls, value: "str | Color") -> "Color":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("b", "blue"):
            return cls.BLUE
        if key in ("r", "red"):
            return cls.RED
        raise ValueError(f"unknown color {value!r}")

    @property
    def other(self) -> "Color":
        return Color.RED if self is Color.BLUE else Color.BLUE

    @property
    def bit(self) -> int:
        return 1 if self is Color.BLUE else 0


class Classification(str, Enum):
    B_MONO = "b-monochromatic"
    R_MONO = "r-monochromatic"
    BICHROMATIC = "bichromatic"


class Generation:
    """One color per vertex, stored one bit per vertex.

    Value semantics: equal colorings compare and hash equal, and nothing in
    the engine mutates a generation.
    """

    __slots__ = ("_packed", "_size")

    def __init__(self, colors: Iterable["Color | str | bool | int"] | np.ndarray) -> None:
        if isinstance(colors, np.ndarray):
            blue = colors.astype(bool).ravel()
        else:
            blue = np.array([_to_bit(c) for c in colors], dtype=bool)
        self._size = int(blue.size)
        self._packed = np.packbits(blue).tobytes()

    @classmethod
    def filled(cls, size: int, color: Color) -> "Generation":
        return cls(np.full(size, color.bit, dtype=np.uint8))

    @classmethod
    def with_blue(cls, size: int, blue_vertices: Iterable[int]) -> "Generation":
        blue = np.zeros(size, dtype=np.uint8)
        blue[list(blue_vertices)] = 1
        return cls(blue)

    @property
    def blue(self) -> np.ndarray:
        """Unpacked ``uint8`` array, 1 for blue (a fresh copy)."""
        raw = np.frombuffer(self._packed, dtype=np.uint8)
        return np.unpackbits(raw, count=self._size)

    @property
    def blue_count(self) -> int:
        return int(self.blue.sum())

    def blue_vertices(self) -> set[int]:
        return set(np.flatnonzero(self.blue).tolist())

    def swapped(self) -> "Generation":
        return Generation(1 - self.blue)

    def __len__(self) -> int:
        return self._size

    def __getitem__(self, v: int) -> Color:
        if not -self._size <= v < self._size:
            raise IndexError(v)
        return Color.BLUE if self.blue[v] else Color.RED

    def __iter__(self):
        return (Color.BLUE if b else Color.RED for b in self.blue)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Generation):
            return NotImplemented
        return self._size == other._size and self._packed == other._packed

    def __hash__(self) -> int:
        return hash((self._size, self._packed))

    def __repr__(self) -> str:
        text = "".join(c.value for c in self)
        if len(text) > 40:
            text = text[:37] + "..."
        return f"Generation({text!r})"


def _to_bit(c) -> bool:
    if isinstance(c, (bool, np.bool_, int, np.integer)):
        return bool(c)
    return Color.parse(c) is Color.BLUE


class RuleKind(str, Enum):
    MAJORITY = "majority"
    BIASED = "biased"
    RANDOM = "random"
    CONSERVATIVE = "conservative"


@dataclass(frozen=True)
class UpdateRule:
    """Local update rule.

    ``RANDOM`` carries its own splitmix64 stream for tie breaking; the stream
    advances as the rule is applied, so give each run its own instance.
    """

    kind: RuleKind
    stream: SplitMix64 | None = field(default=None, compare=False, repr=False)

    @classmethod
    def random_majority(cls, seed: int) -> "UpdateRule":
        return cls(RuleKind.RANDOM, SplitMix64(seed))

    @classmethod
    def parse(cls, name: "str | RuleKind | UpdateRule", seed: int = 0) -> "UpdateRule":
        if isinstance(name, UpdateRule):
            return name
        try:
            kind = RuleKind(str(name.value if isinstance(name, RuleKind) else name).lower())
        except ValueError:
            raise ValueError(f"unknown rule {name!r}") from None
        if kind is RuleKind.RANDOM:
            return cls.random_majority(seed)
        return cls(kind)

    @property
    def deterministic(self) -> bool:
        return self.kind is not RuleKind.RANDOM

    @property
    def code(self) -> int:
        return _backend.RULE_CODES[self.kind.value]


MAJORITY = UpdateRule(RuleKind.MAJORITY)
BIASED = UpdateRule(RuleKind.BIASED)
CONSERVATIVE = UpdateRule(RuleKind.CONSERVATIVE)


@dataclass(frozen=True)
class RunOutcome:
    consensus_time: int
    period: int | None  # None: no cycle found within the step budget
    classification: Classification
    final_blue_count: int
    steps_executed: int
    final: Generation = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "consensus_time": self.consensus_time,
            "period": self.period if self.period is not None else "unresolved",
            "classification": self.classification.value,
            "final_blue_count": self.final_blue_count,
            "steps_executed": self.steps_executed,
        }


class CycleNotFound(RuntimeError):
    """A deterministic rule exhausted its step budget without cycling."""


def classify(g: Generation) -> Classification:
    if len(g) == 0:
        raise ValueError("cannot classify an empty generation")
    count = g.blue_count
    if count == len(g):
        return Classification.B_MONO
    if count == 0:
        return Classification.R_MONO
    return Classification.BICHROMATIC


def _check(t: Topology, g: Generation) -> None:
    if len(g) != t.vertex_count:
        raise ValueError(
            f"generation has {len(g)} vertices, topology has {t.vertex_count}"
        )


def _random_step(t: Topology, stream: SplitMix64, blue: np.ndarray) -> np.ndarray:
    counts = _backend.blue_counts(t, blue[None, :])[0]
    twice, deg = 2 * counts, t.degrees
    out = (twice > deg).astype(np.uint8)
    ties = np.flatnonzero(twice == deg)
    if ties.size:
        # one draw per tied vertex, in index order
        out[ties] = stream.uniforms(ties.size) < 0.5
    return out


def step(t: Topology, rule: UpdateRule, g: Generation) -> Generation:
    _check(t, g)
    if rule.kind is RuleKind.RANDOM:
        return Generation(_random_step(t, rule.stream, g.blue))
    return Generation(_backend.step_batch(t, g.blue[None, :], rule.code)[0])


def auto_budget(t: Topology) -> int:
    """Consensus-time bound for the biased rule plus two witnessing steps."""
    return t.edge_count + t.vertex_count + 2


def run_to_cycle(
    t: Topology,
    rule: UpdateRule,
    g0: Generation,
    max_steps: "int | str" = "auto",
    observer: Callable[[int, Generation], None] | None = None,
) -> RunOutcome:
    """Step until a generation repeats its predecessor or the one before.

    Consensus time is the index of the first generation on the detected
    cycle.  Deterministic rules must close a cycle of length one or two;
    exhausting ``max_steps`` then raises :class:`CycleNotFound`.  The random
    rule instead returns with ``period=None``.

    ``observer(k, g_k)`` is called for every generation, ``g0`` included.
    """
    _check(t, g0)
    budget = auto_budget(t) if max_steps == "auto" else int(max_steps)
    if budget < 1:
        raise ValueError("max_steps must be positive")
    if rule.deterministic and observer is None:
        steps, period, _, _, finals = _backend.run_batch(t, g0.blue[None, :], rule.code, budget)
        k, p = int(steps[0]), int(period[0])
        if p == 0:
            raise _exhausted(t, rule, budget)
        return _outcome(k, p, Generation(finals[0]))
    return _run_stepwise(t, rule, g0, budget, observer)


def _exhausted(t: Topology, rule: UpdateRule, budget: int) -> CycleNotFound:
    return CycleNotFound(
        f"{rule.kind.value} rule on {t.describe()} did not cycle within {budget} steps"
    )


def _run_stepwise(t, rule, g0, budget, observer) -> RunOutcome:
    if rule.deterministic:
        advance = lambda blue: _backend.step_batch(t, blue[None, :], rule.code)[0]
    else:
        advance = lambda blue: _random_step(t, rule.stream, blue)
    if observer is not None:
        observer(0, g0)
    older, cur = None, g0.blue
    for k in range(1, budget + 1):
        nxt = advance(cur)
        if observer is not None:
            observer(k, Generation(nxt))
        if np.array_equal(nxt, cur):
            return _outcome(k, 1, Generation(nxt))
        if older is not None and np.array_equal(nxt, older):
            return _outcome(k, 2, Generation(nxt))
        older, cur = cur, nxt
    if rule.deterministic:
        raise _exhausted(t, rule, budget)
    final = Generation(cur)
    return RunOutcome(budget, None, classify(final), final.blue_count, budget, final)


def _outcome(k: int, period: int, final: Generation) -> RunOutcome:
    kind = classify(final) if period == 1 else Classification.BICHROMATIC
    return RunOutcome(k - period, period, kind, final.blue_count, k, final)


def trajectory(t: Topology, rule: UpdateRule, g0: Generation, steps: int) -> list[Generation]:
    """``[g0, g1, ..., g_steps]``."""
    out = [g0]
    for _ in range(steps):
        out.append(step(t, rule, out[-1]))
    return out


# text formats


def format_generation(t: Topology, g: Generation) -> str:
    _check(t, g)
    chars = "".join(c.value for c in g)
    if t.lattice is not None:
        n = t.lattice.n
        return "\n".join(chars[i * n : (i + 1) * n] for i in range(n)) + "\n"
    return chars + "\n"


def write_generation(path: str | Path, t: Topology, g: Generation) -> None:
    Path(path).write_text(format_generation(t, g))


def _read_grid(path: str | Path, t: Topology, alphabet: str) -> list[str]:
    path = Path(path)
    try:
        text = path.read_text()
    except UnicodeDecodeError:
        raise FormatError(path, 1, 1, "file is not valid UTF-8 text") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if t.lattice is not None:
        rows, width = t.lattice.n, t.lattice.n
    else:
        rows, width = 1, t.vertex_count
    if len(lines) != rows:
        raise FormatError(path, min(len(lines), rows) + 1, 1, f"expected {rows} line(s), found {len(lines)}")
    for i, line in enumerate(lines, start=1):
        for j, ch in enumerate(line, start=1):
            if ch not in alphabet:
                raise FormatError(path, i, j, f"unexpected character {ch!r}; allowed: {alphabet}")
        if len(line) != width:
            raise FormatError(path, i, min(len(line), width) + 1, f"expected {width} characters, found {len(line)}")
    return lines


def read_generation(path: str | Path, t: Topology) -> Generation:
    return Generation("".join(_read_grid(path, t, "BR")))


def parse_generation(text: Sequence[str] | str) -> Generation:
    if isinstance(text, str):
        text = text.split()
    return Generation("".join(text))


def read_pattern(path: str | Path, t: Topology) -> dict[int, Color]:
    """Cells of a ``B``/``R``/``.`` pattern file; ``.`` marks cells outside the set."""
    chars = "".join(_read_grid(path, t, "BR."))
    return {v: Color(ch) for v, ch in enumerate(chars) if ch != "."}
