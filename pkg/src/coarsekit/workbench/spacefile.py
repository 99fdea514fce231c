"""Line-oriented text format for weighted box spaces.

::

    # comment
    component 6
    weights 0.25 0.25 0.125 0.125 0.125 0.125
    generator cycle 6
    pairs 0 3 3 0

Each ``component`` line opens a block.  ``weights`` is optional (uniform by
default), ``generator`` names a built-in family and ``pairs`` lists extra
``x y`` pairs; the block's relation is the union of both.  Weights are
written with ``repr`` so parse and serialize round-trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..boxspace import BoxSpace, Relation, WeightedComponent
from ..errors import SpaceFileError
from . import generators

__all__ = ["ComponentSpec", "SpaceFile", "parse", "serialize", "load", "dump"]

_PAIRS_PER_LINE = 16


@dataclass(frozen=True)
class ComponentSpec:
    size: int
    weights: tuple | None = None
    generator: tuple | None = None  # (name, *int args)
    pairs: tuple = ()

    def generated_pairs(self) -> np.ndarray:
        if self.generator is None:
            return np.empty((0, 2), dtype=np.int64)
        return generators.named_pairs(self.generator[0], *self.generator[1:])


@dataclass(frozen=True)
class SpaceFile:
    components: tuple
    header: tuple = field(default=(), compare=True)  # comment lines kept for provenance

    @property
    def space(self) -> BoxSpace:
        return BoxSpace(tuple(c.size for c in self.components))

    def relation(self) -> Relation:
        space = self.space
        per = []
        for c in self.components:
            extra = np.asarray(c.pairs, dtype=np.int64).reshape(-1, 2)
            per.append(np.concatenate([c.generated_pairs(), extra]))
        return Relation(space, per)

    def weights(self) -> list:
        out = []
        for m, c in enumerate(self.components):
            if c.weights is None:
                out.append(WeightedComponent.uniform(m, c.size))
            else:
                out.append(WeightedComponent(m, np.array(c.weights, dtype=np.float64)))
        return out


def _ints(tokens, lineno, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise SpaceFileError(f"{what} expects integers", lineno) from None


def parse(text: str) -> SpaceFile:
    """Parse and validate a space file; errors carry the offending line number."""
    blocks = []
    header = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if cur is None:
                header.append(line[1:].strip())
            continue
        key, *rest = line.split()
        if key == "component":
            if len(rest) != 1:
                raise SpaceFileError("component expects one size", lineno)
            (size,) = _ints(rest, lineno, "component")
            if size < 1:
                raise SpaceFileError("component size must be positive", lineno)
            cur = {"size": size, "weights": None, "generator": None, "pairs": [], "gen_line": lineno}
            blocks.append(cur)
            continue
        if cur is None:
            raise SpaceFileError(f"{key!r} before any component", lineno)
        if key == "weights":
            if cur["weights"] is not None:
                raise SpaceFileError("duplicate weights line", lineno)
            try:
                vals = tuple(float(t) for t in rest)
            except ValueError:
                raise SpaceFileError("weights expects numbers", lineno) from None
            if len(vals) != cur["size"]:
                raise SpaceFileError(f"expected {cur['size']} weights, got {len(vals)}", lineno)
            try:
                WeightedComponent(0, np.array(vals))
            except ValueError as exc:
                raise SpaceFileError(str(exc), lineno) from None
            cur["weights"] = vals
        elif key == "generator":
            if cur["generator"] is not None:
                raise SpaceFileError("duplicate generator line", lineno)
            if not rest:
                raise SpaceFileError("generator needs a name", lineno)
            name, args = rest[0], tuple(_ints(rest[1:], lineno, "generator"))
            try:
                n = generators.named_size(name, *args)
            except (ValueError, TypeError) as exc:
                raise SpaceFileError(str(exc), lineno) from None
            if n != cur["size"]:
                raise SpaceFileError(f"generator {name} has {n} points, component has {cur['size']}", lineno)
            cur["generator"] = (name, *args)
            cur["gen_line"] = lineno
        elif key == "pairs":
            vals = _ints(rest, lineno, "pairs")
            if len(vals) % 2:
                raise SpaceFileError("pairs expects an even number of integers", lineno)
            if any(v < 0 or v >= cur["size"] for v in vals):
                raise SpaceFileError(f"pair index out of range for size {cur['size']}", lineno)
            cur["pairs"].extend(zip(vals[::2], vals[1::2]))
        else:
            raise SpaceFileError(f"unknown keyword {key!r}", lineno)
    if not blocks:
        raise SpaceFileError("no components")
    comps = []
    for b in blocks:
        if b["generator"] is not None:
            try:
                generators.named_pairs(*b["generator"])
            except ValueError as exc:
                raise SpaceFileError(str(exc), b["gen_line"]) from None
        comps.append(ComponentSpec(b["size"], b["weights"], b["generator"], tuple(sorted(set(b["pairs"])))))
    return SpaceFile(tuple(comps), tuple(header))


def serialize(sf: SpaceFile) -> str:
    lines = [f"# {h}" if h else "#" for h in sf.header]
    for c in sf.components:
        lines.append(f"component {c.size}")
        if c.weights is not None:
            lines.append("weights " + " ".join(repr(float(v)) for v in c.weights))
        if c.generator is not None:
            lines.append("generator " + " ".join(str(t) for t in c.generator))
        for i in range(0, len(c.pairs), _PAIRS_PER_LINE):
            chunk = c.pairs[i : i + _PAIRS_PER_LINE]
            lines.append("pairs " + " ".join(f"{x} {y}" for x, y in chunk))
    return "\n".join(lines) + "\n"


def load(path) -> SpaceFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(sf: SpaceFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(sf))
