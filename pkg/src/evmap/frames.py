"""Frames of discernment and the subset algebra over them.

A frame is an ordered set of mutually exclusive, exhaustive labels.  Subsets
are represented as bitmasks over the frame's element order, so set algebra is
cheap and every subset has one canonical representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import FrameMismatchError, ValidationError

# Powerset-based operations (complete matrices, dense belief tables) must stay
# enumerable, so frame cardinality is hard-capped rather than silently trimmed.
FRAME_CAP = 20


def _indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class Frame:
    """Named, ordered set of mutually exclusive and exhaustive element labels."""

    name: str
    elements: tuple[str, ...]

    def __post_init__(self) -> None:
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise ValidationError(f"frame {self.name!r} must have at least one element")
        if len(elements) > FRAME_CAP:
            raise ValidationError(
                f"frame {self.name!r} has {len(elements)} elements, over the cap of {FRAME_CAP}"
            )
        seen: set[str] = set()
        for label in elements:
            if not label:
                raise ValidationError(f"frame {self.name!r} contains an empty label")
            if label in seen:
                raise ValidationError(f"duplicate label {label!r} in frame {self.name!r}")
            seen.add(label)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(elements)})

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, label: str) -> bool:
        return label in self._index  # type: ignore[attr-defined]

    def index(self, label: str) -> int:
        try:
            return self._index[label]  # type: ignore[attr-defined]
        except KeyError:
            raise ValidationError(f"unknown label {label!r} for frame {self.name!r}") from None

    def subset(self, labels: Iterable[str]) -> "SubsetRef":
        """Subset from labels; duplicates collapse, unknown labels raise."""
        mask = 0
        for label in labels:
            mask |= 1 << self.index(label)
        return SubsetRef(self, mask)

    def subset_from_mask(self, mask: int) -> "SubsetRef":
        return SubsetRef(self, mask)

    def singleton(self, label: str) -> "SubsetRef":
        return SubsetRef(self, 1 << self.index(label))

    def full(self) -> "SubsetRef":
        return SubsetRef(self, (1 << self.size) - 1)

    def empty(self) -> "SubsetRef":
        return SubsetRef(self, 0)

    def singletons(self) -> Iterator["SubsetRef"]:
        for i in range(self.size):
            yield SubsetRef(self, 1 << i)

    def all_subsets(self) -> list["SubsetRef"]:
        """Every nonempty subset in canonical order (cardinality, element order)."""
        masks = sorted(range(1, 1 << self.size), key=lambda m: (m.bit_count(), _indices(m)))
        return [SubsetRef(self, m) for m in masks]

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Frame({self.name!r}, {self.elements!r})"


@dataclass(frozen=True)
class SubsetRef:
    """A subset of one frame's elements, held as a membership mask."""

    frame: Frame
    mask: int

    def __post_init__(self) -> None:
        if not 0 <= self.mask < (1 << self.frame.size):
            raise ValidationError(
                f"mask {self.mask:#x} out of range for frame {self.frame.name!r}"
            )

    def _require_same_frame(self, other: "SubsetRef") -> None:
        if self.frame != other.frame:
            raise FrameMismatchError(
                f"subsets belong to different frames: {self.frame.name!r} vs {other.frame.name!r}"
            )

    @property
    def indices(self) -> tuple[int, ...]:
        return _indices(self.mask)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.frame.elements[i] for i in self.indices)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.frame.size) - 1

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (self.mask.bit_count(), self.indices)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: str) -> bool:
        return bool(self.mask & (1 << self.frame.index(label)))

    def complement(self) -> "SubsetRef":
        return SubsetRef(self.frame, ~self.mask & ((1 << self.frame.size) - 1))

    def union(self, other: "SubsetRef") -> "SubsetRef":
        self._require_same_frame(other)
        return SubsetRef(self.frame, self.mask | other.mask)

    def intersect(self, other: "SubsetRef") -> "SubsetRef":
        self._require_same_frame(other)
        return SubsetRef(self.frame, self.mask & other.mask)

    def is_subset(self, other: "SubsetRef") -> bool:
        self._require_same_frame(other)
        return self.mask & ~other.mask == 0

    __or__ = union
    __and__ = intersect
    __le__ = is_subset

    def __str__(self) -> str:
        return "{" + ",".join(self.labels) + "}"

    def __repr__(self) -> str:
        return f"SubsetRef({self.frame.name}:{self})"
