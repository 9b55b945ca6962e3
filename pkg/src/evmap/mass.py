"""Mass functions, belief tables, and Dempster's rule of combination."""

from __future__ import annotations

from math import fsum
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import FrameMismatchError, TotalConflictError, ValidationError
from .frames import Frame, SubsetRef

# Normalization checks accept this much drift; Dempster's denominator below the
# degeneracy threshold counts as total conflict.
NORMALIZATION_TOL = 1e-9
TOTAL_CONFLICT_TOL = 1e-12

Assignments = Mapping[SubsetRef, float] | Iterable[tuple[SubsetRef, float]]


class MassFunction:
    """A basic probability assignment: positive masses on nonempty subsets, total 1.

    Zero-mass entries are never stored, so every key is a focal element.
    Instances are immutable; all operations return new values.
    """

    __slots__ = ("frame", "_focal")

    def __init__(self, frame: Frame, assignments: Assignments):
        items = assignments.items() if isinstance(assignments, Mapping) else assignments
        merged: dict[SubsetRef, float] = {}
        for subset, value in items:
            if subset.frame != frame:
                raise FrameMismatchError(
                    f"focal element {subset} is not a subset of frame {frame.name!r}"
                )
            if subset.is_empty:
                raise ValidationError("focal elements must be nonempty")
            value = float(value)
            if value <= 0.0:
                raise ValidationError(f"mass for {subset} is {value}; must be positive")
            merged[subset] = merged.get(subset, 0.0) + value
        for subset, value in merged.items():
            if value > 1.0 + NORMALIZATION_TOL:
                raise ValidationError(f"mass for {subset} is {value}; must be at most 1")
        total = fsum(merged.values())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"masses sum to {total!r}, not 1")
        self.frame = frame
        self._focal = dict(sorted(merged.items(), key=lambda kv: kv[0].sort_key))

    @classmethod
    def from_assignments(
        cls, frame: Frame, pairs: Iterable[tuple[SubsetRef, float]]
    ) -> "MassFunction":
        return cls(frame, pairs)

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        """Total ignorance: all mass on the whole frame."""
        return cls(frame, [(frame.full(), 1.0)])

    def items(self) -> Iterator[tuple[SubsetRef, float]]:
        return iter(self._focal.items())

    def focal_sets(self) -> tuple[SubsetRef, ...]:
        return tuple(self._focal)

    def as_dict(self) -> dict[SubsetRef, float]:
        return dict(self._focal)

    def value(self, subset: SubsetRef) -> float:
        if subset.frame != self.frame:
            raise FrameMismatchError("subset belongs to a different frame")
        return self._focal.get(subset, 0.0)

    def __len__(self) -> int:
        return len(self._focal)

    def belief(self, b: SubsetRef) -> float:
        """Total mass committed within b: the sum over focal elements contained in b."""
        if b.frame != self.frame:
            raise FrameMismatchError("subset belongs to a different frame")
        return fsum(v for s, v in self._focal.items() if s.mask & ~b.mask == 0)

    def plausibility(self, b: SubsetRef) -> float:
        """Mass not committed against b: 1 - belief(complement of b)."""
        return 1.0 - self.belief(b.complement())

    def is_bayesian(self) -> bool:
        """True iff every focal element is a singleton."""
        return all(len(s) == 1 for s in self._focal)

    def approx_equals(self, other: "MassFunction", tol: float = NORMALIZATION_TOL) -> bool:
        if self.frame != other.frame:
            return False
        keys = set(self._focal) | set(other._focal)
        return all(abs(self.value(k) - other.value(k)) <= tol for k in keys)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MassFunction):
            return NotImplemented
        return self.frame == other.frame and self._focal == other._focal

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {v:g}" for s, v in self._focal.items())
        return f"MassFunction({self.frame.name}; {body})"


class Combined(NamedTuple):
    mass: MassFunction
    conflict: float


def combine_dempster(m1: MassFunction, m2: MassFunction) -> Combined:
    """Dempster's rule: intersection products, renormalized over the non-conflict mass.

    The discarded conflict is returned alongside the result.  The inputs are
    assumed independent; that is the caller's responsibility.
    """
    if m1.frame != m2.frame:
        raise FrameMismatchError("can only combine mass functions on the same frame")
    conflict = 0.0
    acc: dict[SubsetRef, float] = {}
    for a, va in m1.items():
        for b, vb in m2.items():
            c = a.intersect(b)
            w = va * vb
            if c.is_empty:
                conflict += w
            else:
                acc[c] = acc.get(c, 0.0) + w
    denominator = 1.0 - conflict
    if denominator <= TOTAL_CONFLICT_TOL:
        raise TotalConflictError(
            "total conflict: the mass functions have no compatible focal elements"
        )
    if conflict:
        acc = {s: v / denominator for s, v in acc.items()}
    return Combined(MassFunction(m1.frame, acc), conflict)


class BeliefTable:
    """Belief values on subsets of one frame.

    Tables may be partial; the inverse transform back to a mass function
    requires a dense table (a value for every nonempty subset).
    """

    __slots__ = ("frame", "_by_mask")

    def __init__(self, frame: Frame, values: Mapping[SubsetRef, float]):
        by_mask: dict[int, float] = {}
        for subset, value in values.items():
            if subset.frame != frame:
                raise FrameMismatchError(
                    f"{subset} is not a subset of frame {frame.name!r}"
                )
            if subset.is_empty:
                raise ValidationError("belief tables store values for nonempty subsets only")
            value = float(value)
            if not -NORMALIZATION_TOL <= value <= 1.0 + NORMALIZATION_TOL:
                raise ValidationError(f"belief for {subset} is {value}; must lie in [0, 1]")
            by_mask[subset.mask] = value
        self.frame = frame
        self._by_mask = dict(sorted(by_mask.items(), key=lambda kv: (kv[0].bit_count(), kv[0])))

    @classmethod
    def from_mass(cls, m: MassFunction) -> "BeliefTable":
        """Materialize the dense table (one value per nonempty subset)."""
        return cls(m.frame, {s: m.belief(s) for s in m.frame.all_subsets()})

    def value(self, subset: SubsetRef) -> float:
        if subset.frame != self.frame:
            raise FrameMismatchError("subset belongs to a different frame")
        try:
            return self._by_mask[subset.mask]
        except KeyError:
            raise ValidationError(f"belief table has no value for {subset}") from None

    def items(self) -> Iterator[tuple[SubsetRef, float]]:
        for mask, value in self._by_mask.items():
            yield self.frame.subset_from_mask(mask), value

    def is_dense(self) -> bool:
        return len(self._by_mask) == (1 << self.frame.size) - 1

    def to_mass(self) -> MassFunction:
        """Moebius inverse: recover the mass function this table came from.

        Raises if the table is not dense or if some recovered mass is negative
        beyond tolerance (the table was not a belief function).
        """
        if not self.is_dense():
            raise ValidationError(
                "the inverse transform needs a belief value for every nonempty subset"
            )
        masses: dict[SubsetRef, float] = {}
        for a in range(1, 1 << self.frame.size):
            terms = []
            sub = a
            while sub:
                sign = -1.0 if (a & ~sub).bit_count() % 2 else 1.0
                terms.append(sign * self._by_mask[sub])
                sub = (sub - 1) & a
            value = fsum(terms)
            if value < -NORMALIZATION_TOL:
                raise ValidationError(
                    f"not a belief function: recovered mass {value} on "
                    f"{self.frame.subset_from_mask(a)}"
                )
            if value > 0.0:
                masses[self.frame.subset_from_mask(a)] = value
        return MassFunction(self.frame, masses)


def mass_from_belief(bel: BeliefTable) -> MassFunction:
    return bel.to_mass()
