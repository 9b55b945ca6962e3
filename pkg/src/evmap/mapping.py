"""Evidential mappings, their matrices, and belief propagation between frames.

An evidential mapping sends every element of a source frame to a list of
(target subset, mass) pairs that form a mass function on the target frame.
Written as a matrix over source elements x occurring target subsets it is the
basic matrix; extending it with one row per nonempty source subset (computed
by averaging, with mass that hits a zero column diverted to the row's union
set) gives the complete matrix used to propagate arbitrary mass functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import fsum
from typing import Iterable, Mapping, NamedTuple, Protocol, Sequence

from .errors import (
    FrameMismatchError,
    ImpossibleObservationError,
    TotalConflictError,
    ValidationError,
)
from .frames import Frame, SubsetRef
from .mass import NORMALIZATION_TOL, BeliefTable, MassFunction, combine_dempster

ImageRow = tuple[tuple[SubsetRef, float], ...]


@dataclass(frozen=True)
class CemRow:
    """One complete-matrix row: the mass function induced by a source subset."""

    title: SubsetRef
    entries: ImageRow

    def __post_init__(self) -> None:
        total = fsum(v for _, v in self.entries)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"row {self.title} sums to {total!r}, not 1")

    def as_mass(self) -> MassFunction:
        return MassFunction(self.entries[0][0].frame, self.entries)


class Propagator(Protocol):
    """Anything that can produce complete-matrix rows: a mapping or a chain."""

    name: str
    source: Frame
    target: Frame

    def cem_row(self, title: SubsetRef) -> CemRow: ...


def _normalize_row(
    target: Frame, label: str, pairs: Iterable[tuple[SubsetRef, float]]
) -> ImageRow:
    merged: dict[SubsetRef, float] = {}
    for subset, value in pairs:
        if subset.frame != target:
            raise FrameMismatchError(
                f"image of {label!r}: {subset} is not a subset of frame {target.name!r}"
            )
        if subset.is_empty:
            raise ValidationError(f"image of {label!r} contains an empty subset")
        value = float(value)
        if value <= 0.0:
            raise ValidationError(f"image of {label!r}: mass {value} must be positive")
        merged[subset] = merged.get(subset, 0.0) + value
    total = fsum(merged.values())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(f"image of {label!r} sums to {total!r}, not 1")
    return tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key))


class EvidentialMapping:
    """Per-element causal links from a source frame to mass on a target frame.

    ``images`` maps every source element label to its (subset, mass) pairs.
    ``overrides`` optionally pins the computed row for a multi-element source
    subset; each override is validated against the averaging bounds of the
    matrix columns it touches.
    """

    __slots__ = ("name", "source", "target", "_images", "_overrides", "_bm")

    def __init__(
        self,
        name: str,
        source: Frame,
        target: Frame,
        images: Mapping[str, Iterable[tuple[SubsetRef, float]]],
        overrides: Mapping[SubsetRef, Iterable[tuple[SubsetRef, float]]] | None = None,
    ):
        self.name = name
        self.source = source
        self.target = target
        images = dict(images)
        unknown = set(images) - set(source.elements)
        if unknown:
            raise ValidationError(
                f"images given for labels not in frame {source.name!r}: {sorted(unknown)}"
            )
        rows = []
        for label in source.elements:
            if label not in images:
                raise ValidationError(f"no image for source element {label!r}")
            rows.append(_normalize_row(target, label, images[label]))
        self._images: tuple[ImageRow, ...] = tuple(rows)
        self._bm: BasicMatrix | None = None
        self._overrides: dict[SubsetRef, ImageRow] = {}
        if overrides:
            bm = self.basic_matrix()
            for title, pairs in overrides.items():
                self._overrides[title] = _validate_override(bm, title, pairs)

    def image(self, label: str) -> ImageRow:
        return self._images[self.source.index(label)]

    def image_mass(self, label: str) -> MassFunction:
        return MassFunction(self.target, self.image(label))

    def row_union(self, label: str) -> SubsetRef:
        """Union of all subsets the element maps to (its reachable target set)."""
        mask = 0
        for subset, _ in self.image(label):
            mask |= subset.mask
        return self.target.subset_from_mask(mask)

    @property
    def overrides(self) -> dict[SubsetRef, ImageRow]:
        return dict(self._overrides)

    def basic_matrix(self) -> "BasicMatrix":
        if self._bm is None:
            self._bm = BasicMatrix(self)
        return self._bm

    def cem_row(self, title: SubsetRef) -> CemRow:
        row = self._overrides.get(title)
        if row is not None:
            return CemRow(title, row)
        return self.basic_matrix().row(title)

    def propagate_mass(self, m: MassFunction) -> MassFunction:
        return propagate_mass(self, m)

    def propagate_probability(self, p: MassFunction) -> MassFunction:
        return propagate_probability(self, p)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EvidentialMapping):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self._images == other._images
            and self._overrides == other._overrides
        )

    def __repr__(self) -> str:
        return (
            f"EvidentialMapping({self.name!r}, {self.source.name} -> {self.target.name}, "
            f"{self.source.size} rows)"
        )


class BasicMatrix:
    """The mapping as a dense matrix: source elements x occurring target subsets.

    Column titles are the distinct image subsets in canonical order
    (cardinality, then element order), which reproduces the conventional
    presentation with the whole frame last.  Rows computed for multi-element
    titles are cached; races on the cache are benign because rows are pure.
    """

    __slots__ = ("mapping", "columns", "rows", "_row_union_masks", "_cache")

    def __init__(self, mapping: EvidentialMapping):
        self.mapping = mapping
        subsets = {s for label in mapping.source.elements for s, _ in mapping.image(label)}
        self.columns: tuple[SubsetRef, ...] = tuple(sorted(subsets, key=lambda s: s.sort_key))
        col_index = {s: j for j, s in enumerate(self.columns)}
        rows = []
        union_masks = []
        for label in mapping.source.elements:
            row = [0.0] * len(self.columns)
            mask = 0
            for subset, value in mapping.image(label):
                row[col_index[subset]] = value
                mask |= subset.mask
            rows.append(tuple(row))
            union_masks.append(mask)
        self.rows: tuple[tuple[float, ...], ...] = tuple(rows)
        self._row_union_masks = tuple(union_masks)
        self._cache: dict[int, CemRow] = {}

    @property
    def source(self) -> Frame:
        return self.mapping.source

    @property
    def target(self) -> Frame:
        return self.mapping.target

    def union_mask(self, title: SubsetRef) -> int:
        mask = 0
        for i in title.indices:
            mask |= self._row_union_masks[i]
        return mask

    def row(self, title: SubsetRef) -> CemRow:
        """Complete-matrix row for a nonempty source subset.

        Singleton titles return the basic-matrix row verbatim.  For a title of
        k elements, each column keeps the average of its k entries when all
        are nonzero; when any entry is zero the column's average is diverted
        onto the union of the member rows' reachable sets instead.  Numerators
        are accumulated first and divided by k once, so rows whose entries are
        exact (0/1 matrices) stay exact.
        """
        if title.frame != self.source:
            raise FrameMismatchError(
                f"row title {title} does not belong to frame {self.source.name!r}"
            )
        if title.is_empty:
            raise ValidationError("row titles must be nonempty subsets")
        cached = self._cache.get(title.mask)
        if cached is not None:
            return cached
        idx = title.indices
        if len(idx) == 1:
            row_vals = self.rows[idx[0]]
            entries = tuple(
                (col, val) for col, val in zip(self.columns, row_vals) if val != 0.0
            )
        else:
            k = float(len(idx))
            member_rows = [self.rows[i] for i in idx]
            numerators: dict[int, float] = {}
            diverted = 0.0
            for j, col in enumerate(self.columns):
                vals = [r[j] for r in member_rows]
                total = sum(vals)
                if total == 0.0:
                    continue
                if all(v != 0.0 for v in vals):
                    numerators[col.mask] = numerators.get(col.mask, 0.0) + total
                else:
                    diverted += total
            if diverted:
                union = self.union_mask(title)
                numerators[union] = numerators.get(union, 0.0) + diverted
            entries = tuple(
                sorted(
                    (
                        (self.target.subset_from_mask(mask), total / k)
                        for mask, total in numerators.items()
                    ),
                    key=lambda kv: kv[0].sort_key,
                )
            )
        result = CemRow(title, entries)
        self._cache[title.mask] = result
        return result


def _validate_override(
    bm: BasicMatrix, title: SubsetRef, pairs: Iterable[tuple[SubsetRef, float]]
) -> ImageRow:
    if title.frame != bm.source:
        raise FrameMismatchError(f"override title {title} is not over frame {bm.source.name!r}")
    if len(title) < 2:
        raise ValidationError("row overrides are for multi-element source subsets only")
    row = _normalize_row(bm.target, str(title), pairs)
    union = bm.union_mask(title)
    bounds = {}
    for j, col in enumerate(bm.columns):
        vals = [bm.rows[i][j] for i in title.indices]
        bounds[col.mask] = (min(vals), max(vals))
    for subset, value in row:
        if subset.mask == union:
            # The union column absorbs whatever the kept columns do not carry;
            # the averaging bounds do not constrain it.
            continue
        if subset.mask not in bounds:
            raise ValidationError(
                f"override for {title} puts mass on {subset}, which is neither a matrix "
                f"column nor the row's union set"
            )
        lo, hi = bounds[subset.mask]
        if not lo - NORMALIZATION_TOL <= value <= hi + NORMALIZATION_TOL:
            raise ValidationError(
                f"override for {title}: mass {value} on {subset} violates the averaging "
                f"bounds [{lo}, {hi}]"
            )
    return row


def basic_matrix(g: EvidentialMapping) -> BasicMatrix:
    return g.basic_matrix()


def cem_row(bm: BasicMatrix | EvidentialMapping, title: SubsetRef) -> CemRow:
    if isinstance(bm, BasicMatrix):
        return bm.row(title)
    return bm.cem_row(title)


def propagate_mass(g: Propagator, m: MassFunction) -> MassFunction:
    """Push a mass function through the mapping, row by focal element."""
    if m.frame != g.source:
        raise FrameMismatchError(
            f"evidence is on frame {m.frame.name!r} but the mapping starts at {g.source.name!r}"
        )
    acc: dict[SubsetRef, float] = {}
    for subset, value in m.items():
        for targ, f in g.cem_row(subset).entries:
            acc[targ] = acc.get(targ, 0.0) + value * f
    return MassFunction(g.target, acc)


def propagate_probability(g: Propagator, p: MassFunction) -> MassFunction:
    """Push a probability distribution (singleton masses) through the mapping."""
    if not p.is_bayesian():
        raise ValidationError(
            "input has non-singleton focal elements; use propagate_mass instead"
        )
    return propagate_mass(g, p)


class ComposedMapping:
    """Two propagators chained end to end.

    Rows of the product matrix are computed on demand by multiplying each
    first-stage entry through the second stage's row with the same title, so
    propagating through the composition equals propagating twice.
    """

    __slots__ = ("name", "first", "second", "source", "target", "_cache")

    def __init__(self, first: Propagator, second: Propagator):
        if first.target != second.source:
            raise FrameMismatchError(
                f"cannot chain: {first.name!r} ends at {first.target.name!r} but "
                f"{second.name!r} starts at {second.source.name!r}"
            )
        self.first = first
        self.second = second
        self.source = first.source
        self.target = second.target
        self.name = f"{first.name}*{second.name}"
        self._cache: dict[int, CemRow] = {}

    def cem_row(self, title: SubsetRef) -> CemRow:
        cached = self._cache.get(title.mask)
        if cached is not None:
            return cached
        acc: dict[SubsetRef, float] = {}
        for mid, v in self.first.cem_row(title).entries:
            for targ, f in self.second.cem_row(mid).entries:
                acc[targ] = acc.get(targ, 0.0) + v * f
        entries = tuple(sorted(acc.items(), key=lambda kv: kv[0].sort_key))
        result = CemRow(title, entries)
        self._cache[title.mask] = result
        return result

    def propagate_mass(self, m: MassFunction) -> MassFunction:
        return propagate_mass(self, m)

    def __repr__(self) -> str:
        return f"ComposedMapping({self.name!r})"


def compose(g1: Propagator, g2: Propagator) -> ComposedMapping:
    return ComposedMapping(g1, g2)


def export_cem_rows(g: Propagator) -> list[str]:
    """Full complete-matrix dump, one line per row title.

    Format: ``ROWTITLE<TAB>COLTITLE=MASS;...`` with nine decimal places;
    singleton rows come first, then remaining subsets in canonical order.
    """
    lines = []
    for title in g.source.all_subsets():
        row = g.cem_row(title)
        body = ";".join(f"{s}={v:.9f}" for s, v in row.entries)
        lines.append(f"{title}\t{body}")
    return lines


class MappingCombination(NamedTuple):
    mapping: EvidentialMapping
    row_conflicts: dict[str, float]


def combine_mappings(g1: EvidentialMapping, g2: EvidentialMapping) -> MappingCombination:
    """Joint impact of two independent mappings over the same frames.

    Each source element's two images are Dempster-combined on the target
    frame; the per-row discarded conflict is reported so callers can flag
    heavily conflicting rows.  A row whose images flatly contradict raises.
    """
    if g1.source != g2.source or g1.target != g2.target:
        raise FrameMismatchError("can only combine mappings with identical source and target")
    images: dict[str, ImageRow] = {}
    conflicts: dict[str, float] = {}
    for label in g1.source.elements:
        try:
            combined, conflict = combine_dempster(g1.image_mass(label), g2.image_mass(label))
        except TotalConflictError:
            raise TotalConflictError(
                f"images for source element {label!r} contradict outright"
            ) from None
        images[label] = tuple(combined.items())
        conflicts[label] = conflict
    name = g1.name if g1.name == g2.name else f"{g1.name}_{g2.name}"
    return MappingCombination(
        EvidentialMapping(name, g1.source, g1.target, images), conflicts
    )


def classify_mapping(g: EvidentialMapping) -> frozenset[str]:
    """Kinds of mapping: ``multivalued`` (0/1 entries), ``bayesian`` (singleton
    columns), both, or ``general``."""
    bm = g.basic_matrix()
    kinds = set()
    if all(v in (0.0, 1.0) for row in bm.rows for v in row):
        kinds.add("multivalued")
    if all(len(col) == 1 for col in bm.columns):
        kinds.add("bayesian")
    return frozenset(kinds) if kinds else frozenset({"general"})


def _conditional_table(g: EvidentialMapping) -> list[dict[str, float]]:
    """Per-hypothesis conditional distribution over target elements."""
    if "bayesian" not in classify_mapping(g):
        raise ValidationError(
            "this operation needs a mapping whose matrix columns are all singletons"
        )
    bm = g.basic_matrix()
    col_label = [col.labels[0] for col in bm.columns]
    return [dict(zip(col_label, row)) for row in bm.rows]


def posterior(
    prior: MassFunction, g: EvidentialMapping, observations: Sequence[str]
) -> BeliefTable:
    """Posterior singleton beliefs on the mapping's source frame.

    ``g`` runs from hypotheses to evidence with singleton columns, so its
    matrix holds the conditionals p(e | h).  Each observation asserts one
    evidence element with certainty; the posterior is the normalized product
    of the prior with the observed conditionals.
    """
    if prior.frame != g.source:
        raise FrameMismatchError("prior must live on the mapping's source frame")
    if not prior.is_bayesian():
        raise ValidationError("prior must be Bayesian (singleton focal elements)")
    conditionals = _conditional_table(g)
    for obs in observations:
        g.target.index(obs)  # unknown labels are a usage error, not an inference one
    weights = []
    for i, label in enumerate(g.source.elements):
        w = prior.value(g.source.singleton(label))
        for obs in observations:
            w *= conditionals[i].get(obs, 0.0)
        weights.append(w)
    total = fsum(weights)
    if total <= 0.0:
        raise ImpossibleObservationError(
            "every hypothesis assigns zero likelihood to the observations"
        )
    values = {
        g.source.singleton(label): w / total
        for label, w in zip(g.source.elements, weights)
    }
    return BeliefTable(g.source, values)


def bayes_enumeration_posterior(
    prior: MassFunction, g: EvidentialMapping, observations: Sequence[str]
) -> dict[str, float]:
    """Posterior by brute force: enumerate the full joint and condition on the
    observed tuple.  Exists as an independent cross-check for ``posterior``.
    """
    if prior.frame != g.source:
        raise FrameMismatchError("prior must live on the mapping's source frame")
    if not prior.is_bayesian():
        raise ValidationError("prior must be Bayesian (singleton focal elements)")
    conditionals = _conditional_table(g)
    obs_tuple = tuple(observations)
    for obs in obs_tuple:
        g.target.index(obs)
    n_obs = len(obs_tuple)
    matched = {label: 0.0 for label in g.source.elements}
    for i, label in enumerate(g.source.elements):
        p_h = prior.value(g.source.singleton(label))
        for assignment in itertools.product(g.target.elements, repeat=n_obs):
            joint = p_h
            for e in assignment:
                joint *= conditionals[i].get(e, 0.0)
            if assignment == obs_tuple:
                matched[label] += joint
    total = fsum(matched.values())
    if total <= 0.0:
        raise ImpossibleObservationError(
            "every hypothesis assigns zero likelihood to the observations"
        )
    return {label: v / total for label, v in matched.items()}
