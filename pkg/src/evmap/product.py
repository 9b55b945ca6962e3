"""Cartesian-product antecedent frames and fusion of per-component evidence.

Evidence on each component frame is lifted to the product frame through a
cylinder mapping (each component element maps to the set of all tuples that
agree with it) and the lifted masses are Dempster-combined.  Cylinders over
distinct coordinates always intersect, so this combination never conflicts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import FrameMismatchError, ValidationError
from .frames import FRAME_CAP, Frame, SubsetRef
from .mapping import EvidentialMapping, Propagator, propagate_mass
from .mass import MassFunction, combine_dempster


def tuple_label(labels: Sequence[str]) -> str:
    return "(" + ",".join(labels) + ")"


@dataclass(frozen=True)
class ProductFrame(Frame):
    """Frame whose elements are tuples drawn from component frames."""

    components: tuple[Frame, ...] = ()

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.components) < 2:
            raise ValidationError("a product frame needs at least two component frames")
        for i, a in enumerate(self.components):
            for b in self.components[i + 1 :]:
                if a == b:
                    raise ValidationError(
                        f"component frame {a.name!r} appears more than once; "
                        f"self-products are not supported"
                    )
        expected = 1
        for comp in self.components:
            expected *= comp.size
        if expected != self.size:
            raise ValidationError("product frame element count does not match its components")


def product_frame(components: Sequence[Frame], name: str | None = None) -> ProductFrame:
    """Product of two or more distinct frames, elements in lexicographic order."""
    comps = tuple(components)
    if len(comps) < 2:
        raise ValidationError("a product frame needs at least two component frames")
    cardinality = 1
    for comp in comps:
        cardinality *= comp.size
    if cardinality > FRAME_CAP:
        raise ValidationError(
            f"product cardinality {cardinality} exceeds the frame cap of {FRAME_CAP}"
        )
    elements = tuple(
        tuple_label(combo) for combo in itertools.product(*(f.elements for f in comps))
    )
    return ProductFrame(name or "x".join(f.name for f in comps), elements, comps)


def extension_mapping(comp: Frame, pf: ProductFrame) -> EvidentialMapping:
    """Cylinder mapping: each component element goes to its tuple set with mass 1."""
    if comp not in pf.components:
        raise ValidationError(
            f"frame {comp.name!r} is not a component of product frame {pf.name!r}"
        )
    pos = pf.components.index(comp)
    masks = {label: 0 for label in comp.elements}
    combos = itertools.product(*(f.elements for f in pf.components))
    for i, combo in enumerate(combos):
        masks[combo[pos]] |= 1 << i
    images = {
        label: [(SubsetRef(pf, mask), 1.0)] for label, mask in masks.items()
    }
    return EvidentialMapping(f"extend_{comp.name}", comp, pf, images)


def fuse_marginals(masses: Sequence[MassFunction], pf: ProductFrame) -> MassFunction:
    """Lift one mass per component to the product frame and combine them."""
    if len(masses) != len(pf.components):
        raise ValidationError(
            f"expected {len(pf.components)} component masses, got {len(masses)}"
        )
    lifted = []
    for m, comp in zip(masses, pf.components):
        if m.frame != comp:
            raise FrameMismatchError(
                f"mass on frame {m.frame.name!r} does not match component {comp.name!r}"
            )
        lifted.append(propagate_mass(extension_mapping(comp, pf), m))
    fused = lifted[0]
    for nxt in lifted[1:]:
        fused, _conflict = combine_dempster(fused, nxt)
    return fused


def propagate_joint(
    masses: Sequence[MassFunction], pf: ProductFrame, g: Propagator
) -> MassFunction:
    """Fuse component evidence on the product frame, then push it through ``g``."""
    if g.source != pf:
        raise FrameMismatchError(
            f"mapping {g.name!r} starts at {g.source.name!r}, not at the product frame"
        )
    return propagate_mass(g, fuse_marginals(masses, pf))
