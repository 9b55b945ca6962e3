"""Shared test utilities: seeded random generators and a CLI harness."""

from __future__ import annotations

import contextlib
import io
import random
from typing import NamedTuple

from evmap import EvidentialMapping, Frame, MassFunction, SubsetRef
from evmap.cli import main


def random_frame(
    rng: random.Random, name: str, min_size: int = 2, max_size: int = 5
) -> Frame:
    size = rng.randint(min_size, max_size)
    return Frame(name, tuple(f"{name.lower()}{i}" for i in range(1, size + 1)))


def random_subset(rng: random.Random, frame: Frame) -> SubsetRef:
    return frame.subset_from_mask(rng.randrange(1, 1 << frame.size))


def random_mass(rng: random.Random, frame: Frame, max_focal: int = 4) -> MassFunction:
    count = rng.randint(1, min(max_focal, (1 << frame.size) - 1))
    masks = rng.sample(range(1, 1 << frame.size), count)
    weights = [rng.uniform(0.05, 1.0) for _ in masks]
    total = sum(weights)
    return MassFunction(
        frame,
        [(frame.subset_from_mask(m), w / total) for m, w in zip(masks, weights)],
    )


def random_probability(
    rng: random.Random, frame: Frame, positive: bool = True
) -> MassFunction:
    weights = [rng.uniform(0.05 if positive else 0.0, 1.0) for _ in frame.elements]
    if not positive:
        # keep at least one strictly positive weight
        weights[rng.randrange(len(weights))] += 0.5
    total = sum(weights)
    pairs = [
        (frame.singleton(label), w / total)
        for label, w in zip(frame.elements, weights)
        if w > 0.0
    ]
    return MassFunction(frame, pairs)


def random_mapping(
    rng: random.Random,
    name: str,
    source: Frame,
    target: Frame,
    max_terms: int = 3,
) -> EvidentialMapping:
    images = {}
    for label in source.elements:
        count = rng.randint(1, min(max_terms, (1 << target.size) - 1))
        masks = rng.sample(range(1, 1 << target.size), count)
        weights = [rng.uniform(0.05, 1.0) for _ in masks]
        total = sum(weights)
        images[label] = [
            (target.subset_from_mask(m), w / total) for m, w in zip(masks, weights)
        ]
    return EvidentialMapping(name, source, target, images)


def random_multivalued_mapping(
    rng: random.Random, name: str, source: Frame, target: Frame
) -> EvidentialMapping:
    images = {
        label: [(random_subset(rng, target), 1.0)] for label in source.elements
    }
    return EvidentialMapping(name, source, target, images)


def random_bayesian_mapping(
    rng: random.Random, name: str, source: Frame, target: Frame
) -> EvidentialMapping:
    images = {}
    for label in source.elements:
        row = random_probability(rng, target)
        images[label] = list(row.items())
    return EvidentialMapping(name, source, target, images)


class CliResult(NamedTuple):
    code: int
    out: str
    err: str


def run_cli(*argv: str) -> CliResult:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return CliResult(code, out.getvalue(), err.getvalue())
