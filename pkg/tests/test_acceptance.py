"""Acceptance suite: one test per shipped criterion.

Every test prints a single ``AC<n>: PASS|FAIL`` line (visible with ``-s`` or
in captured output) and asserts at the criterion's stated tolerance.  Oracles
used here (joint enumeration, induced-union masses, averaging bounds) are
implemented locally and independently of the library code paths they check.
"""

import itertools
import random
import time
from math import fsum

from evmap import (
    EvidentialMapping,
    Frame,
    MassFunction,
    TotalConflictError,
    basic_matrix,
    combine_mappings,
    complete_ruleset,
    compose,
    parse_rules,
    posterior,
    propagate_mass,
    propagate_probability,
    render_ruleset,
    ruleset_to_mapping,
)
from helpers import (
    random_bayesian_mapping,
    random_frame,
    random_mapping,
    random_mass,
    random_multivalued_mapping,
    random_probability,
    run_cli,
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    line = f"{name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_ac01_alarm_call_prediction_golden():
    s = Frame("S", ("alarm_on", "alarm_off"))
    d = Frame("D", ("will_call", "will_not_call"))
    link = EvidentialMapping(
        "link",
        s,
        d,
        {
            "alarm_on": [
                (d.singleton("will_call"), 0.7),
                (d.singleton("will_not_call"), 0.3),
            ],
            "alarm_off": [(d.singleton("will_not_call"), 1.0)],
        },
    )
    p = MassFunction(
        s, [(s.singleton("alarm_on"), 0.2686), (s.singleton("alarm_off"), 0.7314)]
    )
    out = propagate_probability(link, p)  # warm-up run, also the checked values
    call = out.value(d.singleton("will_call"))
    no_call = out.value(d.singleton("will_not_call"))
    elapsed = min(
        _timed(lambda: propagate_probability(link, p)) for _ in range(5)
    )
    ok = (
        abs(call - 0.188) <= 1e-3
        and abs(no_call - 0.812) <= 1e-3
        and abs(call - 0.18802) <= 1e-9
        and abs(no_call - 0.81198) <= 1e-9
        and elapsed < 1e-3
    )
    _report("AC1", ok, f"m={call:.5f}/{no_call:.5f}, runtime {elapsed * 1e6:.0f}us")


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def test_ac02_sensor_matrix_golden(fixtures):
    rs = parse_rules((fixtures / "sensors.ev").read_text())
    g = ruleset_to_mapping(rs, rs.antecedent_frame, rs.conclusion_frame)
    bm = basic_matrix(g)
    h = rs.conclusion_frame
    expected_columns = (
        h.subset(["a1", "a2"]),
        h.subset(["a2", "a3"]),
        h.subset(["a3", "a4"]),
        h.subset(["a4", "a5"]),
        h.full(),
    )
    expected_rows = (
        (0.7, 0.0, 0.3, 0.0, 0.0),
        (0.0, 0.8, 0.0, 0.0, 0.2),
        (0.0, 0.0, 0.0, 0.9, 0.1),
    )
    ok = bm.columns == expected_columns and bm.rows == expected_rows
    _report("AC2", ok, "3x5 matrix, all 15 entries exact")


def test_ac03_smoke_alarm_completion_golden(fixtures):
    rs = parse_rules((fixtures / "smoke_alarm.ev").read_text())
    completed, theta_e, theta_h = complete_ruleset(rs)
    checks = [
        theta_e.size == 2 and theta_h.size == 2,
        theta_e.elements[0] == "alarm_rings",
        theta_h.elements[0] == "fire",
        len(completed.rules) == 2,
    ]
    r1, r2 = completed.rules
    checks.append(r1.antecedent == ("alarm_rings",))
    checks.append(
        [(t.target, round(t.strength, 9)) for t in r1.terms]
        == [(("fire",), 0.9), (None, 0.1)]
    )
    checks.append(r2.antecedent == ("!alarm_rings",))
    checks.append([(t.target, t.strength) for t in r2.terms] == [(None, 1.0)])
    checks.append(abs(r1.terms[1].strength - 0.1) <= 1e-9)
    _report("AC3", all(checks), "two rules, frames of sizes 2 and 2")


def test_ac04_complete_matrix_property_suite():
    rng = random.Random(20210)
    start = time.perf_counter()
    ok = True
    detail = ""
    for trial in range(500):
        source = random_frame(rng, "E", 2, 6)
        target = random_frame(rng, "H", 2, 5)
        g = random_mapping(rng, f"g{trial}", source, target)
        bm = basic_matrix(g)
        col_index = {col.mask: j for j, col in enumerate(bm.columns)}
        for title in source.all_subsets():
            row = bm.row(title)
            total = fsum(v for _, v in row.entries)
            if abs(total - 1.0) > 1e-9:
                ok, detail = False, f"row {title} sums to {total}"
                break
            if len(title) == 1:
                i = title.indices[0]
                expected = tuple(
                    (col, val) for col, val in zip(bm.columns, bm.rows[i]) if val != 0.0
                )
                if row.entries != expected:
                    ok, detail = False, f"singleton row {title} differs from matrix row"
                    break
            else:
                # independent averaging bounds per kept column
                union_mask = 0
                for i in title.indices:
                    for subset, _ in g.image(source.elements[i]):
                        union_mask |= subset.mask
                for subset, value in row.entries:
                    if subset.mask == union_mask:
                        continue
                    j = col_index.get(subset.mask)
                    if j is None:
                        ok, detail = False, f"unexpected column {subset} in row {title}"
                        break
                    vals = [bm.rows[i][j] for i in title.indices]
                    if not min(vals) - 1e-12 <= value <= max(vals) + 1e-12:
                        ok, detail = False, f"row {title} breaks bounds at {subset}"
                        break
                if not ok:
                    break
        if not ok:
            break
    elapsed = time.perf_counter() - start
    if ok and elapsed >= 10.0:
        ok, detail = False, f"suite took {elapsed:.1f}s"
    _report("AC4", ok, detail or f"500 mappings, all rows checked in {elapsed:.1f}s")


def test_ac05_propagation_always_yields_mass_functions():
    rng = random.Random(20211)
    ok = True
    detail = ""
    for trial in range(500):
        source = random_frame(rng, "E", 2, 6)
        target = random_frame(rng, "H", 2, 5)
        g = random_mapping(rng, f"g{trial}", source, target)
        m = random_mass(rng, source)
        out = propagate_mass(g, m)
        total = fsum(v for _, v in out.items())
        if abs(total - 1.0) > 1e-9:
            ok, detail = False, f"output total {total}"
            break
        if any(s.is_empty or v <= 0.0 for s, v in out.items()):
            ok, detail = False, "empty or non-positive focal element"
            break
        if out.frame != target:
            ok, detail = False, "wrong output frame"
            break
    _report("AC5", ok, detail or "500 random propagations valid")


def test_ac06_chain_composition_coherence():
    rng = random.Random(20212)
    ok = True
    detail = ""
    for trial in range(200):
        e = random_frame(rng, "E", 2, 5)
        f = random_frame(rng, "F", 2, 5)
        g_frame = random_frame(rng, "G", 2, 5)
        g1 = random_mapping(rng, "g1", e, f)
        g2 = random_mapping(rng, "g2", f, g_frame)
        m = random_mass(rng, e)
        sequential = propagate_mass(g2, propagate_mass(g1, m))
        composed = propagate_mass(compose(g1, g2), m)
        if not composed.approx_equals(sequential, tol=1e-9):
            ok, detail = False, f"two-link mismatch on trial {trial}"
            break
    if ok:
        for trial in range(50):
            frames = [random_frame(rng, name, 2, 5) for name in "EFGH"]
            maps = [
                random_mapping(rng, f"m{i}", frames[i], frames[i + 1]) for i in range(3)
            ]
            m = random_mass(rng, frames[0])
            left = propagate_mass(compose(compose(maps[0], maps[1]), maps[2]), m)
            right = propagate_mass(compose(maps[0], compose(maps[1], maps[2])), m)
            if not left.approx_equals(right, tol=1e-9):
                ok, detail = False, f"associativity mismatch on trial {trial}"
                break
    _report("AC6", ok, detail or "200 two-link chains, 50 three-link chains")


def _joint_enumeration_posterior(prior, g, observations):
    """Independent oracle: enumerate every joint assignment and condition."""
    bm = basic_matrix(g)
    cond = []
    for i in range(g.source.size):
        row = {}
        for j, col in enumerate(bm.columns):
            row[col.labels[0]] = bm.rows[i][j]
        cond.append(row)
    obs = tuple(observations)
    matched = {}
    for i, label in enumerate(g.source.elements):
        total = 0.0
        for assignment in itertools.product(g.target.elements, repeat=len(obs)):
            joint = prior.value(g.source.singleton(label))
            for element in assignment:
                joint *= cond[i].get(element, 0.0)
            if assignment == obs:
                total += joint
        matched[label] = total
    z = sum(matched.values())
    return {label: value / z for label, value in matched.items()}


def test_ac07_posterior_matches_joint_enumeration():
    rng = random.Random(20213)
    ok = True
    detail = ""
    for trial in range(200):
        hyp = random_frame(rng, "H", 2, 5)
        ev = random_frame(rng, "E", 2, 5)
        g = random_bayesian_mapping(rng, f"b{trial}", hyp, ev)
        prior = random_probability(rng, hyp)
        observations = [rng.choice(ev.elements) for _ in range(rng.randint(0, 4))]
        table = posterior(prior, g, observations)
        oracle = _joint_enumeration_posterior(prior, g, observations)
        for label, value in oracle.items():
            if abs(table.value(hyp.singleton(label)) - value) > 1e-9:
                ok, detail = False, f"deviation on trial {trial} at {label}"
                break
        if not ok:
            break
    _report("AC7", ok, detail or "200 random instances, <= 4 observations")


def test_ac08_joint_mapping_properties():
    rng = random.Random(20214)
    ok = True
    detail = ""
    done = 0
    while done < 200 and ok:
        e = random_frame(rng, "E", 2, 5)
        h = random_frame(rng, "H", 2, 5)
        g1 = random_mapping(rng, "g1", e, h)
        g2 = random_mapping(rng, "g2", e, h)
        try:
            a, _ = combine_mappings(g1, g2)
            b, _ = combine_mappings(g2, g1)
        except TotalConflictError:
            continue
        for label in e.elements:
            da, db = dict(a.image(label)), dict(b.image(label))
            if set(da) != set(db) or any(
                abs(da[k] - db[k]) > 1e-9 for k in da
            ):
                ok, detail = False, f"commutativity broke at {label}"
                break
        if ok:
            vacuous = EvidentialMapping(
                "vac", e, h, {x: [(h.full(), 1.0)] for x in e.elements}
            )
            identity, _ = combine_mappings(g1, vacuous)
            if identity != g1:
                ok, detail = False, "vacuous partner is not an exact identity"
        done += 1
    if ok:
        e = Frame("E", ("ev",))
        h = Frame("H", ("hyp", "nohyp"))
        g1 = EvidentialMapping(
            "g1", e, h, {"ev": [(h.singleton("hyp"), 0.9), (h.full(), 0.1)]}
        )
        g2 = EvidentialMapping(
            "g2", e, h, {"ev": [(h.singleton("hyp"), 0.8), (h.full(), 0.2)]}
        )
        combined, _ = combine_mappings(g1, g2)
        row = dict(combined.image("ev"))
        if (
            abs(row[h.singleton("hyp")] - 0.98) > 1e-12
            or abs(row[h.full()] - 0.02) > 1e-12
        ):
            ok, detail = False, "worked 0.98/0.02 row off beyond 1e-12"
    _report("AC8", ok, detail or "200 random pairs plus the worked row")


def test_ac09_multivalued_mappings_induce_union_masses():
    rng = random.Random(20215)
    ok = True
    detail = ""
    for trial in range(100):
        source = random_frame(rng, "E", 2, 5)
        target = random_frame(rng, "H", 2, 5)
        g = random_multivalued_mapping(rng, f"mv{trial}", source, target)
        m = random_mass(rng, source)
        induced: dict = {}
        for focal, value in m.items():
            mask = 0
            for label in focal.labels:
                mask |= g.image(label)[0][0].mask
            key = target.subset_from_mask(mask)
            induced[key] = induced.get(key, 0.0) + value
        if propagate_mass(g, m).as_dict() != induced:
            ok, detail = False, f"mismatch on trial {trial}"
            break
    _report("AC9", ok, detail or "100 multivalued mappings, exact agreement")


def test_ac10_fuse_command_matches_joint_enumeration(fixtures):
    cases = [
        (
            "product_map.ev",
            [("evidence_a.ev", {"a1": 0.6, "a2": 0.4}), ("evidence_b.ev", {"b1": 0.3, "b2": 0.7})],
            {
                ("a1", "b1"): {"h1": 0.9, "h2": 0.1},
                ("a1", "b2"): {"h1": 0.4, "h2": 0.6},
                ("a2", "b1"): {"h1": 0.25, "h2": 0.75},
                ("a2", "b2"): {"h1": 0.5, "h2": 0.5},
            },
        ),
        (
            "product_map_23.ev",
            [
                ("evidence_a.ev", {"a1": 0.6, "a2": 0.4}),
                ("evidence_c.ev", {"c1": 0.2, "c2": 0.5, "c3": 0.3}),
            ],
            {
                ("a1", "c1"): {"h1": 0.9, "h2": 0.1},
                ("a1", "c2"): {"h1": 0.4, "h2": 0.6},
                ("a1", "c3"): {"h1": 0.2, "h2": 0.8},
                ("a2", "c1"): {"h1": 0.25, "h2": 0.75},
                ("a2", "c2"): {"h1": 0.5, "h2": 0.5},
                ("a2", "c3"): {"h1": 0.35, "h2": 0.65},
            },
        ),
    ]
    ok = True
    detail = ""
    for map_name, components, rows in cases:
        result = run_cli(
            "fuse",
            "--components",
            *[str(fixtures / name) for name, _ in components],
            "--map",
            str(fixtures / map_name),
            "--format",
            "tsv",
        )
        if result.code != 0:
            ok, detail = False, f"{map_name}: exit {result.code}"
            break
        got = {}
        for line in result.out.splitlines():
            if line.startswith(("SET\t", "#")) or "\t" not in line:
                continue
            parts = line.split("\t")
            if len(parts) == 4:
                got[parts[0]] = float(parts[1])
        marginals = [dist for _, dist in components]
        for target in ("h1", "h2"):
            expected = sum(
                marginals[0][x] * marginals[1][y] * rows[(x, y)][target]
                for x, y in itertools.product(marginals[0], marginals[1])
            )
            if abs(got[f"{{{target}}}"] - expected) > 1e-9:
                ok, detail = False, f"{map_name}: {target} off"
                break
        if not ok:
            break
    _report("AC10", ok, detail or "2x2 and 2x3 products match enumeration")


def test_ac11_dsl_round_trip_and_completion_idempotence(fixtures, tmp_path):
    corpus = sorted((fixtures / "corpus").glob("*.ev"))
    ok = len(corpus) == 20
    detail = "" if ok else f"expected 20 corpus files, found {len(corpus)}"
    for path in corpus if ok else []:
        text = path.read_text()
        rendered = render_ruleset(parse_rules(text))
        again = render_ruleset(parse_rules(rendered))
        if again != rendered:
            ok, detail = False, f"{path.name}: canonical render is not a fixed point"
            break
        out1 = tmp_path / f"{path.stem}.once.ev"
        code1 = run_cli("complete", str(path), "--out", str(out1)).code
        out2 = tmp_path / f"{path.stem}.twice.ev"
        code2 = run_cli("complete", str(out1), "--out", str(out2)).code
        if code1 != 0 or code2 != 0:
            ok, detail = False, f"{path.name}: complete exited {code1}/{code2}"
            break
        if out1.read_bytes() != out2.read_bytes():
            ok, detail = False, f"{path.name}: completion is not byte-idempotent"
            break
    _report("AC11", ok, detail or "20-file corpus round-trips; completion idempotent")
