"""Batch experiment suites behind the command-line runner.

Each suite returns a SuiteResult: a pass flag, human-readable summary
lines, one machine-readable row per check, and an optional figure
description.  All randomness is derived from the configured seed through
``rng.derive``, so results are reproducible case by case.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import rng as rng_mod
from .config import ConfigError, ExperimentConfig
from .filters import (
    OMEGA,
    ArraySpec,
    FactorialTowerOracle,
    FiniteDomain,
    PrincipalOracle,
    Verdict,
    build_definable_array,
    make_array,
)
from .germs import parse_germ
from .index_algebra import SupportedSet, from_dnf, fubini_member
from .logic import transfer_check
from .periodic import PeriodicSet
from .superstructure import (
    StarVElement,
    bounded_transfer_check,
    build_levels,
    identify_as_subset,
)
from .ultrapower import (
    Relation,
    Structure,
    UltrapowerModel,
    enumerate_functions,
    principal_collapse,
    properness_witness,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    summary: List[str]
    rows: List[Tuple[str, str, str]]  # (case id, verdict, detail)
    detail_lines: List[str] = field(default_factory=list)
    figure: Optional[Dict[str, Any]] = None


# -- seeded generators ---------------------------------------------------------


def random_structure(r, max_universe: int = 3, max_relations: int = 2) -> Structure:
    size = r.randint(1, max_universe)
    universe = tuple(range(size))
    relations = []
    for i in range(r.randint(1, max_relations)):
        arity = r.randint(1, 2)
        tuples = frozenset(
            t for t in itertools.product(universe, repeat=arity) if r.random() < 0.5
        )
        relations.append(Relation(f"R{i}", arity, tuples))
    return Structure(universe, tuple(relations))


def random_principal_array(r, max_labels: int = 2, max_domain: int = 3) -> ArraySpec:
    k = r.randint(1, max_labels)
    entries = []
    for i in range(k):
        n = r.randint(1, max_domain)
        dom = FiniteDomain(n)
        entries.append((f"a{i}", dom, PrincipalOracle(dom, r.randrange(n))))
    return make_array(entries)


def random_mixed_array(r, max_labels: int = 3, max_domain: int = 3) -> ArraySpec:
    k = r.randint(1, max_labels)
    entries = []
    for i in range(k):
        if r.random() < 0.5:
            entries.append((f"a{i}", OMEGA, FactorialTowerOracle()))
        else:
            n = r.randint(1, max_domain)
            dom = FiniteDomain(n)
            entries.append((f"a{i}", dom, PrincipalOracle(dom, r.randrange(n))))
    return make_array(entries)


def random_periodic_set(r) -> PeriodicSet:
    period = r.randint(1, 4)
    mask = frozenset(v for v in range(period) if r.random() < 0.5)
    threshold = r.randint(0, 3)
    overrides = {n: r.random() < 0.5 for n in range(threshold)}
    return PeriodicSet(period, mask, threshold, overrides)


def random_supported_set(r, array: ArraySpec) -> SupportedSet:
    clauses = []
    for _ in range(r.randint(0, 3)):
        clause = []
        for label in array.labels:
            if r.random() < 0.6:
                dom = array.domain_of(label)
                if isinstance(dom, FiniteDomain):
                    values = frozenset(v for v in range(dom.size) if r.random() < 0.5)
                    clause.append((label, values))
                else:
                    clause.append((label, random_periodic_set(r)))
        clauses.append(clause)
    return from_dnf(array, clauses)


def all_principal_arrays(max_labels: int, max_domain: int) -> List[ArraySpec]:
    """Every all-principal array with up to max_labels coordinates, each
    coordinate's domain size and principal point chosen independently."""
    arrays: List[ArraySpec] = []
    for k in range(0, max_labels + 1):
        for sizes in itertools.product(range(1, max_domain + 1), repeat=k):
            for points in itertools.product(*[range(n) for n in sizes]):
                entries = [
                    (f"a{i}", FiniteDomain(sizes[i]), PrincipalOracle(FiniteDomain(sizes[i]), points[i]))
                    for i in range(k)
                ]
                arrays.append(make_array(entries))
    return arrays


def describe_structure(s: Structure) -> str:
    rels = "; ".join(
        f"{r.name}/{r.arity}={sorted(r.tuples)}" for r in s.relations
    )
    return f"universe={len(s.universe)}" + (f" {rels}" if rels else "")


def describe_array(a: ArraySpec) -> str:
    if not a.entries:
        return "(empty array)"
    return ", ".join(f"{e.label}:{e.domain}/{e.oracle}" for e in a.entries)


# -- transfer ------------------------------------------------------------------


def run_transfer(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("transfer")
    explicit_structure = cfg.build_structure()
    explicit_array = cfg.build_array()
    if explicit_structure is not None:
        structures = [explicit_structure]
    else:
        structures = [
            random_structure(
                rng_mod.derive(cfg.seed, "transfer", "structure", i),
                params["max_universe"],
                params["max_relations"],
            )
            for i in range(params["structures"])
        ]
    if explicit_array is not None:
        arrays = [explicit_array]
    else:
        arrays = all_principal_arrays(params["max_labels"], params["max_domain"])
    signature = params.get("signature")

    rows: List[Tuple[str, str, str]] = []
    detail: List[str] = []
    fig_labels: List[str] = []
    fig_agree: List[int] = []
    fig_cex: List[int] = []
    passed = True
    total_sentences = 0
    pruning_shown = False
    for si, structure in enumerate(structures):
        agree_s = 0
        cex_s = 0
        for ai, array in enumerate(arrays):
            model = UltrapowerModel(structure, array)
            report = transfer_check(
                structure, model, params["depth"], params["max_nodes"], signature
            )
            if not pruning_shown:
                detail.extend(f"pruning: {rule}" for rule in report.pruning)
                pruning_shown = True
            case = f"s{si:02d}-a{ai:02d}"
            ok = report.ok
            passed &= ok
            total_sentences += report.total
            agree_s += report.agreements
            cex_s += len(report.counterexamples)
            rows.append(
                (
                    case,
                    "pass" if ok else "fail",
                    f"sentences={report.total} agreements={report.agreements} "
                    f"counterexamples={len(report.counterexamples)}",
                )
            )
            detail.append(f"case {case}: {describe_structure(structure)} | {describe_array(array)}")
            for base, star, text in report.rows:
                detail.append(f"{'true' if base else 'false'} {star} {text}")
        fig_labels.append(f"s{si:02d}")
        fig_agree.append(agree_s)
        fig_cex.append(cex_s)

    summary = [
        f"structures: {len(structures)}",
        f"arrays: {len(arrays)}",
        f"sentence checks: {total_sentences}",
        f"counterexamples: {sum(c for c in fig_cex)}",
        f"result: {'PASS' if passed else 'FAIL'}",
    ]
    figure = {
        "kind": "stacked_bars",
        "title": "transfer check: sentence verdicts per structure",
        "xlabel": "structure",
        "ylabel": "sentences",
        "labels": fig_labels,
        "series": [("agreements", fig_agree), ("counterexamples", fig_cex)],
    }
    return SuiteResult("transfer-check", passed, summary, rows, detail, figure)


# -- fubini axioms -------------------------------------------------------------


def run_fubini(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("fubini")
    cases = params["cases"]
    rows: List[Tuple[str, str, str]] = []
    axis = {"dichotomy": 0, "intersection": 0, "upward": 0, "support_ext": 0}
    undecidable = 0
    passed = True
    for c in range(cases):
        r = rng_mod.derive(cfg.seed, "fubini", c)
        array = random_mixed_array(r, params["max_labels"])
        x = random_supported_set(r, array)
        y = random_supported_set(r, array)
        vx = fubini_member(x)
        vxc = fubini_member(x.complement())
        vy = fubini_member(y)
        for v in (vx, vxc, vy):
            if v is Verdict.UNDECIDABLE:
                undecidable += 1
        checks: Dict[str, bool] = {}
        checks["dichotomy"] = (vx is Verdict.IN) != (vxc is Verdict.IN)
        if vx is Verdict.IN and vy is Verdict.IN:
            checks["intersection"] = fubini_member(x & y) is Verdict.IN
        else:
            checks["intersection"] = True
        bigger = x | y
        if vx is Verdict.IN:
            checks["upward"] = fubini_member(bigger) is Verdict.IN
        else:
            checks["upward"] = True
        checks["support_ext"] = fubini_member(x, support=array.labels) == vx
        ok = all(checks.values())
        passed &= ok
        for name, good in checks.items():
            if good:
                axis[name] += 1
        rows.append(
            (
                f"case{c:04d}",
                "pass" if ok else "fail",
                " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
                + f" array=[{describe_array(array)}]",
            )
        )
    passed &= undecidable == 0
    summary = [
        f"cases: {cases}",
        *(f"{k} held: {v}/{cases}" for k, v in axis.items()),
        f"undecidable verdicts: {undecidable}",
        f"result: {'PASS' if passed else 'FAIL'}",
    ]
    figure = {
        "kind": "bars",
        "title": "Fubini ultrafilter axioms over mixed arrays",
        "xlabel": "axiom",
        "ylabel": "cases passed",
        "labels": list(axis),
        "values": [axis[k] for k in axis],
        "ymax": cases,
    }
    return SuiteResult("fubini-check", passed, summary, rows, [], figure)


# -- principal collapse ---------------------------------------------------------


def run_collapse(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("collapse")
    cases = params["cases"]
    rows: List[Tuple[str, str, str]] = []
    detail: List[str] = []
    sizes: List[int] = []
    passed = True
    explicit_structure = cfg.build_structure()
    explicit_array = cfg.build_array()
    for c in range(cases):
        r = rng_mod.derive(cfg.seed, "collapse", c)
        structure = explicit_structure or random_structure(
            r, params["max_universe"], params["max_relations"] if "max_relations" in params else 2
        )
        array = explicit_array or random_principal_array(
            r, params["max_labels"], params["max_domain"]
        )
        model = UltrapowerModel(structure, array)
        report = principal_collapse(model, rng=rng_mod.derive(cfg.seed, "collapse", c, "sample"))
        ok = report.ok
        passed &= ok
        sizes.append(report.function_count)
        rows.append(
            (
                f"case{c:03d}",
                "pass" if ok else "fail",
                f"functions={report.function_count} mode={report.mode} "
                f"structure=[{describe_structure(structure)}] array=[{describe_array(array)}]",
            )
        )
        detail.append(f"case{c:03d}: {report.summary()}")
        detail.extend(f"case{c:03d}: {line}" for line in report.lines)
    summary = [
        f"cases: {cases}",
        f"isomorphisms verified: {sum(1 for _, v, _ in rows if v == 'pass')}/{cases}",
        f"result: {'PASS' if passed else 'FAIL'}",
    ]
    figure = {
        "kind": "bars",
        "title": "principal collapse: functions checked per case",
        "xlabel": "case",
        "ylabel": "functions",
        "labels": [f"{i:03d}" for i in range(cases)],
        "values": sizes,
        "sparse_ticks": True,
    }
    return SuiteResult("collapse-check", passed, summary, rows, detail, figure)


# -- properness -----------------------------------------------------------------


def run_properness(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("properness")
    array = cfg.build_array()
    if array is None:
        array = make_array([("w", OMEGA, FactorialTowerOracle())])
    report = properness_witness(array, sample=range(params["samples"]))
    rows: List[Tuple[str, str, str]] = []
    for r, v in report.singleton_verdicts:
        rows.append(
            (
                f"singleton-{r:03d}",
                "pass" if v is Verdict.OUT else "fail",
                f"{{x({report.label}) = {r}}} -> {v}",
            )
        )
    for r, v in report.cofinite_verdicts:
        rows.append(
            (
                f"cofinal-{r:03d}",
                "pass" if v is Verdict.IN else "fail",
                f"{{x({report.label}) > {r}}} -> {v}",
            )
        )
    summary = [
        f"witness: projection on coordinate {report.label}",
        f"singleton queries rejected: "
        f"{sum(1 for _, v in report.singleton_verdicts if v is Verdict.OUT)}"
        f"/{len(report.singleton_verdicts)}",
        f"cofinal queries accepted: "
        f"{sum(1 for _, v in report.cofinite_verdicts if v is Verdict.IN)}"
        f"/{len(report.cofinite_verdicts)}",
        f"result: {'PASS' if report.ok else 'FAIL'}",
    ]
    xs = [r for r, _ in report.singleton_verdicts]
    figure = {
        "kind": "step",
        "title": f"properness witness on {report.label}",
        "xlabel": "standard value r",
        "ylabel": "verdict (1 = In)",
        "x": xs,
        "series": [
            ("{x = r} membership", [1 if v is Verdict.IN else 0 for _, v in report.singleton_verdicts]),
            ("{x > r} membership", [1 if v is Verdict.IN else 0 for _, v in report.cofinite_verdicts]),
        ],
    }
    return SuiteResult("properness", report.ok, summary, rows, report.lines, figure)


# -- superstructure --------------------------------------------------------------


def run_superstructure(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("superstructure")
    size = params["universe_size"]
    level = params["level"]
    structure = Structure(tuple(range(size)))
    array = cfg.build_array()
    if array is None:
        array = make_array([("l", FiniteDomain(2), PrincipalOracle(FiniteDomain(2), 0))])
    if not array.all_principal():
        raise ConfigError("superstructure", "needs an all-principal array")
    model = UltrapowerModel(structure, array)

    levels = build_levels(structure, 2)
    rows: List[Tuple[str, str, str]] = [
        (f"level-size-{i}", "info", f"|V_{i}| = {len(lv)}") for i, lv in enumerate(levels)
    ]
    detail: List[str] = []
    passed = True

    report = bounded_transfer_check(structure, model, level, params["depth"], params["max_nodes"])
    passed &= report.ok
    rows.append(
        (
            "bounded-transfer",
            "pass" if report.ok else "fail",
            f"level={level} sentences={report.total} counterexamples={len(report.counterexamples)}",
        )
    )
    detail.extend(report.lines())

    # Identification extensionality: distinct set-like classes must have
    # distinct extensions; equal extensions must mean equal classes.
    ident_ok = True
    checked = 0
    if size <= 2:
        functions = enumerate_functions(array, levels[1])
        identified = []
        for f in functions:
            ident = identify_as_subset(model, levels, StarVElement(f, 1))
            if ident.kind == "subset":
                signature = frozenset(
                    sv.function.eval(array.principal_point()).render() for sv in ident.extension
                )
                identified.append((f, signature))
        for i in range(len(identified)):
            for j in range(i + 1, len(identified)):
                fi, sig_i = identified[i]
                fj, sig_j = identified[j]
                same_class = StarVElement(fi, 1) == StarVElement(fj, 1)
                if (sig_i == sig_j) != same_class:
                    ident_ok = False
                checked += 1
        passed &= ident_ok
        rows.append(
            (
                "identification-extensionality",
                "pass" if ident_ok else "fail",
                f"set-like classes={len(identified)} pairs checked={checked}",
            )
        )

    summary = [
        "level sizes: " + ", ".join(f"|V_{i}| = {len(lv)}" for i, lv in enumerate(levels)),
        f"bounded transfer at level {level}: {report.total} sentences, "
        f"{len(report.counterexamples)} counterexamples",
        f"identification extensionality pairs: {checked}",
        f"result: {'PASS' if passed else 'FAIL'}",
    ]
    figure = {
        "kind": "bars",
        "title": f"superstructure levels over a {size}-atom base",
        "xlabel": "level",
        "ylabel": "elements",
        "labels": [f"V_{i}" for i in range(len(levels))],
        "values": [len(lv) for lv in levels],
    }
    return SuiteResult("superstructure-check", passed, summary, rows, detail, figure)


# -- definable array --------------------------------------------------------------


def run_array_build(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.suite("array_build")
    if cfg.array is not None and "definable" in cfg.array:
        theta = cfg.array["definable"]["theta"]
        n = cfg.array["definable"]["n"]
    else:
        theta, n = params["theta"], params["n"]
    array = build_definable_array(theta, n)
    rows: List[Tuple[str, str, str]] = []
    points: List[int] = []
    assert array.payloads is not None
    for entry, payload in zip(array.entries, array.payloads):
        rendered = "; ".join(
            f"{g}->{{{','.join(str(v) for v in sorted(s))}}}" for g, s in enumerate(payload)
        )
        rows.append((entry.label, "ok", f"map {rendered} oracle={entry.oracle}"))
        points.append(entry.oracle.point)  # type: ignore[union-attr]
    summary = [
        f"theta={theta} domain_size={n}",
        f"qualifying maps: {len(array.entries)}",
        f"result: PASS",
    ]
    figure = {
        "kind": "scatter",
        "title": f"definable array (theta={theta}, N={n}): label order vs principal point",
        "xlabel": "label position",
        "ylabel": "principal point",
        "x": list(range(len(points))),
        "y": points,
    }
    return SuiteResult("array-build", True, summary, rows, [], figure)


# -- germ expressions --------------------------------------------------------------


def run_germ(action: str, exprs: Sequence[str]) -> SuiteResult:
    if action == "classify":
        if len(exprs) != 1:
            raise ConfigError("germ", "classify takes exactly one expression")
        g = parse_germ(exprs[0])
        text = str(g.classify())
        rows = [("classify", "ok", f"{g.render()} -> {text}")]
        summary = [text]
    elif action == "compare":
        if len(exprs) != 2:
            raise ConfigError("germ", "compare takes exactly two expressions")
        f, g = parse_germ(exprs[0]), parse_germ(exprs[1])
        text = str(f.compare(g))
        rows = [("compare", "ok", f"{f.render()} vs {g.render()} -> {text}")]
        summary = [text]
    elif action == "eval":
        if len(exprs) != 1:
            raise ConfigError("germ", "eval takes exactly one expression")
        g = parse_germ(exprs[0])
        text = g.render()
        rows = [("eval", "ok", f"canonical form: {text}")]
        summary = [text]
    else:
        raise ConfigError("germ", f"unknown action {action!r}; use eval, compare or classify")

    curves = []
    for i, expr in enumerate(exprs):
        g = parse_germ(expr)
        xs, ys = [], []
        for x in range(1, 41):
            try:
                ys.append(float(g.eval(x)))
                xs.append(x)
            except ZeroDivisionError:
                continue
        curves.append((g.render(), xs, ys))
    figure = {
        "kind": "curves",
        "title": "germ values along n",
        "xlabel": "n",
        "ylabel": "value",
        "series": curves,
    }
    return SuiteResult("germ", True, summary, rows, [], figure)
