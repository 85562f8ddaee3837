"""Configuration parsing, validation, and canonical round-tripping."""

import pytest

from ulab.config import ConfigError, parse_config, render_config
from ulab.filters import FiniteDomain, OMEGA, PrincipalOracle

GOOD = """
schema_version: 1
seed: 42
structure:
  universe_size: 3
  relations:
    - name: le
      arity: 2
      tuples: [[0,0],[0,1],[0,2],[1,1],[1,2],[2,2]]
array:
  labels:
    - name: a
      domain: finite:3
      oracle: principal:1
    - name: w
      domain: omega
      oracle: factorial-tower
transfer:
  depth: 2
  max_nodes: 7
  signature: [le]
fubini:
  cases: 100
"""


def test_parse_good_config():
    cfg = parse_config(GOOD)
    assert cfg.seed == 42
    structure = cfg.build_structure()
    assert len(structure.universe) == 3
    assert structure.relation("le").arity == 2
    array = cfg.build_array()
    assert array.labels == ("a", "w")
    assert array.domain_of("a") == FiniteDomain(3)
    assert array.domain_of("w") == OMEGA
    assert array.oracle_of("a") == PrincipalOracle(FiniteDomain(3), 1)
    assert cfg.suite("transfer")["depth"] == 2
    assert cfg.suite("transfer")["structures"] == 8  # default fills in
    assert cfg.suite("fubini")["cases"] == 100


def test_round_trip_identity():
    cfg = parse_config(GOOD)
    text = render_config(cfg)
    cfg2 = parse_config(text)
    assert cfg2.to_dict() == cfg.to_dict()
    assert render_config(cfg2) == text


def test_definable_array_section():
    cfg = parse_config("schema_version: 1\nseed: 1\narray:\n  definable: {theta: 1, n: 2}\n")
    array = cfg.build_array()
    assert len(array.entries) == 2


@pytest.mark.parametrize(
    "text,field",
    [
        ("seed: 1\n", "schema_version"),
        ("schema_version: 2\nseed: 1\n", "schema_version"),
        ("schema_version: 1\n", "seed"),
        ("schema_version: 1\nseed: 1\nmystery: {}\n", "mystery"),
        ("schema_version: 1\nseed: 1\ntransfer: {bogus: 3}\n", "transfer.bogus"),
        ("schema_version: 1\nseed: 1\ntransfer: {depth: -1}\n", "transfer.depth"),
        (
            "schema_version: 1\nseed: 1\nstructure: {universe_size: 0}\n",
            "structure.universe_size",
        ),
        (
            "schema_version: 1\nseed: 1\nstructure:\n  universe_size: 2\n"
            "  relations:\n    - {name: R, arity: 2, tuples: [[0, 5]]}\n",
            "structure.relations[0].tuples[0]",
        ),
        (
            "schema_version: 1\nseed: 1\narray:\n  labels:\n"
            "    - {name: a, domain: 'finite:2', oracle: 'principal:5'}\n",
            "array.labels[0].oracle",
        ),
        (
            "schema_version: 1\nseed: 1\narray:\n  labels:\n"
            "    - {name: a, domain: 'finite:2', oracle: factorial-tower}\n",
            "array.labels.oracle",
        ),
        (
            "schema_version: 1\nseed: 1\ntransfer: {signature: [ghost]}\n",
            "transfer.signature",
        ),
    ],
)
def test_field_level_errors(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field


def test_unknown_relation_in_signature_names_field():
    text = (
        "schema_version: 1\nseed: 1\n"
        "structure:\n  universe_size: 2\n  relations:\n    - {name: R, arity: 1, tuples: [[0]]}\n"
        "transfer: {signature: [S]}\n"
    )
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == "transfer.signature"
    assert "S" in err.value.reason


def test_not_yaml():
    with pytest.raises(ConfigError):
        parse_config(":\n  - {")
    with pytest.raises(ConfigError):
        parse_config("- just\n- a\n- list\n")
