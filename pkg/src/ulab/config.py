"""Experiment configuration: a versioned YAML file describing one run.

The file is a nested key-value document.  Parsing validates the schema
before any computation and produces a normalized form whose rendering is
canonical: parse, render, parse again yields an identical configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml

from .filters import (
    OMEGA,
    ArraySpec,
    FactorialTowerOracle,
    FiniteDomain,
    PrincipalOracle,
    build_definable_array,
    make_array,
)
from .ultrapower import Relation, Structure

SCHEMA_VERSION = 1

_SUITE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "transfer": {
        "depth": 2,
        "max_nodes": 7,
        "structures": 8,
        "max_labels": 2,
        "max_domain": 3,
        "max_universe": 3,
        "max_relations": 2,
    },
    "fubini": {"cases": 1000, "max_labels": 3},
    "collapse": {"cases": 50, "max_labels": 2, "max_domain": 3, "max_universe": 3},
    "properness": {"samples": 100},
    "superstructure": {"universe_size": 2, "level": 1, "depth": 2, "max_nodes": 10},
    "array_build": {"theta": 1, "n": 2},
}


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, field_path: str, reason: str) -> None:
        self.field = field_path
        self.reason = reason
        super().__init__(f"config error at {field_path}: {reason}")


@dataclass
class ExperimentConfig:
    seed: int
    output_dir: Optional[str]
    structure: Optional[Dict[str, Any]]
    array: Optional[Dict[str, Any]]
    suites: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def suite(self, name: str) -> Dict[str, Any]:
        merged = dict(_SUITE_DEFAULTS.get(name, {}))
        merged.update(self.suites.get(name, {}))
        return merged

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "seed": self.seed}
        if self.output_dir is not None:
            data["output_dir"] = self.output_dir
        if self.structure is not None:
            data["structure"] = self.structure
        if self.array is not None:
            data["array"] = self.array
        for name in sorted(self.suites):
            if self.suites[name]:
                data[name] = self.suites[name]
        return data

    def build_structure(self) -> Optional[Structure]:
        if self.structure is None:
            return None
        rels = tuple(
            Relation(r["name"], r["arity"], frozenset(tuple(t) for t in r.get("tuples", [])))
            for r in self.structure.get("relations", [])
        )
        return Structure(tuple(range(self.structure["universe_size"])), rels)

    def build_array(self) -> Optional[ArraySpec]:
        if self.array is None:
            return None
        if "definable" in self.array:
            d = self.array["definable"]
            return build_definable_array(d["theta"], d["n"])
        entries = []
        for lab in self.array["labels"]:
            domain = _parse_domain(lab["domain"])
            oracle = _parse_oracle(lab["oracle"], domain)
            entries.append((lab["name"], domain, oracle))
        return make_array(entries)


def _parse_domain(text: str):
    if text == "omega":
        return OMEGA
    if isinstance(text, str) and text.startswith("finite:"):
        return FiniteDomain(int(text.split(":", 1)[1]))
    raise ConfigError("array.labels.domain", f"expected 'omega' or 'finite:<n>', got {text!r}")


def _parse_oracle(text: str, domain):
    if text == "factorial-tower":
        if domain != OMEGA:
            raise ConfigError("array.labels.oracle", "factorial-tower needs the omega domain")
        return FactorialTowerOracle()
    if isinstance(text, str) and text.startswith("principal:"):
        return PrincipalOracle(domain, int(text.split(":", 1)[1]))
    raise ConfigError(
        "array.labels.oracle", f"expected 'principal:<p>' or 'factorial-tower', got {text!r}"
    )


def _require(data: Dict[str, Any], key: str, kind, path: str):
    if key not in data:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    value = data[key]
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}.{key}" if path else key, "expected an integer")
    if not isinstance(value, kind):
        raise ConfigError(
            f"{path}.{key}" if path else key, f"expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _validate_structure(data: Any) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError("structure", "expected a mapping")
    size = _require(data, "universe_size", int, "structure")
    if size < 1:
        raise ConfigError("structure.universe_size", "must be at least 1")
    out: Dict[str, Any] = {"universe_size": size}
    relations: List[Dict[str, Any]] = []
    names = set()
    for i, rel in enumerate(data.get("relations", []) or []):
        path = f"structure.relations[{i}]"
        if not isinstance(rel, dict):
            raise ConfigError(path, "expected a mapping")
        name = _require(rel, "name", str, path)
        arity = _require(rel, "arity", int, path)
        if name in names:
            raise ConfigError(f"{path}.name", f"duplicate relation name {name!r}")
        names.add(name)
        if arity < 1:
            raise ConfigError(f"{path}.arity", "must be at least 1")
        tuples = []
        for j, t in enumerate(rel.get("tuples", []) or []):
            if not isinstance(t, list) or len(t) != arity:
                raise ConfigError(f"{path}.tuples[{j}]", f"expected a list of {arity} elements")
            for v in t:
                if not isinstance(v, int) or not 0 <= v < size:
                    raise ConfigError(f"{path}.tuples[{j}]", f"element {v!r} outside the universe")
            tuples.append(list(t))
        relations.append({"name": name, "arity": arity, "tuples": sorted(tuples)})
    if relations:
        out["relations"] = sorted(relations, key=lambda r: r["name"])
    return out


def _validate_array(data: Any) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError("array", "expected a mapping")
    if "definable" in data:
        d = data["definable"]
        if not isinstance(d, dict):
            raise ConfigError("array.definable", "expected a mapping")
        theta = _require(d, "theta", int, "array.definable")
        n = _require(d, "n", int, "array.definable")
        if theta < 1 or n < 1:
            raise ConfigError("array.definable", "theta and n must be positive")
        return {"definable": {"theta": theta, "n": n}}
    labels = data.get("labels")
    if not isinstance(labels, list) or not labels:
        raise ConfigError("array.labels", "expected a nonempty list")
    out = []
    seen = set()
    for i, lab in enumerate(labels):
        path = f"array.labels[{i}]"
        if not isinstance(lab, dict):
            raise ConfigError(path, "expected a mapping")
        name = _require(lab, "name", str, path)
        if name in seen:
            raise ConfigError(f"{path}.name", f"duplicate label {name!r}")
        seen.add(name)
        domain_text = _require(lab, "domain", str, path)
        oracle_text = _require(lab, "oracle", str, path)
        domain = _parse_domain(domain_text)
        try:
            _parse_oracle(oracle_text, domain)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}.oracle", str(exc))
        out.append({"name": name, "domain": domain_text, "oracle": oracle_text})
    return {"labels": out}


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"not valid YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("<document>", "expected a mapping at the top level")
    version = _require(data, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version}")
    seed = _require(data, "seed", int, "")
    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output_dir", "expected a string")
    structure = _validate_structure(data["structure"]) if "structure" in data else None
    array = _validate_array(data["array"]) if "array" in data else None
    suites: Dict[str, Dict[str, Any]] = {}
    for name, defaults in _SUITE_DEFAULTS.items():
        if name not in data:
            continue
        section = data[name]
        if section is None:
            section = {}
        if not isinstance(section, dict):
            raise ConfigError(name, "expected a mapping")
        for key, value in section.items():
            if key == "signature":
                if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                    raise ConfigError(f"{name}.signature", "expected a list of relation names")
                continue
            if key not in defaults:
                raise ConfigError(f"{name}.{key}", "unknown field")
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name}.{key}", "expected an integer")
            if value < 0:
                raise ConfigError(f"{name}.{key}", "must be non-negative")
        suites[name] = dict(section)
    known = {"schema_version", "seed", "output_dir", "structure", "array"} | set(_SUITE_DEFAULTS)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown section")
    cfg = ExperimentConfig(
        seed=seed, output_dir=output_dir, structure=structure, array=array, suites=suites
    )
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: ExperimentConfig) -> None:
    sig = cfg.suites.get("transfer", {}).get("signature")
    if sig is not None:
        if cfg.structure is None:
            raise ConfigError("transfer.signature", "a sub-signature needs an explicit structure")
        known = {r["name"] for r in cfg.structure.get("relations", [])}
        for name in sig:
            if name not in known:
                raise ConfigError("transfer.signature", f"unknown relation {name!r}")
    if cfg.array is not None and "labels" in cfg.array:
        for i, lab in enumerate(cfg.array["labels"]):
            if lab["domain"].startswith("finite:") and lab["oracle"].startswith("principal:"):
                size = int(lab["domain"].split(":", 1)[1])
                point = int(lab["oracle"].split(":", 1)[1])
                if not 0 <= point < size:
                    raise ConfigError(
                        f"array.labels[{i}].oracle", f"principal point {point} outside finite:{size}"
                    )


def render_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}")
    return parse_config(text)
