"""
Instance files: {"n": int, "kind": str, "params": {...}} with an optional "meta" block.
Serialisation uses sorted keys so gen -> load -> save is byte-stable.
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

from utils.errors import ConfigError
from .instances import INSTANCE_KINDS, CoverageInstance, CutInstance, ExplicitInstance, \
    ModularPlusConcaveInstance, SubmodularInstance
from .subsets import Subset


def instance_to_dict(inst: SubmodularInstance) -> Dict[str, Any]:
    if inst.kind not in INSTANCE_KINDS:
        raise ConfigError(f"Instances of kind {inst.kind!r} cannot be serialised")
    data: Dict[str, Any] = {"n": inst.n, "kind": inst.kind, "params": inst.params()}
    planted = getattr(inst, "planted_minimizer", None)
    if planted is not None:
        data["meta"] = {"planted_minimizer": planted.to_list()}
    return data


def instance_from_dict(data: Dict[str, Any]) -> SubmodularInstance:
    """Ingest an instance description; raises ConfigError on malformed input."""
    if not isinstance(data, dict):
        raise ConfigError("Instance description must be a JSON object")
    try:
        n = int(data["n"])
        kind = data["kind"]
        params = data.get("params", {})
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed instance description: {e}") from e

    try:
        if kind == CutInstance.kind:
            inst = CutInstance(n, params.get("edges", []), params.get("weights"))
        elif kind == CoverageInstance.kind:
            inst = CoverageInstance(params["covers"], params["item_weights"], params.get("penalty"))
        elif kind == ModularPlusConcaveInstance.kind:
            inst = ModularPlusConcaveInstance(params["modular"], params.get("concave"))
        elif kind == ExplicitInstance.kind:
            inst = ExplicitInstance(n, params["table"])
        else:
            raise ConfigError(f"Unknown instance kind: {kind}")
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Missing or malformed parameters for kind {kind}: {e}") from e

    if inst.n != n:
        raise ConfigError(f"Declared n={n} does not match parameters (n={inst.n})")

    planted = data.get("meta", {}).get("planted_minimizer")
    if planted is not None:
        inst.planted_minimizer = Subset(n, planted)
    return inst


def dumps_instance(inst: SubmodularInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n"


def save_instance(inst: SubmodularInstance, path: Union[str, Path]):
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


def load_instance(path: Union[str, Path]) -> SubmodularInstance:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Instance file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Instance file {path} is not valid JSON: {e}") from e
    return instance_from_dict(data)
