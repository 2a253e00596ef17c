"""
Kernel spec documents (JSON).

    {
      "group": {"kind": "real"},
      "kernel": {"kind": "tensor", "spatial": {"kind": "monomial", "n": 1}, "temporal": {"kind": "exp_decay", "a": 1}},
      "meta": {...}
    }

Product-sphere documents carry "bivariate" instead of "group"/"kernel". Every node is validated
before anything is computed; errors name the JSON path of the offending node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from src.domain.errors import DomainError, SpecError
from src.groups.models import GroupModel
from src.groups.pd_functions import CharacterMix, Constant, Cosine, ExpDecay, Gaussian, PDFunctionSpec, Triangular
from src.kernels.spec import (
    Expansion,
    KernelSpec,
    Monomial,
    Product,
    RawForm,
    RawSpatial,
    Scale,
    ScaledShift,
    SeparableSum,
    SpatialFactor,
    Sum,
    TensorProduct,
    Ultraspherical,
)
from src.schoenberg.sequence import INFINITY, NumericProfile, SchoenbergSequence, WeightedSum


@dataclass(frozen=True)
class SpecDocument:
    group: GroupModel | None
    kernel: KernelSpec | None
    bivariate: SeparableSum | None = None
    meta: dict[str, Any] = field(default_factory=dict, hash=False)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _object(v: Any, path: str) -> dict[str, Any]:
    if not isinstance(v, dict):
        raise SpecError(f"expected an object; got {type(v).__name__}", path)
    return v


def _array(v: Any, path: str) -> list[Any]:
    if not isinstance(v, list):
        raise SpecError(f"expected an array; got {type(v).__name__}", path)
    return v


def _kind(node: dict[str, Any], path: str) -> str:
    kind = node.get("kind")
    if not isinstance(kind, str) or not kind:
        raise SpecError("missing string field 'kind'", f"{path}.kind")
    return kind


def _number(node: dict[str, Any], key: str, path: str, *, default: float | None = None) -> float:
    if key not in node:
        if default is not None:
            return default
        raise SpecError(f"missing number field {key!r}", f"{path}.{key}")
    v = node[key]
    if not _is_number(v):
        raise SpecError(f"{key} must be a number", f"{path}.{key}")
    return float(v)


def _integer(node: dict[str, Any], key: str, path: str, *, minimum: int = 0) -> int:
    v = node.get(key)
    if not _is_number(v) or int(v) != v:
        raise SpecError(f"{key} must be an integer", f"{path}.{key}")
    if int(v) < minimum:
        raise SpecError(f"{key} must be >= {minimum}", f"{path}.{key}")
    return int(v)


def _guarded(path: str, build: Callable[[], Any]) -> Any:
    """Run a constructor, re-raising domain errors with the node's path."""
    try:
        return build()
    except SpecError as exc:
        # Node constructors raise without a location; attach this node's path.
        if exc.path == "$" and path != "$":
            raise SpecError(exc.detail, path) from exc
        raise
    except DomainError as exc:
        raise SpecError(str(exc), path) from exc


def parse_dimension(v: Any, path: str = "$.d") -> int | float:
    if isinstance(v, str) and v.lower() in ("infinity", "inf"):
        return INFINITY
    if not _is_number(v) or int(v) != v or int(v) < 1:
        raise SpecError(f"dimension must be an integer >= 1 or \"infinity\"; got {v!r}", path)
    return int(v)


def parse_group(v: Any, path: str = "$.group") -> GroupModel:
    node = _object(v, path)
    kind = _kind(node, path)
    if kind == "real":
        return GroupModel.real_line()
    if kind == "integers":
        return GroupModel.integers()
    if kind == "cyclic":
        return _guarded(path, lambda: GroupModel.cyclic(_integer(node, "m", path, minimum=1)))
    if kind == "real_vector":
        return _guarded(path, lambda: GroupModel.real_vector(_integer(node, "k", path, minimum=1)))
    raise SpecError(f"unknown group kind {kind!r}", f"{path}.kind")


def parse_spatial(v: Any, path: str) -> SpatialFactor:
    node = _object(v, path)
    kind = _kind(node, path)
    if kind == "ultraspherical":
        return Ultraspherical(d=_integer(node, "d", path, minimum=1), n=_integer(node, "n", path))
    if kind == "monomial":
        return Monomial(n=_integer(node, "n", path))
    if kind == "scaled_shift":
        return ScaledShift()
    if kind == "raw":
        name = node.get("name")
        if not isinstance(name, str):
            raise SpecError("raw spatial form needs a string 'name'", f"{path}.name")
        params = _object(node.get("params", {}), f"{path}.params")
        return _guarded(path, lambda: RawSpatial(name=name, params=params))
    raise SpecError(f"unknown spatial kind {kind!r}", f"{path}.kind")


def _frequency(v: Any, path: str) -> Any:
    if isinstance(v, list):
        if not all(_is_number(c) for c in v):
            raise SpecError("frequency vector must hold numbers", path)
        return tuple(float(c) for c in v)
    if not _is_number(v):
        raise SpecError("frequency must be a number or an array of numbers", path)
    return v


def parse_phi(v: Any, group: GroupModel, path: str) -> Any:
    """A coefficient function: a PD form, a sampled profile, or a weighted sum of these."""
    node = _object(v, path)
    kind = _kind(node, path)
    builders: dict[str, Callable[[], PDFunctionSpec]] = {
        "exp_decay": lambda: ExpDecay(group, _number(node, "a", path)),
        "gaussian": lambda: Gaussian(group, _number(node, "a", path)),
        "cosine": lambda: Cosine(group, _frequency(node.get("omega"), f"{path}.omega")),
        "triangular": lambda: Triangular(group, _number(node, "c", path)),
        "constant": lambda: Constant(group, _number(node, "r", path, default=1.0)),
    }
    if kind in builders:
        return _guarded(path, builders[kind])
    if kind == "character_mix":
        terms = []
        for i, term in enumerate(_array(node.get("terms"), f"{path}.terms")):
            tpath = f"{path}.terms[{i}]"
            term = _object(term, tpath)
            terms.append((_number(term, "weight", tpath), _frequency(term.get("frequency"), f"{tpath}.frequency")))
        return _guarded(path, lambda: CharacterMix(group, tuple(terms)))
    if kind == "profile":
        raw_grid = _array(node.get("grid"), f"{path}.grid")
        grid = [_guarded(f"{path}.grid[{i}]", lambda u=u: group.from_json(u)) for i, u in enumerate(raw_grid)]
        re = _array(node.get("re"), f"{path}.re")
        im = _array(node.get("im", [0.0] * len(re)), f"{path}.im")
        if len(re) != len(grid) or len(im) != len(grid):
            raise SpecError("grid, re and im must have equal lengths", path)
        if not all(_is_number(x) for x in re + im):
            raise SpecError("profile values must be numbers", path)
        samples = [complex(a, b) for a, b in zip(re, im)]
        return _guarded(path, lambda: NumericProfile(group=group, grid=tuple(grid), samples=samples))
    if kind == "weighted_sum":
        terms = []
        for i, term in enumerate(_array(node.get("terms"), f"{path}.terms")):
            tpath = f"{path}.terms[{i}]"
            term = _object(term, tpath)
            terms.append((_number(term, "weight", tpath), parse_phi(term.get("phi"), group, f"{tpath}.phi")))
        return WeightedSum(group=group, terms=tuple(terms))
    raise SpecError(f"unknown temporal kind {kind!r}", f"{path}.kind")


def _parse_expansion(node: dict[str, Any], group: GroupModel, path: str) -> Expansion:
    d = parse_dimension(node.get("d"), f"{path}.d")
    entries = []
    for i, entry in enumerate(_array(node.get("entries"), f"{path}.entries")):
        epath = f"{path}.entries[{i}]"
        entry = _object(entry, epath)
        entries.append((_integer(entry, "n", epath), parse_phi(entry.get("phi"), group, f"{epath}.phi")))
    n_max = _integer(node, "n_max", path) if "n_max" in node else None
    tail = _number(node, "tail_bound", path) if node.get("tail_bound") is not None else None
    seq = _guarded(
        path, lambda: SchoenbergSequence.from_entries(d, group, entries, n_max=n_max, tail_bound=tail)
    )
    return Expansion(seq)


def parse_kernel(v: Any, group: GroupModel, path: str = "$.kernel") -> KernelSpec:
    node = _object(v, path)
    kind = _kind(node, path)
    if kind == "tensor":
        spatial = parse_spatial(node.get("spatial"), f"{path}.spatial")
        temporal = parse_phi(node.get("temporal"), group, f"{path}.temporal")
        if not isinstance(temporal, PDFunctionSpec):
            raise SpecError("tensor products take a parametric temporal form", f"{path}.temporal")
        return TensorProduct(spatial, temporal)
    if kind in ("sum", "product"):
        key = "terms" if kind == "sum" else "factors"
        children = tuple(
            parse_kernel(child, group, f"{path}.{key}[{i}]")
            for i, child in enumerate(_array(node.get(key), f"{path}.{key}"))
        )
        cls = Sum if kind == "sum" else Product
        return _guarded(path, lambda: cls(children))
    if kind == "scale":
        r = _number(node, "r", path)
        child = parse_kernel(node.get("child"), group, f"{path}.child")
        return _guarded(path, lambda: Scale(r, child))
    if kind == "expansion":
        return _parse_expansion(node, group, path)
    if kind == "raw":
        name = node.get("name")
        if not isinstance(name, str):
            raise SpecError("raw form needs a string 'name'", f"{path}.name")
        params = _object(node.get("params", {}), f"{path}.params")
        return _guarded(path, lambda: RawForm(name=name, model=group, params=params))
    raise SpecError(f"unknown kernel kind {kind!r}", f"{path}.kind")


def parse_bivariate(v: Any, path: str = "$.bivariate") -> SeparableSum:
    node = _object(v, path)
    kind = _kind(node, path)
    if kind != "separable":
        raise SpecError(f"unknown bivariate kind {kind!r}", f"{path}.kind")
    terms = []
    for i, term in enumerate(_array(node.get("terms"), f"{path}.terms")):
        tpath = f"{path}.terms[{i}]"
        term = _object(term, tpath)
        weight = _number(term, "weight", tpath, default=1.0)
        terms.append((weight, parse_spatial(term.get("x"), f"{tpath}.x"), parse_spatial(term.get("y"), f"{tpath}.y")))
    return _guarded(path, lambda: SeparableSum(tuple(terms)))


def parse_document(doc: Any) -> SpecDocument:
    root = _object(doc, "$")
    unknown = sorted(set(root) - {"group", "kernel", "bivariate", "meta"})
    if unknown:
        raise SpecError(f"unknown top-level key {unknown[0]!r}", f"$.{unknown[0]}")
    meta = _object(root.get("meta", {}), "$.meta")

    group = kernel = bivariate = None
    if "kernel" in root:
        if "group" not in root:
            raise SpecError("missing 'group' descriptor", "$.group")
        group = parse_group(root["group"])
        kernel = parse_kernel(root["kernel"], group)
    if "bivariate" in root:
        bivariate = parse_bivariate(root["bivariate"])
    if kernel is None and bivariate is None:
        raise SpecError("document needs a 'kernel' or a 'bivariate' entry", "$")
    return SpecDocument(group=group, kernel=kernel, bivariate=bivariate, meta=meta)


def load_spec_file(path: str | Path) -> SpecDocument:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", "$") from exc
    return parse_document(doc)
