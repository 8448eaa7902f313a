"""Declarative experiment configs.

One TOML document describes alphabets, a source, a system pipeline
(ordered list; more than one entry means a cascade), the analyses to run,
resource caps and the report format.  Symbols are written as strings;
strings that parse as integers become integers so the arithmetic system
families stay usable.  Rational filter coefficients are integers or
"p/q" strings, never floats.

Parse failures carry the offending key path; referring to an alphabet or
key that does not exist names it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

try:  # stdlib from 3.11 on
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .alphabet import Alphabet, Ring, _readonly, mod_ring, plain_alphabet
from .errors import ValidationError
from .sources import MarkovSource, make_iid, make_markov
from .systems import System, TableSystem, cascade, identity_system, static_system
from .zoo import (
    FilterCoeffs,
    fixed_point_filter,
    hammerstein_system,
    multiplier_system,
    ring_linear_filter,
    squarer,
    xor_filter,
)

ANALYSIS_KINDS = (
    "loss-report",
    "finite-length",
    "bound",
    "invertibility",
    "round-trip",
    "filter-analysis",
    "plugin",
)


@dataclass
class ExperimentConfig:
    alphabets: dict
    source: MarkovSource
    source_spec: dict
    systems: list
    system: System
    system_kinds: list
    analyses: list
    path_cap: int | None = None
    state_cap: int | None = None
    out_format: str = "json"
    name: str = "<config>"


def _fail(path: str, msg: str):
    raise ValidationError(f"{path}: {msg}")


def _get(tbl: dict, key: str, path: str, required: bool = True, default=None):
    if key in tbl:
        return tbl[key]
    if required:
        _fail(f"{path}.{key}", "missing key")
    return default


def _check_keys(tbl: dict, allowed, path: str):
    extra = set(tbl) - set(allowed)
    if extra:
        _fail(path, f"unknown keys {sorted(extra)}; allowed: {sorted(allowed)}")


def _symbol(v, path: str):
    if isinstance(v, bool):
        _fail(path, "booleans are not symbols")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v, 10)
        except ValueError:
            return v
    _fail(path, f"symbols are strings or integers, got {type(v).__name__}")


def _coefficient(v, path: str) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        _fail(path, "coefficients are integers or 'p/q' strings (floats are inexact)")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            _fail(path, f"cannot read {v!r} as a rational")
    _fail(path, f"cannot read {type(v).__name__} as a rational")


def _infer_identity(table: np.ndarray, two_sided: bool, path: str) -> int:
    q = table.shape[0]
    for c in range(q):
        left = bool((table[c] == np.arange(q)).all())
        right = bool((table[:, c] == np.arange(q)).all())
        if left and (right or not two_sided):
            return c
    _fail(path, "no identity element found")


def _parse_ring(spec, q: int, path: str) -> Ring:
    if isinstance(spec, str):
        if not spec.startswith("mod-"):
            _fail(path, f"ring shorthand must look like 'mod-q', got {spec!r}")
        try:
            mod = int(spec[4:], 10)
        except ValueError:
            _fail(path, f"bad modulus in {spec!r}")
        if mod != q:
            _fail(path, f"ring 'mod-{mod}' does not match the {q} declared symbols")
        return mod_ring(mod).ring
    if not isinstance(spec, dict):
        _fail(path, "ring is a 'mod-q' string or a table with add/mul")
    _check_keys(spec, ("add", "mul", "zero", "one"), path)
    try:
        add = np.asarray(_get(spec, "add", path), dtype=np.int64)
        mul = np.asarray(_get(spec, "mul", path), dtype=np.int64)
    except (TypeError, ValueError):
        _fail(path, "add/mul must be integer matrices")
    for name, t in (("add", add), ("mul", mul)):
        if t.shape != (q, q):
            _fail(f"{path}.{name}", f"expected a {q}x{q} matrix, got shape {t.shape}")
    zero = spec.get("zero", _infer_identity(add, False, f"{path}.add"))
    one = spec.get("one", _infer_identity(mul, True, f"{path}.mul"))
    return Ring(_readonly(add), _readonly(mul), int(zero), int(one))


def _parse_alphabet(tbl: dict, path: str) -> Alphabet:
    if not isinstance(tbl, dict):
        _fail(path, "alphabet sections are tables")
    _check_keys(tbl, ("symbols", "ring"), path)
    ring_spec = tbl.get("ring")
    symbols = tbl.get("symbols")
    if symbols is None:
        if not (isinstance(ring_spec, str) and ring_spec.startswith("mod-")):
            _fail(f"{path}.symbols", "missing key (only 'mod-q' alphabets may omit it)")
        return mod_ring(int(ring_spec[4:], 10))
    if not isinstance(symbols, list) or not symbols:
        _fail(f"{path}.symbols", "expected a non-empty array")
    syms = tuple(_symbol(s, f"{path}.symbols[{i}]") for i, s in enumerate(symbols))
    if ring_spec is None:
        return plain_alphabet(syms)
    return Alphabet(syms, _parse_ring(ring_spec, len(syms), f"{path}.ring"))


def _need_alphabet(alphabets: dict, name, path: str) -> Alphabet:
    if not isinstance(name, str) or name not in alphabets:
        _fail(path, f"unknown alphabet {name!r}; defined: {sorted(alphabets)}")
    return alphabets[name]


def _parse_source(tbl: dict, alphabets: dict, path: str) -> tuple:
    if not isinstance(tbl, dict):
        _fail(path, "source is a table")
    kind = _get(tbl, "kind", path)
    alph = _need_alphabet(alphabets, _get(tbl, "alphabet", path), f"{path}.alphabet")
    q = len(alph)
    if kind == "iid":
        _check_keys(tbl, ("kind", "alphabet", "probs"), path)
        probs = _get(tbl, "probs", path)
        if not isinstance(probs, list) or len(probs) != q:
            _fail(f"{path}.probs", f"expected {q} probabilities")
        return make_iid(alph, [float(p) for p in probs]), dict(tbl)
    if kind == "markov":
        _check_keys(tbl, ("kind", "alphabet", "transition"), path)
        raw = _get(tbl, "transition", path)
        if not isinstance(raw, list):
            _fail(f"{path}.transition", "expected an array")
        flat = raw if raw and not isinstance(raw[0], list) else [v for row in raw for v in row]
        if len(flat) != q * q:
            _fail(f"{path}.transition", f"expected {q}x{q} = {q * q} entries, got {len(flat)}")
        P = np.asarray(flat, dtype=float).reshape(q, q)
        return make_markov(alph, P), dict(tbl)
    _fail(f"{path}.kind", f"unknown source kind {kind!r} (iid or markov)")


def _parse_table_system(tbl: dict, alphabets: dict, path: str) -> TableSystem:
    _check_keys(tbl, ("kind", "input", "output", "n", "m", "table"), path)
    inp = _need_alphabet(alphabets, _get(tbl, "input", path), f"{path}.input")
    out = _need_alphabet(alphabets, _get(tbl, "output", path), f"{path}.output")
    n, m = int(_get(tbl, "n", path)), int(_get(tbl, "m", path))
    if n < 0 or m < 0:
        _fail(path, "n and m must be >= 0")
    raw = _get(tbl, "table", path)
    if not isinstance(raw, list):
        _fail(f"{path}.table", "expected a flat array of output symbols")
    want = len(inp) ** (n + 1) * len(out) ** m
    if len(raw) != want:
        _fail(f"{path}.table", f"expected {want} entries "
              f"(|in|^(n+1) * |out|^m), got {len(raw)}")
    idx = np.empty(want, dtype=np.int64)
    for i, v in enumerate(raw):
        sym = _symbol(v, f"{path}.table[{i}]")
        try:
            idx[i] = out.index(sym)
        except ValidationError:
            _fail(f"{path}.table[{i}]", f"{sym!r} is not an output symbol")
    return TableSystem(inp, out, n, m, idx)


def _parse_system(tbl: dict, alphabets: dict, path: str) -> System:
    if not isinstance(tbl, dict):
        _fail(path, "system entries are tables")
    kind = _get(tbl, "kind", path)
    if kind == "table":
        return _parse_table_system(tbl, alphabets, path)
    if kind == "xor-filter":
        _check_keys(tbl, ("kind",), path)
        return xor_filter()
    if kind == "squarer":
        _check_keys(tbl, ("kind",), path)
        return squarer()
    if kind == "identity":
        _check_keys(tbl, ("kind", "alphabet"), path)
        return identity_system(
            _need_alphabet(alphabets, _get(tbl, "alphabet", path), f"{path}.alphabet"))
    if kind == "multiplier":
        _check_keys(tbl, ("kind", "alphabet"), path)
        alph = _need_alphabet(alphabets, _get(tbl, "alphabet", path), f"{path}.alphabet")
        if not all(isinstance(s, (int, Fraction)) for s in alph.symbols):
            _fail(f"{path}.alphabet", "multiplier needs numeric symbols")
        return multiplier_system(alph)
    if kind == "ring-filter":
        _check_keys(tbl, ("kind", "alphabet", "b", "a"), path)
        alph = _need_alphabet(alphabets, _get(tbl, "alphabet", path), f"{path}.alphabet")
        b = [_symbol(v, f"{path}.b[{i}]") for i, v in enumerate(_get(tbl, "b", path))]
        a = [_symbol(v, f"{path}.a[{i}]") for i, v in enumerate(tbl.get("a", []))]
        return ring_linear_filter(alph, FilterCoeffs(tuple(b), tuple(a)))
    if kind == "fixed-point":
        _check_keys(tbl, ("kind", "k", "b", "a", "placement"), path)
        k = int(_get(tbl, "k", path))
        if not 1 <= k <= 8:
            _fail(f"{path}.k", f"word size k must be in 1..8, got {k}")
        b = tuple(_coefficient(v, f"{path}.b[{i}]")
                  for i, v in enumerate(_get(tbl, "b", path)))
        a = tuple(_coefficient(v, f"{path}.a[{i}]")
                  for i, v in enumerate(tbl.get("a", [])))
        placement = _get(tbl, "placement", path)
        return fixed_point_filter(mod_ring(2**k), FilterCoeffs(b, a), placement)
    if kind == "static":
        _check_keys(tbl, ("kind", "mapping", "output"), path)
        mapping = _get(tbl, "mapping", path)
        if not isinstance(mapping, dict) or not mapping:
            _fail(f"{path}.mapping", "expected a non-empty table of symbol -> symbol")
        g = {_symbol(k_, f"{path}.mapping"): _symbol(v, f"{path}.mapping[{k_}]")
             for k_, v in mapping.items()}
        out = tbl.get("output")
        out_alph = _need_alphabet(alphabets, out, f"{path}.output") if out else None
        return static_system(plain_alphabet(tuple(g)), g, out_alph)
    if kind == "hammerstein":
        _check_keys(tbl, ("kind", "mapping", "filter"), path)
        mapping = _get(tbl, "mapping", path)
        if not isinstance(mapping, dict) or not mapping:
            _fail(f"{path}.mapping", "expected a non-empty table of symbol -> symbol")
        g = {_symbol(k_, f"{path}.mapping"): _symbol(v, f"{path}.mapping[{k_}]")
             for k_, v in mapping.items()}
        filt = _parse_system(_get(tbl, "filter", path), alphabets, f"{path}.filter")
        if not isinstance(filt, TableSystem):
            _fail(f"{path}.filter", "hammerstein needs a dense-table filter stage")
        return hammerstein_system(g, filt, plain_alphabet(tuple(g)))
    _fail(f"{path}.kind", f"unknown system kind {kind!r}")


_ANALYSIS_DEFAULTS = {
    "loss-report": {"max_block": 12, "tolerance": 1e-3},
    "finite-length": {"k": None},
    "bound": {},
    "invertibility": {},
    "round-trip": {"length": 64, "sequences": 1, "seed": 0},
    "filter-analysis": {"b": None, "a": ()},
    "plugin": {"length": None, "block": None, "seed": 0},
}


def _parse_analysis(tbl: dict, path: str) -> dict:
    if not isinstance(tbl, dict):
        _fail(path, "analysis entries are tables")
    kind = _get(tbl, "kind", path)
    if kind not in ANALYSIS_KINDS:
        _fail(f"{path}.kind", f"unknown analysis {kind!r}; known: {list(ANALYSIS_KINDS)}")
    defaults = _ANALYSIS_DEFAULTS[kind]
    _check_keys(tbl, ("kind", *defaults), path)
    out = {"kind": kind}
    for key, dflt in defaults.items():
        val = tbl.get(key, dflt)
        if val is None:
            _fail(f"{path}.{key}", "missing key")
        out[key] = val
    if kind == "filter-analysis":
        out["b"] = [float(v) for v in out["b"]]
        out["a"] = [float(v) for v in out["a"]]
    return out


def parse_config(text: str, name: str = "<config>") -> ExperimentConfig:
    """Parse one TOML experiment document into live objects."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ValidationError(f"{name}: TOML parse error: {e}") from None
    _check_keys(doc, ("alphabets", "source", "systems", "analyses", "caps", "output"),
                name)
    alphabets = {}
    for aname, tbl in doc.get("alphabets", {}).items():
        alphabets[aname] = _parse_alphabet(tbl, f"{name}.alphabets.{aname}")

    source, source_spec = _parse_source(_get(doc, "source", name), alphabets,
                                        f"{name}.source")

    raw_systems = _get(doc, "systems", name)
    if not isinstance(raw_systems, list) or not raw_systems:
        _fail(f"{name}.systems", "expected at least one [[systems]] entry")
    systems = [_parse_system(tbl, alphabets, f"{name}.systems[{i}]")
               for i, tbl in enumerate(raw_systems)]
    kinds = [tbl.get("kind", "?") for tbl in raw_systems]
    composed = systems[0]
    for i, nxt in enumerate(systems[1:], start=1):
        if nxt.input_alphabet.symbols != composed.output_alphabet.symbols:
            _fail(f"{name}.systems[{i}]",
                  "input alphabet does not match the previous stage's output")
        composed = cascade(composed, nxt)
    if source.alphabet.symbols != composed.input_alphabet.symbols:
        _fail(f"{name}.source.alphabet", "source alphabet does not feed systems[0]")

    raw_analyses = doc.get("analyses", [{"kind": "loss-report"}])
    if not isinstance(raw_analyses, list) or not raw_analyses:
        _fail(f"{name}.analyses", "expected at least one [[analyses]] entry")
    analyses = [_parse_analysis(tbl, f"{name}.analyses[{i}]")
                for i, tbl in enumerate(raw_analyses)]

    caps = doc.get("caps", {})
    _check_keys(caps, ("paths", "states"), f"{name}.caps")
    path_cap = caps.get("paths")
    state_cap = caps.get("states")
    for label, cap in (("paths", path_cap), ("states", state_cap)):
        if cap is not None and (not isinstance(cap, int) or cap < 1):
            _fail(f"{name}.caps.{label}", "caps are positive integers")

    out = doc.get("output", {})
    _check_keys(out, ("format",), f"{name}.output")
    fmt = out.get("format", "json")
    if fmt not in ("json", "text"):
        _fail(f"{name}.output.format", f"format is 'json' or 'text', got {fmt!r}")

    return ExperimentConfig(
        alphabets=alphabets,
        source=source,
        source_spec=source_spec,
        systems=systems,
        system=composed,
        system_kinds=kinds,
        analyses=analyses,
        path_cap=path_cap,
        state_cap=state_cap,
        out_format=fmt,
        name=name,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text, name=str(path))
