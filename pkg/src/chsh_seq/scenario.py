"""JSON scenario documents: parsing with located errors, and serialization.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists. A scenario document looks like::

    {
      "description": "free text",
      "state": "singlet" | {"amplitudes": [[re, im], ...]} | {"basis": k, "dim": d},
      "observables": {
        "a":       {"pauli": "z", "site": "left", "other_dim": 2},
        "a_prime": {"spin": {"theta": "pi/2", "phi": 0.0}, "site": "left", "other_dim": 2},
        "b":       {"matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
        "b_prime": {"projectors": {"plus": [...], "minus": [...]}}
      }
    }

``site``/``other_dim`` are optional and lift a single-site observable into a
bipartite space. Spin directions use the polar angle ``theta`` from +z and
the azimuth ``phi``; both may be numbers or expressions such as ``"3*pi/4"``.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import _expr
from .chsh import BellScenario
from .errors import ChshSeqError, ScenarioError
from .observables import (
    DichotomicObservable,
    from_matrix,
    from_spin_direction,
    lift,
    pauli,
)
from .sequential import PROJECTOR_TOL, QuantumState, basis_state, singlet_state

OBSERVABLE_KEYS = ("a", "a_prime", "b", "b_prime")
DISPLAY_NAMES = {"a": "A", "a_prime": "A'", "b": "B", "b_prime": "B'"}
NAMED_STATES = {"singlet": singlet_state}


def _angle(x, path: str) -> float:
    if isinstance(x, str):
        try:
            return _expr.evaluate(x)
        except ValueError as exc:
            raise ScenarioError(path, str(exc)) from None
    return _number(x, path)


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(path, f"expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        raise ScenarioError(path, "number must be finite")
    return float(x)


def _complex(x, path: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(_number(x, path))
    if isinstance(x, list) and len(x) == 2:
        return complex(_number(x[0], f"{path}[0]"), _number(x[1], f"{path}[1]"))
    raise ScenarioError(path, "expected a complex number as [re, im]")


def _vector(x, path: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ScenarioError(path, "expected a non-empty list of complex numbers")
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(x)], dtype=np.complex128)


def _matrix(x, path: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ScenarioError(path, "expected a non-empty list of rows")
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(x)]
    n = len(rows)
    for i, r in enumerate(rows):
        if r.shape[0] != n:
            raise ScenarioError(f"{path}[{i}]", f"matrix must be square: row has {r.shape[0]} entries, expected {n}")
    return np.stack(rows)


def encode_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def encode_vector(v: np.ndarray) -> list:
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def encode_matrix(m: np.ndarray) -> list:
    return [encode_vector(row) for row in np.asarray(m)]


def parse_state(doc, path: str = "state") -> QuantumState:
    if isinstance(doc, str):
        if doc not in NAMED_STATES:
            raise ScenarioError(path, f"unknown named state {doc!r}; known: {sorted(NAMED_STATES)}")
        return NAMED_STATES[doc]()
    if not isinstance(doc, dict):
        raise ScenarioError(path, "expected a state name or an object")
    if "amplitudes" in doc:
        amp = _vector(doc["amplitudes"], f"{path}.amplitudes")
        norm = float(np.linalg.norm(amp))
        try:
            return QuantumState(amp)
        except ValueError:
            raise ScenarioError(
                f"{path}.amplitudes", f"state vector must satisfy normalization ||psi|| = 1, got {norm!r}"
            ) from None
    if "basis" in doc:
        dim = doc.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise ScenarioError(f"{path}.dim", "expected a positive integer")
        k = doc["basis"]
        if not isinstance(k, int) or not 0 <= k < dim:
            raise ScenarioError(f"{path}.basis", f"expected an integer in [0, {dim})")
        return basis_state(dim, k)
    raise ScenarioError(path, "state object needs 'amplitudes' or 'basis'")


def _lift_if_requested(obs: DichotomicObservable, doc: dict, path: str) -> DichotomicObservable:
    site = doc.get("site")
    if site is None:
        return obs
    if site not in ("left", "right"):
        raise ScenarioError(f"{path}.site", "site must be 'left' or 'right'")
    other = doc.get("other_dim", 2)
    if not isinstance(other, int) or isinstance(other, bool) or other < 1:
        raise ScenarioError(f"{path}.other_dim", "expected a positive integer")
    return lift(obs, site, other)


def parse_observable(doc, path: str, name: str = "") -> DichotomicObservable:
    if not isinstance(doc, dict):
        raise ScenarioError(path, "expected an observable object")
    forms = [k for k in ("pauli", "spin", "matrix", "projectors") if k in doc]
    if len(forms) != 1:
        raise ScenarioError(path, "observable needs exactly one of 'pauli', 'spin', 'matrix', 'projectors'")
    form = forms[0]
    name = doc.get("name", name)
    try:
        if form == "pauli":
            label = doc["pauli"]
            if not isinstance(label, str) or label.lower() not in ("x", "y", "z", "i"):
                raise ScenarioError(f"{path}.pauli", "expected one of 'x', 'y', 'z', 'i'")
            obs = pauli(label, name)
        elif form == "spin":
            spin = doc["spin"]
            if not isinstance(spin, dict) or "theta" not in spin:
                raise ScenarioError(f"{path}.spin", "expected an object with 'theta' (and optional 'phi')")
            obs = from_spin_direction(
                _angle(spin["theta"], f"{path}.spin.theta"),
                _angle(spin.get("phi", 0.0), f"{path}.spin.phi"),
                name,
            )
        elif form == "matrix":
            m = _matrix(doc["matrix"], f"{path}.matrix")
            obs = from_matrix(m, allow_trivial=bool(doc.get("allow_trivial", False)), name=name)
        else:
            proj = doc["projectors"]
            if not isinstance(proj, dict) or "plus" not in proj or "minus" not in proj:
                raise ScenarioError(f"{path}.projectors", "expected an object with 'plus' and 'minus'")
            pp = _matrix(proj["plus"], f"{path}.projectors.plus")
            pm = _matrix(proj["minus"], f"{path}.projectors.minus")
            if pp.shape != pm.shape:
                raise ScenarioError(f"{path}.projectors", "plus and minus projectors differ in shape")
            obs = DichotomicObservable(pp, pm, name)
            worst = max(obs.invariant_defects().items(), key=lambda kv: kv[1])
            if worst[1] > PROJECTOR_TOL:
                raise ScenarioError(f"{path}.projectors", f"projector identity '{worst[0]}' fails by {worst[1]:.3e}")
    except ScenarioError:
        raise
    except ChshSeqError as exc:
        raise ScenarioError(f"{path}.{form}", str(exc)) from None
    return _lift_if_requested(obs, doc, path)


def parse_scenario(doc: Any) -> tuple[BellScenario, str]:
    """Build a scenario from a decoded JSON document; returns (scenario, description)."""
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario document must be a JSON object")
    if "state" not in doc:
        raise ScenarioError("state", "missing required field")
    if "observables" not in doc or not isinstance(doc["observables"], dict):
        raise ScenarioError("observables", "missing or not an object")
    psi = parse_state(doc["state"])
    obs_doc = doc["observables"]
    obs = {}
    for key in OBSERVABLE_KEYS:
        if key not in obs_doc:
            raise ScenarioError(f"observables.{key}", "missing required observable")
        obs[key] = parse_observable(obs_doc[key], f"observables.{key}", DISPLAY_NAMES[key])
    for key, o in obs.items():
        if o.dim != psi.dim:
            raise ScenarioError(f"observables.{key}", f"observable has dim {o.dim} but the state has dim {psi.dim}")
    description = doc.get("description", "")
    if not isinstance(description, str):
        description = json.dumps(description)
    return BellScenario(psi, **obs), description


def scenario_to_doc(scenario: BellScenario, description: str = "") -> dict:
    """Explicit form: amplitudes plus both projectors of every observable.

    Observables are rebuilt from their projectors on parse, so this form
    re-parses to a bit-identical scenario.
    """
    return {
        "description": description,
        "state": {"amplitudes": encode_vector(scenario.psi.amplitudes)},
        "observables": {
            key: {
                "name": o.name,
                "projectors": {"plus": encode_matrix(o.proj_plus), "minus": encode_matrix(o.proj_minus)},
            }
            for key, o in zip(OBSERVABLE_KEYS, scenario.observables)
        },
    }


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("chsh_seq").joinpath("data").iterdir() if p.name.endswith(".json"))


def load_document(source: str | Path) -> Any:
    """Read a scenario document from a path, or ``@name`` for a bundled one."""
    source = str(source)
    if source.startswith("@"):
        name = source[1:]
        if name not in bundled_names():
            raise ScenarioError("", f"unknown bundled scenario {name!r}; available: {bundled_names()}")
        text = resources.files("chsh_seq").joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError("", f"cannot read scenario file {source!r}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", f"invalid JSON: {exc.msg}") from None


def load_scenario(source: str | Path) -> tuple[BellScenario, str, Any]:
    doc = load_document(source)
    scenario, description = parse_scenario(doc)
    return scenario, description, doc
