import json
import logging
import math
import sys
import typing

import numpy as np

from . import gksl
from .exceptions import LcanonError
from .gksl import CanonicalDecomposition, Generator
from .kraus import KrausSet
from .log import cli_error
from .superop import SuperOperator

logger = logging.getLogger(__name__)

config = None

GENERATOR_TYPES = ('superop_matrix', 'k_plus_kraus', 'gksl')
MAP_TYPES = ('superop_matrix', 'kraus')


def set_config(cfg):
    global config
    config = cfg


def load_json(path: str) -> typing.Any:
    """Read a JSON document, turning I/O and syntax errors into validation errors."""
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as e:
        cli_error(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        cli_error(f"{path} is not valid JSON: {e}")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + '\n'


def dump_json(obj, path: typing.Optional[str] = None) -> None:
    text = dumps(obj)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, 'w') as f:
            f.write(text)
    except OSError as e:
        cli_error(f"cannot write {path}: {e.strerror}")


def _field(obj, key: str, where: str):
    if not isinstance(obj, dict):
        cli_error(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        cli_error(f"{where}: missing field '{key}'")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        cli_error(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def operator_from_json(obj, where: str = 'operator') -> np.ndarray:
    """Parse {"rows", "cols", "data": [[re, im], ...]} (row-major)."""
    rows = _field(obj, 'rows', where)
    cols = _field(obj, 'cols', where)
    data = _field(obj, 'data', where)
    for name, value in (('rows', rows), ('cols', cols)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            cli_error(f"{where}.{name}: expected a positive integer, got {value!r}")
    if not isinstance(data, list) or len(data) != rows * cols:
        cli_error(f"{where}.data: expected {rows * cols} entries")
    entries = []
    for k, pair in enumerate(data):
        if not isinstance(pair, list) or len(pair) != 2:
            cli_error(f"{where}.data[{k}]: expected a [re, im] pair, got {pair!r}")
        entries.append(complex(_number(pair[0], f"{where}.data[{k}]"),
                               _number(pair[1], f"{where}.data[{k}]")))
    return np.array(entries, dtype=complex).reshape(rows, cols)


def operator_to_json(X) -> dict:
    X = np.asarray(X, dtype=complex)
    return {
        'rows': int(X.shape[0]),
        'cols': int(X.shape[1]),
        'data': [[float(z.real), float(z.imag)] for z in X.reshape(-1)],
    }


def kraus_from_json(obj, where: str, shape=None) -> KrausSet:
    if not isinstance(obj, list):
        cli_error(f"{where}: expected a list of operators")
    operators = [operator_from_json(V, f"{where}[{j}]") for j, V in enumerate(obj)]
    if not operators and shape is None:
        cli_error(f"{where}: an empty Kraus list needs a companion operator to fix its dimension")
    return KrausSet.from_operators(operators, shape)


def kraus_to_json(ks: KrausSet) -> list:
    return [operator_to_json(V) for V in ks.operators]


def _typed(obj, allowed, where: str) -> str:
    kind = _field(obj, 'type', where)
    if kind not in allowed:
        cli_error(f"{where}.type: expected one of {', '.join(allowed)}, got {kind!r}")
    return kind


def generator_from_json(obj, where: str = 'generator') -> Generator:
    kind = _typed(obj, GENERATOR_TYPES, where)
    if kind == 'superop_matrix':
        return Generator(SuperOperator.from_matrix(operator_from_json(_field(obj, 'matrix', where),
                                                                      f"{where}.matrix")))
    key = 'K' if kind == 'k_plus_kraus' else 'H'
    first = operator_from_json(_field(obj, key, where), f"{where}.{key}")
    ks = kraus_from_json(_field(obj, 'kraus', where), f"{where}.kraus", shape=first.shape)
    if kind == 'k_plus_kraus':
        return gksl.build_cp_generator(first, ks)
    return gksl.build_gksl_generator(first, ks)


def map_from_json(obj, where: str = 'map') -> SuperOperator:
    kind = _typed(obj, MAP_TYPES, where)
    if kind == 'superop_matrix':
        matrix = operator_from_json(_field(obj, 'matrix', where), f"{where}.matrix")
        return SuperOperator.from_matrix(matrix)
    return kraus_from_json(_field(obj, 'kraus', where), f"{where}.kraus").superop()


def decomposition_to_json(cd: CanonicalDecomposition, residuals=None, passed=None) -> dict:
    residuals = cd.residuals if residuals is None else residuals
    result = {
        'mode': cd.mode,
        'K': operator_to_json(cd.K),
        'kraus': kraus_to_json(cd.phi),
        'reference': operator_to_json(cd.reference),
        'residuals': {name: float(value) for name, value in residuals.items()},
    }
    if cd.H is not None:
        result['H'] = operator_to_json(cd.H)
    if passed is not None:
        result['passed'] = bool(passed)
    return result


def decomposition_from_json(obj, where: str = 'decomposition') -> CanonicalDecomposition:
    mode = _field(obj, 'mode', where)
    if mode not in ('cp', 'cptp'):
        cli_error(f"{where}.mode: expected 'cp' or 'cptp', got {mode!r}")
    K = operator_from_json(_field(obj, 'K', where), f"{where}.K")
    ks = kraus_from_json(_field(obj, 'kraus', where), f"{where}.kraus", shape=K.shape)
    reference = operator_from_json(_field(obj, 'reference', where), f"{where}.reference")
    H = None
    if mode == 'cptp':
        H = operator_from_json(_field(obj, 'H', where), f"{where}.H")
    try:
        return CanonicalDecomposition(K, ks, reference, mode, H)
    except LcanonError as e:
        cli_error(f"{where}: {e}")


def parse_range(text: str, what: str) -> typing.Tuple[str, ...]:
    parts = (text or '').split(':')
    if len(parts) not in (2, 3) or not all(p.strip() for p in parts):
        cli_error(f"{what} must look like a:b or a:b:step, got {text!r}")
    return tuple(p.strip() for p in parts)


def print_table(headers, keys, data, indent=0):
    raw_format = ' ' * indent
    for key, header in zip(keys, headers):
        longest = len(header)
        for d in data:
            longest = max(longest, len(str(d[key])))
        raw_format += '{:<%d}   ' % longest

    print(raw_format.format(*headers))
    for d in data:
        print(raw_format.format(*[d[key] for key in keys]))

