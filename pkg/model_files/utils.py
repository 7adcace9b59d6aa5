import json
from decimal import Decimal, InvalidOperation
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from models.errors import ModelFileError

FORMAT_VERSION = 1


def field(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"line {e.lineno} column {e.colno}: {e.msg}") from None


def dump_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def require(document: Dict[str, Any], key: str, path: str = "", kind=None) -> Any:
    if not isinstance(document, dict):
        raise ModelFileError("expected an object", path or "<document>")
    if key not in document:
        raise ModelFileError("missing field", field(path, key))
    value = document[key]
    if kind is not None and not isinstance(value, kind):
        expected = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ModelFileError(f"expected {expected}, got {type(value).__name__}", field(path, key))
    return value


def check_header(document: Any, kind: str) -> None:
    if not isinstance(document, dict):
        raise ModelFileError("top level must be an object")
    version = require(document, "format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})", "format_version")
    found = document.get("kind", kind)
    if found != kind:
        raise ModelFileError(f"expected a '{kind}' document, got '{found}'", "kind")


def parse_decimal(value: Any, path: str) -> float:
    """Decimal string (or JSON number) to the nearest float"""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ModelFileError(f"expected a decimal string, got {type(value).__name__}", path)
    try:
        number = Decimal(str(value).strip())
    except InvalidOperation:
        raise ModelFileError(f"'{value}' is not a decimal number", path) from None
    if not number.is_finite():
        raise ModelFileError(f"'{value}' is not finite", path)
    return float(number)


def format_decimal(value: float) -> str:
    """Shortest string that parses back to the same float"""
    return repr(float(value))


def parse_probability(value: Any, path: str) -> float:
    probability = parse_decimal(value, path)
    if probability < 0:
        raise ModelFileError("negative probability", path)
    return probability


def parse_tensor(node: Any, shape: Sequence[int], path: str) -> np.ndarray:
    """Nested lists of probabilities with exactly the given shape"""
    if not shape:
        return np.array(parse_probability(node, path))
    if not isinstance(node, list) or len(node) != shape[0]:
        found = len(node) if isinstance(node, list) else type(node).__name__
        raise ModelFileError(f"expected a list of length {shape[0]}, got {found}", path)
    return np.stack([parse_tensor(item, shape[1:], field(path, i)) for i, item in enumerate(node)])


def format_tensor(weights: np.ndarray) -> Any:
    if weights.ndim == 0:
        return format_decimal(weights)
    return [format_tensor(block) for block in weights]


def parse_labels(node: Any, path: str) -> Tuple[str, ...]:
    if not isinstance(node, list) or not node:
        raise ModelFileError("expected a non-empty list of labels", path)
    labels = []
    for i, label in enumerate(node):
        if not isinstance(label, (str, int)) or isinstance(label, bool):
            raise ModelFileError("labels must be strings", field(path, i))
        labels.append(str(label))
    if len(set(labels)) != len(labels):
        raise ModelFileError(f"duplicate labels {labels}", path)
    return tuple(labels)


def parse_triple(node: Any, path: str) -> Tuple[str, str, str]:
    if not isinstance(node, list) or len(node) != 3:
        raise ModelFileError("expected [a, b, c]", path)
    return tuple(str(label) for label in node)


def parse_value_map(node: Any, labels: Sequence[str], path: str) -> Dict[str, float]:
    if not isinstance(node, dict):
        raise ModelFileError("expected an object of label: value", path)
    unknown: List[str] = [label for label in node if label not in labels]
    if unknown:
        raise ModelFileError(f"labels {unknown} are not in the outcome space {list(labels)}", path)
    return {label: parse_decimal(value, field(path, label)) for label, value in node.items()}
