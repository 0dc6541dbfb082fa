"""Reading and writing quadrature rule files.

Text form: the first non-comment line names the manifold (``circle``,
``torus:d``, ``sphere2``); every further line holds the point coordinates
followed by the weight, separated by whitespace and/or commas. ``#`` starts a
comment. JSON form: ``{"manifold": ..., "points": [[...]], "weights": [...]}``.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .manifold import ManifoldSpec
from .quadrature_audit import QuadratureRule

_SPLIT = re.compile(r"[\s,]+")


class RuleFileError(InvalidInputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_rule_text(text: str) -> QuadratureRule:
    manifold = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if manifold is None:
            try:
                manifold = ManifoldSpec.parse(line)
            except InvalidInputError as exc:
                raise RuleFileError(str(exc), lineno) from None
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        arity = manifold.coord_dim + 1
        if len(fields) != arity:
            raise RuleFileError(f"expected {arity} values (coordinates then weight), got {len(fields)}", lineno)
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise RuleFileError(f"not a number in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise RuleFileError("NaN or infinite value", lineno)
        if vals[-1] < 0:
            raise RuleFileError(f"negative weight {vals[-1]!r} in row {len(rows)}", lineno)
        rows.append(vals)
    if manifold is None:
        raise RuleFileError("missing manifold header")
    if not rows:
        raise RuleFileError("rule has no points")
    arr = np.array(rows)
    return QuadratureRule(manifold, arr[:, :-1], arr[:, -1])


def parse_rule_json(text: str) -> QuadratureRule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleFileError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    try:
        manifold = ManifoldSpec.parse(data["manifold"])
        points = np.array(data["points"], dtype=float)
        weights = np.array(data["weights"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise RuleFileError(f"malformed rule JSON: {exc}") from None
    if points.ndim != 2 or points.shape[1] != manifold.coord_dim:
        raise RuleFileError(f"points must be rows of {manifold.coord_dim} coordinates")
    if not np.all(np.isfinite(weights)):
        raise RuleFileError("NaN or infinite weight")
    bad = np.flatnonzero(weights < 0)
    if bad.size:
        raise RuleFileError(f"negative weight in row {bad[0]}")
    return QuadratureRule(manifold, points, weights)


def read_rule(path) -> QuadratureRule:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_rule_json(text)
    return parse_rule_text(text)


def format_rule_text(rule: QuadratureRule) -> str:
    lines = [str(rule.manifold)]
    for p, w in zip(rule.points, rule.weights):
        lines.append(" ".join(f"{v:.17g}" for v in (*p, w)))
    return "\n".join(lines) + "\n"


def format_rule_json(rule: QuadratureRule) -> str:
    return json.dumps(
        {
            "manifold": str(rule.manifold),
            "points": rule.points.tolist(),
            "weights": rule.weights.tolist(),
        }
    )


def write_rule(rule: QuadratureRule, path) -> None:
    path = Path(path)
    text = format_rule_json(rule) if path.suffix.lower() == ".json" else format_rule_text(rule)
    path.write_text(text)
