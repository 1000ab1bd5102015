"""Load convex domains from JSON specs.

Accepted shapes::

    {"type": "polygon", "vertices": [[x, y], ...], "basepoint": [x, y]}
    {"type": "ellipse", "semi_axes": [a, b], "center": [x, y], "angle": 0.0}
    {"type": "radial", "rho": {"grid_size": n, "values": [...]}, "center": [x, y]}
    {"type": "cantor", "cantor": {"p": 3.0, "depth": 12}}

``basepoint`` is optional everywhere; it defaults to the symmetry center or
the vertex centroid.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping

from .cantor import build_cantor_domain, build_cantor_function
from .errors import ValidationError
from .geometry import ConvexDomain, as_point, Ellipse, Polygon, RadialDomain

DOMAIN_TYPES = ("polygon", "ellipse", "radial", "cantor")


def _pair(spec: Mapping, key: str, default=None):
    value = spec.get(key, default)
    if value is None:
        return None
    try:
        x, y = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(f"'{key}' must be a pair of numbers, got {value!r}") from None
    return (x, y)


def _require(spec: Mapping, key: str):
    if key not in spec:
        raise ValidationError(f"domain spec of type {spec.get('type')!r} needs a '{key}' field")
    return spec[key]


def domain_from_spec(spec: Mapping[str, Any]) -> ConvexDomain:
    """Build and validate a domain from a decoded JSON spec."""
    if not isinstance(spec, Mapping):
        raise ValidationError("domain spec must be a JSON object")
    kind = spec.get("type")
    if kind not in DOMAIN_TYPES:
        raise ValidationError(f"unknown domain type {kind!r}; expected one of {', '.join(DOMAIN_TYPES)}")
    basepoint = _pair(spec, "basepoint")
    if kind == "polygon":
        vertices = _require(spec, "vertices")
        try:
            vertices = [[float(x), float(y)] for x, y in vertices]
        except (TypeError, ValueError):
            raise ValidationError("'vertices' must be a list of [x, y] pairs") from None
        return Polygon(vertices, basepoint)
    if kind == "ellipse":
        a, b = _pair(spec, "semi_axes") or _require(spec, "semi_axes")
        center = _pair(spec, "center", (0.0, 0.0))
        return Ellipse(a, b, center, float(spec.get("angle", 0.0)), basepoint)
    if kind == "radial":
        rho = _require(spec, "rho")
        values = _require(rho, "values")
        size = int(rho.get("grid_size", len(values)))
        if size != len(values):
            raise ValidationError(f"rho.grid_size is {size} but {len(values)} values were given")
        domain = RadialDomain(values, _pair(spec, "center", (0.0, 0.0)))
        if basepoint is not None:
            domain.basepoint = as_point(basepoint)
        return domain
    params = _require(spec, "cantor")
    p = float(_require(params, "p"))
    depth = int(_require(params, "depth"))
    return build_cantor_domain(build_cantor_function(p, depth))


def load_domain(source: str | os.PathLike | Mapping[str, Any]) -> ConvexDomain:
    """Domain from a JSON file path or an already decoded mapping."""
    if isinstance(source, Mapping):
        return domain_from_spec(source)
    try:
        with open(source, encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: not valid JSON ({exc})") from None
    return domain_from_spec(spec)
