"""Indicator functions of Borel sets and bounded test functions.

Every object maps an ``(m, n)`` coordinate array to an ``(m,)`` array and
round-trips through a small JSON vocabulary (``to_dict``/``from_dict``).
``constant`` is set when the value does not depend on the point; estimators
then return exact answers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SetFunction:
    kind = ""
    constant: float | None = None
    layer1_only = False

    def __call__(self, X) -> np.ndarray:
        raise NotImplementedError

    def support_box(self):
        """``(lo, hi)`` coordinate bounds containing the support, or ``None``."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Everything(SetFunction):
    kind = "all"
    constant = 1.0

    def __call__(self, X):
        return np.ones(np.shape(X)[0])

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Nothing(SetFunction):
    kind = "empty"
    constant = 0.0

    def __call__(self, X):
        return np.zeros(np.shape(X)[0])

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class GaugeBall(SetFunction):
    """``{x : N(c^-1 x) <= r}``; the gauge is attached when the set is used."""

    radius: float
    gauge: object = None
    center: tuple | None = None
    kind = "gauge_ball"

    def __call__(self, X):
        X = np.asarray(X, float)
        if self.center is not None:
            from .group import multiply_batch
            X = multiply_batch(self.gauge.algebra, -np.asarray(self.center, float), X)
        return (self.gauge(X) <= self.radius).astype(float)

    def to_dict(self):
        d = {"kind": self.kind, "radius": self.radius}
        if self.center is not None:
            d["center"] = list(self.center)
        return d


@dataclass(frozen=True)
class HalfSpace(SetFunction):
    """``{x : x[coord] >= threshold}`` (or ``<=`` when ``upper`` is false)."""

    coord: int
    threshold: float = 0.0
    upper: bool = True
    kind = "halfspace"

    def __call__(self, X):
        v = np.asarray(X, float)[:, self.coord]
        return (v >= self.threshold if self.upper else v <= self.threshold).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "coord": self.coord, "threshold": self.threshold,
                "upper": self.upper}


@dataclass(frozen=True)
class Slab(SetFunction):
    """``{x : |x[coord] - value| <= half_width}``; ``half_width = 0`` is a hyperplane."""

    coord: int
    value: float = 0.0
    half_width: float = 0.0
    kind = "slab"

    def __call__(self, X):
        v = np.asarray(X, float)[:, self.coord]
        return (np.abs(v - self.value) <= self.half_width).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "coord": self.coord, "value": self.value,
                "half_width": self.half_width}


@dataclass(frozen=True)
class PointComplement(SetFunction):
    point: tuple
    kind = "point_complement"

    def __call__(self, X):
        X = np.asarray(X, float)
        return np.any(X != np.asarray(self.point, float), axis=1).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "point": list(self.point)}


@dataclass(frozen=True)
class Box(SetFunction):
    """Indicator of the coordinate box ``lo <= x <= hi`` (times ``height``)."""

    lo: tuple
    hi: tuple
    height: float = 1.0
    kind = "box"

    def __call__(self, X):
        X = np.asarray(X, float)
        inside = np.all((X >= np.asarray(self.lo)) & (X <= np.asarray(self.hi)), axis=1)
        return self.height * inside.astype(float)

    def support_box(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi),
                "height": self.height}


@dataclass(frozen=True)
class Bump(SetFunction):
    """Smooth bump ``prod (1 - ((x - c)/w)^2)^2`` on the box ``|x - c| <= w``."""

    center: tuple
    half_widths: tuple
    kind = "bump"

    def __call__(self, X):
        u = (np.asarray(X, float) - np.asarray(self.center)) / np.asarray(self.half_widths)
        inside = np.all(np.abs(u) <= 1, axis=1)
        vals = np.prod(np.clip(1 - u * u, 0, None) ** 2, axis=1)
        return np.where(inside, vals, 0.0)

    def support_box(self):
        c, w = np.asarray(self.center, float), np.asarray(self.half_widths, float)
        return c - w, c + w

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center),
                "half_widths": list(self.half_widths)}


@dataclass(frozen=True)
class Layer1Function(SetFunction):
    """``f(x) = cos(a . pi(x))``: depends on the first layer only."""

    direction: tuple
    kind = "layer1_cos"
    layer1_only = True

    def __call__(self, X):
        a = np.asarray(self.direction, float)
        return np.cos(np.asarray(X, float)[:, : len(a)] @ a)

    def to_dict(self):
        return {"kind": self.kind, "direction": list(self.direction)}


_KINDS = {cls.kind: cls for cls in
          (Everything, Nothing, GaugeBall, HalfSpace, Slab, PointComplement, Box, Bump,
           Layer1Function)}


def set_from_dict(data: dict, gauge=None) -> SetFunction:
    data = dict(data)
    kind = data.pop("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown set kind {kind!r}")
    cls = _KINDS[kind]
    for key in ("lo", "hi", "point", "center", "half_widths", "direction"):
        if key in data and data[key] is not None:
            data[key] = tuple(data[key])
    if cls is GaugeBall:
        data["gauge"] = gauge
    return cls(**data)
