"""Set-valued limit objects, sampled graphs, and graph metrics.

A set-valued limit takes the value {1} everywhere except at finitely
many exceptional points, where it is a closed interval [lo, hi]
containing 1.  Graphs are compared through dense point samples with the
product metric sqrt(d_M(x1, x2)^2 + (y1 - y2)^2); d_M is the standard
periodic distance on the torus.  Sampling makes every distance exact up
to one resolution of each input, which is recoverable by refinement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import Domain1D, Field


@dataclass(frozen=True)
class ExceptionalPoint:
    """Location with a nontrivial interval value [lo, hi] containing 1."""

    x: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= 1.0 <= self.hi):
            raise ValueError("interval [lo, hi] must contain 1")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi; drop trivial points before constructing")


@dataclass(frozen=True)
class SetValuedLimit:
    """Limit object: {1} off a finite exceptional set."""

    domain: Domain1D
    exceptional: tuple

    def __post_init__(self):
        entries = []
        for e in self.exceptional:
            if not isinstance(e, ExceptionalPoint):
                e = ExceptionalPoint(*e)
            x = e.x
            if self.domain.kind == "torus":
                x = float(np.mod(x, 1.0))
            elif not (self.domain.a <= x <= self.domain.b):
                raise ValueError(f"exceptional point {x} outside the domain")
            entries.append(ExceptionalPoint(x, e.lo, e.hi))
        xs = [e.x for e in entries]
        if len(set(xs)) != len(xs):
            raise ValueError("exceptional points must be pairwise distinct")
        object.__setattr__(self, "exceptional", tuple(entries))

    def to_json(self) -> str:
        return json.dumps({
            "domain": self.domain.to_json_dict(),
            "exceptional": [{"x": e.x, "lo": e.lo, "hi": e.hi}
                            for e in self.exceptional],
        })

    @classmethod
    def from_json(cls, text: str) -> "SetValuedLimit":
        d = json.loads(text)
        dom = Domain1D.from_json_dict(d["domain"])
        entries = tuple(ExceptionalPoint(float(e["x"]), float(e["lo"]), float(e["hi"]))
                        for e in d.get("exceptional", []))
        return cls(domain=dom, exceptional=entries)


@dataclass
class GraphSet:
    """Finite point sample of a graph in M x R."""

    points: np.ndarray
    resolution: float
    domain: Domain1D

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.points.shape[0] == 0:
            raise ValueError("graph sample must be nonempty")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")


def graph_of_field(u: Field, resolution: float) -> GraphSet:
    """Dense sample of a piecewise-linear graph, along-segment spacing
    at most resolution."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    mesh = u.mesh
    h = mesh.h
    du = u.cell_diffs()
    xs_out = []
    ys_out = []
    for k in range(mesh.n_cells):
        x0 = mesh.nodes[k]
        seg_len = math.hypot(h, du[k])
        m = max(1, int(math.ceil(seg_len / resolution)))
        t = np.arange(m) / m
        xs_out.append(x0 + t * h)
        ys_out.append(u.values[k] + t * du[k])
    # closing sample: last node (interval) or the seam value (torus)
    if mesh.domain.kind == "torus":
        xs_out.append(np.array([0.0]))
        ys_out.append(np.array([u.values[0]]))
        xs = np.mod(np.concatenate(xs_out), 1.0)
    else:
        xs_out.append(np.array([mesh.nodes[-1]]))
        ys_out.append(np.array([u.values[-1]]))
        xs = np.concatenate(xs_out)
    pts = np.column_stack([xs, np.concatenate(ys_out)])
    return GraphSet(points=pts, resolution=resolution, domain=mesh.domain)


def graph_of_limit(xi: SetValuedLimit, resolution: float) -> GraphSet:
    """Sample the graph of a set-valued limit: the line y = 1 plus a
    vertical segment [lo, hi] at every exceptional point."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    dom = xi.domain
    xs_out = []
    ys_out = []
    if dom.kind == "torus":
        m = max(1, int(math.ceil(1.0 / resolution)))
        base = np.arange(m) / m
    else:
        m = max(1, int(math.ceil(dom.length / resolution)))
        base = np.linspace(dom.a, dom.b, m + 1)
    xs_out.append(base)
    ys_out.append(np.ones_like(base))
    for e in xi.exceptional:
        m = max(1, int(math.ceil((e.hi - e.lo) / resolution)))
        ys = np.linspace(e.lo, e.hi, m + 1)
        xs_out.append(np.full_like(ys, e.x))
        ys_out.append(ys)
    pts = np.column_stack([np.concatenate(xs_out), np.concatenate(ys_out)])
    return GraphSet(points=pts, resolution=resolution, domain=dom)


def _directed_hausdorff(P: np.ndarray, Q: np.ndarray, periodic: bool) -> float:
    """sup over P of the distance to Q, chunked to bound memory."""
    qx = Q[:, 0]
    qy = Q[:, 1]
    rows = max(1, int(2e6 / max(1, len(Q))))
    best = 0.0
    for start in range(0, len(P), rows):
        chunk = P[start:start + rows]
        dx = np.abs(chunk[:, 0, None] - qx[None, :])
        if periodic:
            dx = np.mod(dx, 1.0)
            dx = np.minimum(dx, 1.0 - dx)
        dy = chunk[:, 1, None] - qy[None, :]
        d2 = dx * dx + dy * dy
        best = max(best, float(np.max(np.sqrt(np.min(d2, axis=1)))))
    return best


def hausdorff(A: GraphSet, B: GraphSet) -> float:
    """Hausdorff distance between two sampled graphs.

    Exact on the samples (it is the max of the two directed sup-inf
    sweeps over all pairs); as an estimate of the underlying graphs it
    carries an error of at most one resolution of each input.
    """
    if A.domain.kind != B.domain.kind:
        raise ValueError("graphs live over different domain kinds")
    periodic = A.domain.kind == "torus"
    return max(_directed_hausdorff(A.points, B.points, periodic),
               _directed_hausdorff(B.points, A.points, periodic))


def graph_distance(u: Field, xi: SetValuedLimit, resolution: float) -> float:
    """Hausdorff distance between a field graph and a limit graph."""
    if u.mesh.domain != xi.domain:
        raise ValueError("field and limit must share a domain")
    return hausdorff(graph_of_field(u, resolution), graph_of_limit(xi, resolution))
