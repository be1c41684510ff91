"""Meshes, piecewise-linear nodal fields, and the eps-level energies.

All integrals use trapezoid quadrature, which matches piecewise-linear
fields with O(h^2) consistency.  The discrete weighted total variation
charges every cell by the smaller endpoint weight squared; midpoint or
max weighting would over-charge dips of the weight field, so the min
rule is the guaranteed lower bound consistent with the sup-over-test-
functions definition.

Fields are immutable by convention after construction; every energy
evaluation here is a pure function.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .potential import Potential


@dataclass(frozen=True)
class Domain1D:
    """Interval (a, b) or the unit-period torus."""

    kind: str = "interval"
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind == "torus":
            object.__setattr__(self, "a", 0.0)
            object.__setattr__(self, "b", 1.0)
        elif self.kind == "interval":
            if not self.a < self.b:
                raise ValueError("interval needs a < b")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @property
    def length(self) -> float:
        return self.b - self.a

    def wrap(self, x):
        """Map x into the fundamental domain (torus only)."""
        if self.kind == "torus":
            return np.mod(x, 1.0)
        return x

    def distance(self, x, y):
        """Point distance: periodic on the torus, |x-y| on an interval."""
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.kind == "torus":
            d = np.mod(d, 1.0)
            d = np.minimum(d, 1.0 - d)
        return float(d) if d.ndim == 0 else d

    def is_interior(self, x: float) -> bool:
        if self.kind == "torus":
            return True
        return self.a < x < self.b

    def to_json_dict(self) -> dict:
        if self.kind == "torus":
            return {"kind": "torus"}
        return {"kind": "interval", "a": self.a, "b": self.b}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Domain1D":
        kind = d.get("kind")
        if kind == "torus":
            return cls(kind="torus")
        if kind == "interval":
            return cls(kind="interval", a=float(d["a"]), b=float(d["b"]))
        raise ValueError(f"bad domain spec {d!r}")


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh: n nodes, spacing length/(n-1) on an interval, 1/n on
    the torus (nodes indexed cyclically, no duplicated seam)."""

    domain: Domain1D
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two nodes")

    @property
    def h(self) -> float:
        if self.domain.kind == "torus":
            return 1.0 / self.n
        return self.domain.length / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        if self.domain.kind == "torus":
            return np.arange(self.n) / self.n
        return np.linspace(self.domain.a, self.domain.b, self.n)

    @property
    def n_cells(self) -> int:
        return self.n if self.domain.kind == "torus" else self.n - 1

    def trapezoid_weights(self) -> np.ndarray:
        w = np.ones(self.n)
        if self.domain.kind == "interval":
            w[0] = w[-1] = 0.5
        return w


@dataclass
class Field:
    """Continuous piecewise-linear function given by nodal values."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n,):
            raise ValueError(
                f"expected {self.mesh.n} nodal values, got shape {self.values.shape}")

    @classmethod
    def from_function(cls, mesh: Mesh, fn) -> "Field":
        return cls(mesh, np.asarray(fn(mesh.nodes), dtype=float))

    @classmethod
    def constant(cls, mesh: Mesh, c: float) -> "Field":
        return cls(mesh, np.full(mesh.n, float(c)))

    def cell_diffs(self) -> np.ndarray:
        """Per-cell value increments (wrap cell included on the torus)."""
        v = self.values
        if self.mesh.domain.kind == "torus":
            return np.roll(v, -1) - v
        return np.diff(v)

    def at(self, x):
        """Piecewise-linear interpolation at x (wraps on the torus)."""
        dom = self.mesh.domain
        xs = np.asarray(x, dtype=float)
        if dom.kind == "torus":
            xw = np.mod(xs, 1.0)
            nodes = np.append(self.mesh.nodes, 1.0)
            vals = np.append(self.values, self.values[0])
            out = np.interp(xw, nodes, vals)
        else:
            tol = 1e-9 * dom.length
            if np.any(xs < dom.a - tol) or np.any(xs > dom.b + tol):
                raise ValueError(f"x outside domain [{dom.a}, {dom.b}]")
            out = np.interp(np.clip(xs, dom.a, dom.b), self.mesh.nodes, self.values)
        return float(out) if out.ndim == 0 else out

    def tv(self) -> float:
        """Discrete total variation."""
        return float(np.sum(np.abs(self.cell_diffs())))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            for x, v in zip(self.mesh.nodes, self.values):
                writer.writerow([repr(float(x)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, mesh: Mesh) -> "Field":
        xs, vs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip().lower() for c in header[:2]] != ["x", "value"]:
                raise ValueError(f"{path}: expected header 'x,value'")
            for row in reader:
                if not row:
                    continue
                xs.append(float(row[0]))
                vs.append(float(row[1]))
        xs = np.asarray(xs)
        if xs.size != mesh.n or np.any(np.diff(xs) <= 0):
            raise ValueError(f"{path}: rows must match the declared mesh, sorted by x")
        if not np.allclose(xs, mesh.nodes, atol=1e-9 * max(1.0, mesh.h)):
            raise ValueError(f"{path}: x column does not match the mesh nodes")
        return cls(mesh, np.asarray(vs))


@dataclass(frozen=True)
class PointPenalty:
    """Point penalty b * v(a)^2 at an interior location a."""

    location: float
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("penalty weight must be nonnegative")


@dataclass(frozen=True)
class EnergyReport:
    """Itemized energy value; total is the sum of the present terms."""

    gradient: float = 0.0
    potential: float = 0.0
    penalty: float = 0.0
    tv: float = 0.0
    fidelity: float = 0.0

    @property
    def total(self) -> float:
        return self.gradient + self.potential + self.penalty + self.tv + self.fidelity


def trapezoid(mesh: Mesh, values: np.ndarray) -> float:
    """Trapezoid quadrature of nodal values over the mesh."""
    return mesh.h * float(np.sum(mesh.trapezoid_weights() * values))


def _require_shared_mesh(u: Field, v: Field):
    if u.mesh.n != v.mesh.n or u.mesh.domain != v.mesh.domain:
        raise ValueError("fields must share a mesh")


def energy_smm(v: Field, eps: float, p: Potential) -> EnergyReport:
    """Single-well Modica-Mortola energy of a field.

    Gradient term (eps/2) * sum h (dv/h)^2 over cells plus potential term
    (1/2 eps) * trapezoid of F(v).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    h = v.mesh.h
    du = v.cell_diffs()
    grad = 0.5 * eps * float(np.sum(du * du)) / h
    pot = trapezoid(v.mesh, np.asarray(p.F(v.values))) / (2.0 * eps)
    return EnergyReport(gradient=grad, potential=pot)


def _penalty_value(v: Field, penalties) -> float:
    dom = v.mesh.domain
    acc = 0.0
    for pen in penalties:
        if not dom.is_interior(pen.location):
            raise ValueError(f"penalty location {pen.location} not interior to the domain")
        acc += pen.weight * v.at(pen.location) ** 2
    return acc


def energy_smm_b(v: Field, eps: float, p: Potential, penalties) -> EnergyReport:
    """Modica-Mortola energy plus point penalties sum b_l * v(a_l)^2.

    Penalty values are taken by piecewise-linear interpolation, so
    penalty locations need not sit on mesh nodes.
    """
    base = energy_smm(v, eps, p)
    return EnergyReport(gradient=base.gradient, potential=base.potential,
                        penalty=_penalty_value(v, penalties))


def _edge_weights(v: Field) -> np.ndarray:
    vals = v.values
    if v.mesh.domain.kind == "torus":
        return np.minimum(vals, np.roll(vals, -1)) ** 2
    return np.minimum(vals[:-1], vals[1:]) ** 2


def weighted_tv(u: Field, v: Field, sigma: float) -> float:
    """Discrete total variation of u weighted by min(v_k, v_{k+1})^2 per cell."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    _require_shared_mesh(u, v)
    return sigma * float(np.sum(_edge_weights(v) * np.abs(u.cell_diffs())))


def energy_kwc(u: Field, v: Field, eps: float, sigma: float, p: Potential,
               lam: float = 0.0, g: Field | None = None) -> EnergyReport:
    """Kobayashi-Warren-Carter energy, optionally with a fidelity term.

    weighted_tv(u, v, sigma) + energy_smm(v, eps, p) + lam * trapezoid((u-g)^2).
    """
    _require_shared_mesh(u, v)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam > 0 and g is None:
        raise ValueError("fidelity weight lam > 0 requires the datum g")
    base = energy_smm(v, eps, p)
    fid = 0.0
    if lam > 0:
        _require_shared_mesh(u, g)
        diff = u.values - g.values
        fid = lam * trapezoid(u.mesh, diff * diff)
    return EnergyReport(gradient=base.gradient, potential=base.potential,
                        tv=weighted_tv(u, v, sigma), fidelity=fid)
