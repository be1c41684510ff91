"""Single-well potentials F and the antiderivative-of-root G.

A potential is either the quadratic well F(v) = (v-1)^2, for which
everything has closed form, or a tabulated well given by samples of F on
a grid of v values.  Tabulated potentials evaluate F by linear
interpolation and G(v) = |integral of sqrt(F) from 1 to v| by composite
trapezoid quadrature with a stated step, so tabulated G carries O(step^2)
error.  The tabulated range is a hard restriction: F is undefined
outside it and growth beyond the range cannot be checked.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

# F values at or below this count as an exact zero of the well.
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ConditionReport:
    """Pass/fail record for the well conditions of a potential.

    ``nonneg_unique_zero`` requires F >= 0 with its only zero at v = 1.
    ``positive_at_infinity`` is checked at the tabulated range endpoints
    only; a finite table cannot verify behaviour at infinity.
    ``quadratic_growth`` checks F(v) >= c0*v^2 - c1 with the stored
    constants on the sampled range.
    """

    nonneg_unique_zero: bool
    positive_at_infinity: bool
    quadratic_growth: bool
    c0: float
    c1: float
    notes: tuple[str, ...] = ()

    def all_pass(self) -> bool:
        return (self.nonneg_unique_zero and self.positive_at_infinity
                and self.quadratic_growth)


@dataclass(frozen=True)
class Potential:
    """Single-well potential with derived G.

    For the quadratic kind, F(v) = (v-1)^2 and G(v) = (v-1)^2/2 exactly,
    and the growth constants default to c0 = 1/2, c1 = 1 (which satisfy
    (v-1)^2 >= v^2/2 - 1 for all v).
    """

    kind: str = "quadratic"
    v_grid: np.ndarray | None = None
    f_grid: np.ndarray | None = None
    step: float = 1e-3
    c0: float = 0.5
    c1: float = 1.0

    def __post_init__(self):
        if self.kind not in ("quadratic", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.v_grid is None or self.f_grid is None:
                raise ValueError("tabulated potential needs v_grid and f_grid")
            v = np.asarray(self.v_grid, dtype=float)
            f = np.asarray(self.f_grid, dtype=float)
            if v.ndim != 1 or v.shape != f.shape or v.size < 2:
                raise ValueError("v_grid and f_grid must be 1d arrays of equal length >= 2")
            if not np.all(np.diff(v) > 0):
                raise ValueError("v_grid must be strictly increasing")
            if not (v[0] <= 1.0 <= v[-1]):
                raise ValueError("tabulated range must contain v = 1")
            object.__setattr__(self, "v_grid", v)
            object.__setattr__(self, "f_grid", f)
        if self.step <= 0:
            raise ValueError("quadrature step must be positive")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def quadratic(cls) -> "Potential":
        return cls(kind="quadratic")

    @classmethod
    def tabulated(cls, v_grid, f_grid, step=1e-3, c0=0.5, c1=1.0) -> "Potential":
        return cls(kind="tabulated", v_grid=np.asarray(v_grid, dtype=float),
                   f_grid=np.asarray(f_grid, dtype=float), step=step, c0=c0, c1=c1)

    @classmethod
    def from_csv(cls, path, step=1e-3, c0=0.5, c1=1.0) -> "Potential":
        """Load a tabulated potential from CSV with header line ``v,F``."""
        vs, fs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip().lower() for c in header[:2]] != ["v", "f"]:
                raise ValueError(f"{path}: expected header 'v,F'")
            for row in reader:
                if not row:
                    continue
                vs.append(float(row[0]))
                fs.append(float(row[1]))
        return cls.tabulated(vs, fs, step=step, c0=c0, c1=c1)

    # -- evaluation ------------------------------------------------------------

    def F(self, v):
        """Evaluate the potential at v (scalar or array)."""
        v = np.asarray(v, dtype=float)
        if self.kind == "quadratic":
            out = (v - 1.0) ** 2
        else:
            lo, hi = self.v_grid[0], self.v_grid[-1]
            if np.any(v < lo) or np.any(v > hi):
                raise ValueError(
                    f"v outside tabulated range [{lo}, {hi}]")
            out = np.interp(v, self.v_grid, self.f_grid)
        return float(out) if out.ndim == 0 else out

    def G(self, v):
        """|integral of sqrt(F) from 1 to v|; exact for the quadratic kind."""
        v = np.asarray(v, dtype=float)
        if self.kind == "quadratic":
            out = 0.5 * (v - 1.0) ** 2
            return float(out) if out.ndim == 0 else out
        if v.ndim == 0:
            return self._g_scalar(float(v))
        return np.array([self._g_scalar(float(x)) for x in v.ravel()]).reshape(v.shape)

    def _g_scalar(self, v: float) -> float:
        if v == 1.0:
            return 0.0
        m = max(1, int(math.ceil(abs(v - 1.0) / self.step)))
        grid = np.linspace(1.0, v, m + 1)
        root = np.sqrt(np.maximum(self.F(grid), 0.0))
        dt = (v - 1.0) / m
        return abs(dt) * (0.5 * (root[0] + root[-1]) + float(np.sum(root[1:-1])))

    def dF(self, v):
        """Derivative of F; central differences on the table grid spacing."""
        v = np.asarray(v, dtype=float)
        if self.kind == "quadratic":
            out = 2.0 * (v - 1.0)
            return float(out) if out.ndim == 0 else out
        lo, hi = self.v_grid[0], self.v_grid[-1]
        d = 0.5 * float(np.min(np.diff(self.v_grid)))
        vp = np.clip(v + d, lo, hi)
        vm = np.clip(v - d, lo, hi)
        out = (np.interp(vp, self.v_grid, self.f_grid)
               - np.interp(vm, self.v_grid, self.f_grid)) / (vp - vm)
        return float(out) if out.ndim == 0 else out

    @property
    def v_range(self) -> tuple[float, float]:
        if self.kind == "quadratic":
            return (-math.inf, math.inf)
        return (float(self.v_grid[0]), float(self.v_grid[-1]))

    # -- condition checks --------------------------------------------------------

    def check_conditions(self) -> ConditionReport:
        """Check the well conditions on the available samples."""
        notes = []
        if self.kind == "quadratic":
            return ConditionReport(True, True, True, self.c0, self.c1,
                                   ("quadratic well: conditions hold in closed form",))
        v, f = self.v_grid, self.f_grid
        nonneg = bool(np.all(f >= 0.0))
        zeros = v[f <= _ZERO_TOL]
        spacing = float(np.max(np.diff(v)))
        unique_zero = zeros.size > 0 and bool(np.all(np.abs(zeros - 1.0) <= spacing))
        if zeros.size == 0:
            notes.append("no sampled zero; well bottom not on the grid")
        f1 = nonneg and unique_zero
        f2 = bool(f[0] > _ZERO_TOL and f[-1] > _ZERO_TOL)
        notes.append("positivity at infinity checked at the range endpoints only")
        f2p = bool(np.all(f >= self.c0 * v ** 2 - self.c1 - 1e-12))
        return ConditionReport(f1, f2, f2p, self.c0, self.c1, tuple(notes))


# Operation-style aliases; the methods above are the primary surface.

def eval_F(p: Potential, v):
    return p.F(v)


def eval_G(p: Potential, v):
    return p.G(v)


def check_conditions(p: Potential) -> ConditionReport:
    return p.check_conditions()
