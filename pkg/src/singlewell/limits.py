"""Limit energies on set-valued objects and jump functions.

These are the sharp-interface counterparts of the eps-level energies:
each exceptional point of a set-valued limit is charged through G, with
a reduced charge kappa at interval endpoints, and jumps of a BV-type
function are charged by the squared lower limit value where they meet
the exceptional set.  Jump/exceptional matching uses exact location
equality after a snap-tolerance pass (default 1e-12): a declared rule
standing in for the set intersection that floating point cannot take
literally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fields import Domain1D
from .potential import Potential
from .setvalued import SetValuedLimit

_SNAP_TOL = 1e-12


@dataclass(frozen=True)
class JumpFunction:
    """Piecewise-constant-plus-AC description of a BV function.

    Carries the jump locations and sizes, a scalar absolutely-continuous
    total-variation contribution, and a left anchor value used only when
    the function is materialized.
    """

    domain: Domain1D
    jumps: tuple            # of (location, size) pairs
    ac_tv: float = 0.0
    anchor: float = 0.0

    def __post_init__(self):
        entries = []
        seen = set()
        for loc, d in self.jumps:
            loc, d = float(loc), float(d)
            if d <= 0:
                raise ValueError("jump sizes must be positive")
            if not self.domain.is_interior(loc):
                raise ValueError(f"jump location {loc} not interior to the domain")
            if self.domain.kind == "torus":
                loc = float(np.mod(loc, 1.0))
            if loc in seen:
                raise ValueError("jump locations must be distinct")
            seen.add(loc)
            entries.append((loc, d))
        object.__setattr__(self, "jumps", tuple(entries))
        if self.ac_tv < 0:
            raise ValueError("ac_tv must be nonnegative")

    def to_json(self) -> str:
        return json.dumps({
            "domain": self.domain.to_json_dict(),
            "jumps": [{"x": x, "d": d} for x, d in self.jumps],
            "ac_tv": self.ac_tv,
            "anchor": self.anchor,
        })

    @classmethod
    def from_json(cls, text: str) -> "JumpFunction":
        d = json.loads(text)
        return cls(domain=Domain1D.from_json_dict(d["domain"]),
                   jumps=tuple((float(j["x"]), float(j["d"])) for j in d.get("jumps", [])),
                   ac_tv=float(d.get("ac_tv", 0.0)),
                   anchor=float(d.get("anchor", 0.0)))


def _boundary_kappa(xi: SetValuedLimit, x: float) -> float:
    dom = xi.domain
    if dom.kind == "torus":
        return 0.0
    return 1.0 if (x == dom.a or x == dom.b) else 0.0


def limit_energy_smm(xi: SetValuedLimit, p: Potential) -> float:
    """Limit Modica-Mortola energy of a set-valued object.

    Every exceptional point contributes 2(G(lo) + G(hi)) minus, at an
    interval endpoint, one max(G(lo), G(hi)).
    """
    total = 0.0
    for e in xi.exceptional:
        glo = p.G(e.lo)
        ghi = p.G(e.hi)
        kappa = _boundary_kappa(xi, e.x)
        total += 2.0 * (glo + ghi) - kappa * max(glo, ghi)
    return total


def _min_value_at(xi: SetValuedLimit, a: float, snap_tol: float) -> float:
    dom = xi.domain
    for e in xi.exceptional:
        if dom.distance(e.x, a) <= snap_tol:
            return e.lo
    return 1.0


def limit_energy_smm_b(xi: SetValuedLimit, p: Potential, penalties,
                       snap_tol: float = _SNAP_TOL) -> float:
    """Limit energy with point penalties sum b_l (min value at a_l)^2."""
    total = limit_energy_smm(xi, p)
    for pen in penalties:
        if not xi.domain.is_interior(pen.location):
            raise ValueError(f"penalty location {pen.location} not interior")
        total += pen.weight * _min_value_at(xi, pen.location, snap_tol) ** 2
    return total


def limit_energy_kwc(u: JumpFunction, xi: SetValuedLimit, sigma: float,
                     p: Potential, snap_tol: float = _SNAP_TOL) -> float:
    """Limit KWC energy of a jump function against a set-valued object.

    Jumps at exceptional points are charged d * lo^2; all remaining
    variation (other jumps plus the AC part) is charged at full weight.
    The form with the intersection of jump set and exceptional set is
    used; since the AC part carries no mass on single points, charging
    all exceptional points instead would give the same value.
    """
    if u.domain != xi.domain:
        raise ValueError("jump function and limit must share a domain")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    plain = u.ac_tv
    weighted = 0.0
    for loc, d in u.jumps:
        if _is_exceptional(xi, loc, snap_tol):
            lo = _min_value_at(xi, loc, snap_tol)
            weighted += d * lo * lo
        else:
            plain += d
    return sigma * plain + sigma * weighted + limit_energy_smm(xi, p)


def _is_exceptional(xi: SetValuedLimit, x: float, snap_tol: float) -> bool:
    return any(xi.domain.distance(e.x, x) <= snap_tol for e in xi.exceptional)


def limit_pointwise_minimizer(b: float, p: Potential):
    """Minimize q -> 2 G(q) + b q^2 over [0, 1].

    This is the dip value selected by minimizers in the vanishing-eps
    limit.  Closed form 1/(b+1) for the quadratic well; otherwise
    golden-section search refined by one parabolic fit.
    """
    if b < 0:
        raise ValueError("b must be nonnegative")
    if p.kind == "quadratic":
        p0 = 1.0 / (b + 1.0)
        return p0, 2.0 * p.G(p0) + b * p0 * p0

    def f(q):
        return 2.0 * p.G(q) + b * q * q

    a, c = 0.0, 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = c - invphi * (c - a)
    x2 = a + invphi * (c - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if c - a < 1e-13:
            break
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - invphi * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (c - a)
            f2 = f(x2)
    q0 = 0.5 * (a + c)
    # one parabolic polish through three nearby samples, clipped to [0, 1]
    d = max(1e-9, 0.5 * (c - a))
    qs = np.clip([q0 - d, q0, q0 + d], 0.0, 1.0)
    if qs[0] < qs[1] < qs[2]:
        fs = [f(q) for q in qs]
        denom = (qs[2] - qs[1]) * fs[0] + (qs[0] - qs[2]) * fs[1] + (qs[1] - qs[0]) * fs[2]
        if abs(denom) > 0:
            num = ((qs[2] ** 2 - qs[1] ** 2) * fs[0] + (qs[0] ** 2 - qs[2] ** 2) * fs[1]
                   + (qs[1] ** 2 - qs[0] ** 2) * fs[2])
            qv = 0.5 * num / denom
            if 0.0 <= qv <= 1.0 and f(qv) < f(q0):
                q0 = qv
    return float(q0), float(f(q0))
