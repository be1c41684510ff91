"""Recovery families attaining the limit energies.

The building block is the profile v(x, xi) solving dv/dx = sqrt(F(v)),
v(0) = xi, extended evenly.  Its tail is cut off by a unit-slope affine
cap once |v - 1| drops below delta * |xi - 1|, giving compact support of
radius eta in profile coordinates.  Rescaled by eps, translated to the
exceptional points, and patched additively, the resulting fields carry
energy within an explicit analytic bound of the limit energy while their
graphs converge to the limit graph.

Per-entry cutoffs shrink geometrically (delta_i = 2^(-i-2) * mu), so the
total cutoff overhead stays below mu.  Entries are ordered by decreasing
excursion size beta_i and a prefix is kept: the largest j such that the
first j block supports are mutually disjoint (and, on an interval, fit
inside the domain).  At an interval endpoint the excursion with the
larger G is centered on the boundary so only half of it is charged;
this matches the reduced endpoint charge of the limit energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError, VerificationError
from .fields import Domain1D, Field, Mesh, energy_smm
from .limits import limit_energy_smm
from .potential import Potential
from .setvalued import SetValuedLimit, graph_distance

# Discrete-energy slack per block: C * h^2 / eps, calibrated once on the
# quadratic single-entry case (measured constant is below 0.5; factor 4
# margin).  The cap slope is 1 in profile coordinates, so the sampling
# error of the energy scales like (h/eps)^2 * eps per unit support.
DISC_SLACK_C = 2.0

# Largest cutoff fraction for the quadratic well; general wells are
# scanned so the capped band satisfies max F <= 1, which keeps the cap
# overhead within the 2*beta*delta budget.
_DELTA_CAP_QUADRATIC = 0.25


@dataclass
class Profile:
    """Increasing-to-1 solution of dv/dx = sqrt(F(v)) from v(0) = xi.

    Stored as samples on x >= 0 together with the blow-up length x_star
    (math.inf when v reaches 1 only asymptotically, as for the quadratic
    well).  Values are evaluated by the closed form for the quadratic
    well and by interpolation otherwise; the even extension is implied.
    """

    xi: float
    x: np.ndarray
    v: np.ndarray
    x_star: float
    beta: float
    potential: Potential

    def value(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.potential.kind == "quadratic":
            out = 1.0 - (1.0 - self.xi) * np.exp(-ax)
        else:
            out = np.interp(ax, self.x, self.v, right=self.v[-1])
        return float(out) if out.ndim == 0 else out


@dataclass
class CutoffProfile:
    """Profile with its near-1 tail replaced by a unit-slope affine cap.

    Equals the base profile while |v - 1| >= delta * beta, then runs
    linearly to exactly 1 at |x| = eta and stays 1 outside.
    """

    base: Profile
    delta: float
    x_switch: float
    eta: float

    @property
    def cap_constant(self) -> float:
        # (|x| + c) ^ 1 for xi < 1, (-|x| + c') v 1 for xi > 1
        if self.base.xi < 1.0:
            return 1.0 - self.eta
        return 1.0 + self.eta

    def value(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        sign = -1.0 if self.base.xi < 1.0 else 1.0
        capped = 1.0 + sign * (self.eta - ax)
        out = np.where(ax >= self.eta, 1.0,
                       np.where(ax <= self.x_switch, self.base.value(ax), capped))
        return float(out) if out.ndim == 0 else out


def profile(xi: float, p: Potential, x_max: float, step: float) -> Profile:
    """Solve the separable profile equation out to x_max.

    The quadratic well has the closed form 1 -+ |xi - 1| e^{-x}; other
    wells invert |integral of 1/sqrt(F)| by marching the monotone
    quadrature in v, with resolution controlled by step.
    """
    if xi == 1.0:
        raise ValueError("profile undefined for xi = 1")
    if x_max <= 0 or step <= 0:
        raise ValueError("x_max and step must be positive")
    beta = abs(xi - 1.0)
    if p.kind == "quadratic":
        xs = np.arange(0.0, x_max + step, step)
        vs = 1.0 - (1.0 - xi) * np.exp(-xs)
        return Profile(xi=xi, x=xs, v=vs, x_star=math.inf, beta=beta, potential=p)

    # check F > 0 strictly between xi and 1
    probe = np.linspace(min(xi, 1.0), max(xi, 1.0), 513)[1:-1]
    if np.any(np.asarray(p.F(probe)) <= 0.0):
        raise ValueError("F vanishes between xi and 1: profile undefined")

    sign = 1.0 if xi < 1.0 else -1.0
    # march v toward 1, x = integral dv / sqrt(F) by composite midpoint
    v_end = 1.0 - sign * 1e-9 * beta
    dv = min(step, beta / 64.0)
    m = max(8, int(math.ceil(abs(v_end - xi) / dv)))
    vs = np.linspace(xi, v_end, m + 1)
    mids = 0.5 * (vs[:-1] + vs[1:])
    dx = (abs(v_end - xi) / m) / np.sqrt(np.asarray(p.F(mids)))
    xs = np.concatenate(([0.0], np.cumsum(dx)))
    x_star = float(xs[-1]) if xs[-1] <= 10.0 * x_max else math.inf
    grid = np.arange(0.0, x_max + step, step)
    vals = np.interp(grid, xs, vs, right=vs[-1])
    return Profile(xi=xi, x=grid, v=vals, x_star=x_star, beta=beta, potential=p)


def _switch_point(p: Potential, xi: float, delta: float) -> float:
    """x where the profile reaches |v - 1| = delta * |xi - 1|."""
    beta = abs(xi - 1.0)
    if p.kind == "quadratic":
        return math.log(1.0 / delta)
    sign = 1.0 if xi < 1.0 else -1.0
    target = 1.0 - sign * delta * beta
    dv = min(p.step, beta / 64.0)
    m = max(8, int(math.ceil(abs(target - xi) / dv)))
    vs = np.linspace(xi, target, m + 1)
    mids = 0.5 * (vs[:-1] + vs[1:])
    dx = (abs(target - xi) / m) / np.sqrt(np.asarray(p.F(mids)))
    return float(np.sum(dx))


def cutoff(pr: Profile, delta: float) -> CutoffProfile:
    """Cap the profile tail so the support radius is finite.

    The cap has unit slope and meets the profile where |v - 1| equals
    delta * beta, so the support radius is eta = x_switch + delta*beta
    and the value at +-eta is exactly 1.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    x_sw = _switch_point(pr.potential, pr.xi, delta)
    eta = x_sw + delta * pr.beta
    return CutoffProfile(base=pr, delta=delta, x_switch=x_sw, eta=eta)


def _delta_cap(p: Potential, beta: float) -> float:
    """Largest safe cutoff fraction: keeps max F over the capped band <= 1."""
    if p.kind == "quadratic":
        return _DELTA_CAP_QUADRATIC
    delta = _DELTA_CAP_QUADRATIC
    lo, hi = p.v_range
    for _ in range(40):
        band = np.linspace(max(lo, 1.0 - delta * beta), min(hi, 1.0 + delta * beta), 65)
        if float(np.max(np.asarray(p.F(band)))) <= 1.0:
            return delta
        delta *= 0.5
    return delta


@dataclass
class RecoveryBlock:
    """One patched excursion: geometry, value function, analytic bound."""

    x: float                  # exceptional location
    lo_profile: CutoffProfile | None
    hi_profile: CutoffProfile | None
    center_lo: float          # block-local center of the dip, in x units
    center_hi: float
    support: tuple            # (left, right) in unwrapped x coordinates
    bound: float
    boundary: bool

    def value(self, x, eps: float, domain: Domain1D):
        """Evaluate the block at points x (1 outside its support)."""
        xs = np.asarray(x, dtype=float)
        if domain.kind == "torus":
            # nearest unwrapped representative of each node
            mid = 0.5 * (self.support[0] + self.support[1])
            xs = xs + np.round((mid - xs))
        out = np.ones_like(xs)
        if self.lo_profile is not None:
            r = self.lo_profile.eta * eps
            mask = np.abs(xs - self.center_lo) <= r
            out[mask] = self.lo_profile.value((xs[mask] - self.center_lo) / eps)
        if self.hi_profile is not None:
            r = self.hi_profile.eta * eps
            mask = np.abs(xs - self.center_hi) <= r
            out[mask] = self.hi_profile.value((xs[mask] - self.center_hi) / eps)
        return out


def _entry_beta(e) -> float:
    return max(abs(e.hi - 1.0), abs(e.lo - 1.0))


def plan_recovery(xi: SetValuedLimit, eps: float, mu: float, p: Potential,
                  profile_step: float = 1e-3):
    """Lay out the recovery blocks for one eps.

    Returns (included, skipped): block lists in decreasing-beta order.
    Included is the maximal prefix whose supports are mutually disjoint
    and contained in the domain.
    """
    if eps <= 0 or mu <= 0:
        raise ValueError("eps and mu must be positive")
    dom = xi.domain
    order = sorted(xi.exceptional, key=lambda e: (-_entry_beta(e), e.x))
    blocks = []
    for rank, e in enumerate(order, start=1):
        beta = _entry_beta(e)
        delta = min(mu * 2.0 ** (-(rank + 2)), _delta_cap(p, beta))
        glo = p.G(e.lo)
        ghi = p.G(e.hi)
        cut_lo = None
        cut_hi = None
        if e.lo < 1.0:
            pr = profile(e.lo, p, _switch_point(p, e.lo, delta) + 1.0, profile_step)
            cut_lo = cutoff(pr, delta)
        if e.hi > 1.0:
            pr = profile(e.hi, p, _switch_point(p, e.hi, delta) + 1.0, profile_step)
            cut_hi = cutoff(pr, delta)

        on_boundary = dom.kind == "interval" and (e.x == dom.a or e.x == dom.b)
        if not on_boundary:
            if cut_lo is not None and cut_hi is not None:
                # dip centered at x, excursion above 1 abutting on the right
                c_lo = e.x
                c_hi = e.x + eps * (cut_lo.eta + cut_hi.eta)
                support = (c_lo - eps * cut_lo.eta, c_hi + eps * cut_hi.eta)
                bound = 2.0 * (glo + ghi) + 4.0 * beta * delta
            else:
                cut = cut_lo if cut_lo is not None else cut_hi
                c_lo = e.x if cut_lo is not None else math.nan
                c_hi = e.x if cut_hi is not None else math.nan
                support = (e.x - eps * cut.eta, e.x + eps * cut.eta)
                bound = 2.0 * (glo + ghi) + 2.0 * beta * delta
            blocks.append(RecoveryBlock(e.x, cut_lo, cut_hi,
                                        c_lo, c_hi, support, bound, False))
            continue

        # interval endpoint: put the larger-G excursion on the boundary
        # so it is charged once; the other excursion sits just inside.
        at_right = e.x == dom.b
        direction = -1.0 if at_right else 1.0
        if cut_lo is not None and cut_hi is not None:
            big, small = (cut_lo, cut_hi) if glo >= ghi else (cut_hi, cut_lo)
            c_big = e.x
            c_small = e.x + direction * eps * (big.eta + small.eta)
            inner = c_small + direction * eps * small.eta
            support = (min(e.x, inner), max(e.x, inner))
            if big is cut_lo:
                c_lo, c_hi = c_big, c_small
            else:
                c_lo, c_hi = c_small, c_big
            bound = 2.0 * min(glo, ghi) + max(glo, ghi) + 3.0 * beta * delta
        else:
            cut = cut_lo if cut_lo is not None else cut_hi
            c_lo = e.x if cut_lo is not None else math.nan
            c_hi = e.x if cut_hi is not None else math.nan
            inner = e.x + direction * eps * cut.eta
            support = (min(e.x, inner), max(e.x, inner))
            bound = max(glo, ghi) + 2.0 * beta * delta
        blocks.append(RecoveryBlock(e.x, cut_lo, cut_hi,
                                    c_lo, c_hi, support, bound, True))

    included = []
    for blk in blocks:
        if not _fits(blk, included, dom):
            break
        included.append(blk)
    return included, blocks[len(included):]


def _fits(blk: RecoveryBlock, included, dom: Domain1D) -> bool:
    lo, hi = blk.support
    width = hi - lo
    if dom.kind == "interval":
        tol = 1e-12 * max(1.0, dom.length)
        if lo < dom.a - tol or hi > dom.b + tol:
            return False
        return all(hi <= o.support[0] or lo >= o.support[1] for o in included)
    if width >= 1.0:
        return False
    for o in included:
        # arc-disjointness via circular gap between center angles
        om = 0.5 * (o.support[0] + o.support[1])
        bm = 0.5 * (lo + hi)
        gap = abs(bm - om) % 1.0
        gap = min(gap, 1.0 - gap)
        if gap < 0.5 * width + 0.5 * (o.support[1] - o.support[0]):
            return False
    return True


def build_recovery(xi: SetValuedLimit, eps: float, mu: float, p: Potential,
                   mesh: Mesh):
    """Sample the patched recovery field on a mesh.

    Returns (field, bound): the nodal samples of the continuous
    construction and the analytic energy bound summed over the included
    blocks.  Raises ResolutionError when an included block spans fewer
    than 4 cells, since the sampled energy would then be meaningless.
    """
    if mesh.domain != xi.domain:
        raise ValueError("mesh and limit must share a domain")
    included, _ = plan_recovery(xi, eps, mu, p)
    h = mesh.h
    for blk in included:
        for cut in (blk.lo_profile, blk.hi_profile):
            if cut is not None and eps * cut.eta / h < 4.0:
                raise ResolutionError(
                    f"block at x = {blk.x}: support radius {eps * cut.eta:.3g} "
                    f"spans fewer than 4 cells of width {h:.3g}")
    vals = np.ones(mesh.n)
    for blk in included:
        vals += blk.value(mesh.nodes, eps, mesh.domain) - 1.0
    bound = sum(blk.bound for blk in included)
    return Field(mesh, vals), bound


@dataclass(frozen=True)
class LimsupRow:
    """One eps of a recovery verification sweep."""

    eps: float
    discrete_energy: float
    limit_energy: float
    mu: float
    graph_distance: float
    bound: float
    n_blocks: int


def verify_limsup(xi: SetValuedLimit, p: Potential, eps_schedule, mu: float,
                  cells_per_eps: int = 16, resolution: float = 1e-3,
                  check: bool = True):
    """Run the recovery construction down an eps schedule.

    For each eps the discrete energy of the recovery field, the limit
    energy, and the graph distance to the limit are tabulated.  With
    check=True the energy rows must satisfy
    energy <= limit + mu + slack(h, eps) and the distances must be
    nonincreasing up to one resolution; violations raise
    VerificationError.
    """
    eps_schedule = [float(e) for e in eps_schedule]
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    limit = limit_energy_smm(xi, p)
    rows = []
    for eps in eps_schedule:
        h_target = eps / cells_per_eps
        if xi.domain.kind == "torus":
            n = max(2, int(math.ceil(1.0 / h_target)))
        else:
            n = max(2, int(math.ceil(xi.domain.length / h_target)) + 1)
        mesh = Mesh(xi.domain, n)
        w, bound = build_recovery(xi, eps, mu, p, mesh)
        energy = energy_smm(w, eps, p).total
        dist = graph_distance(w, xi, resolution)
        included, _ = plan_recovery(xi, eps, mu, p)
        rows.append(LimsupRow(eps=eps, discrete_energy=energy, limit_energy=limit,
                              mu=mu, graph_distance=dist, bound=bound,
                              n_blocks=len(included)))
    if check:
        for row in rows:
            h = eps_to_h(row.eps, cells_per_eps)
            slack = DISC_SLACK_C * h * h / row.eps
            if row.discrete_energy > row.limit_energy + mu + slack:
                raise VerificationError(
                    f"eps = {row.eps}: energy {row.discrete_energy:.6g} exceeds "
                    f"limit + mu + slack = {row.limit_energy + mu + slack:.6g}")
        for a, b in zip(rows, rows[1:]):
            if b.graph_distance > a.graph_distance + resolution:
                raise VerificationError(
                    f"graph distance increased from {a.graph_distance:.6g} "
                    f"at eps = {a.eps} to {b.graph_distance:.6g} at eps = {b.eps}")
    return rows


def eps_to_h(eps: float, cells_per_eps: int) -> float:
    return eps / cells_per_eps


def write_limsup_csv(rows, path):
    """The five-column sweep table: eps, energies, mu, graph distance."""
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eps", "discrete_energy", "limit_energy", "mu",
                         "graph_distance"])
        for r in rows:
            writer.writerow([repr(float(c)) for c in
                             (r.eps, r.discrete_energy, r.limit_energy, r.mu,
                              r.graph_distance)])
