"""Minimizers of the eps-level energies.

The quadratic-well case reduces to one linear tridiagonal solve
(cyclic-tridiagonal on the torus).  General wells use gradient descent
with backtracking.  The weighted-TV proximal step is solved exactly by a
chain dynamic program that propagates the piecewise-linear derivative of
the running value function and clips it at the edge weights; on the
torus the cycle is cut at node 0 and the cut value is optimized by
golden-section search over the resulting convex one-dimensional problem.

Point penalties are spread over the two nodes of the containing cell
with linear-interpolation weights.  This keeps the system tridiagonal
and is exact whenever the location sits on a node; snapping to the
nearest node instead would shift the dip by up to h/2, an O(h/eps)
model error that is an order larger than the interpolation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceError
from .fields import Field, Mesh, PointPenalty, energy_kwc, energy_smm_b
from .potential import Potential


@dataclass
class SolveOptions:
    """Iteration controls for the descent and alternating solvers."""

    max_iter: int = 20000
    tol: float = 1e-8
    rounds: int = 30
    step_rule: str = "backtracking"   # or "fixed"
    step_size: float = 1e-2           # used by the fixed rule

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1 or self.rounds < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.step_rule not in ("backtracking", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


def closed_form_minimizer(eps: float, b: float):
    """Minimizer of the quadratic-well energy with penalty b at 0 on (-1, 1).

    Returns the Neumann minimizer as a vectorized callable.  The growing
    exponential is evaluated as exp((|x|-2)/eps) so nothing overflows for
    small eps; the combination is exactly the textbook two-exponential
    formula rewritten in a cancellation-safe order.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    q = math.exp(-2.0 / eps)
    denom = 1.0 - q * q + b * (1.0 + q) ** 2
    amp = b * (1.0 + q) / denom

    def w(x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = 1.0 - amp * (np.exp(-ax / eps) + np.exp((ax - 2.0) / eps))
        return float(out) if out.ndim == 0 else out

    return w


def _penalty_cells(mesh: Mesh, penalties):
    """Locate each penalty: (left node index, weight on left, weight on right)."""
    dom = mesh.domain
    h = mesh.h
    out = []
    for pen in penalties:
        if not dom.is_interior(pen.location):
            raise ValueError(f"penalty location {pen.location} not interior to the domain")
        if dom.kind == "torus":
            xw = pen.location % 1.0
            k = min(int(xw / h), mesh.n - 1)
            theta = (xw - k * h) / h
            out.append((k, (k + 1) % mesh.n, 1.0 - theta, theta, pen.weight))
        else:
            k = min(int((pen.location - dom.a) / h), mesh.n - 2)
            theta = (pen.location - mesh.nodes[k]) / h
            out.append((k, k + 1, 1.0 - theta, theta, pen.weight))
    return out


def smm_b_gradient(v: Field, eps: float, p: Potential, penalties) -> np.ndarray:
    """Gradient of the discrete penalized Modica-Mortola energy."""
    mesh = v.mesh
    h = mesh.h
    vals = v.values
    g = np.zeros_like(vals)
    if mesh.domain.kind == "torus":
        g += (eps / h) * (2.0 * vals - np.roll(vals, 1) - np.roll(vals, -1))
    else:
        g[1:-1] = (eps / h) * (2.0 * vals[1:-1] - vals[:-2] - vals[2:])
        g[0] = (eps / h) * (vals[0] - vals[1])
        g[-1] = (eps / h) * (vals[-1] - vals[-2])
    g += (h / (2.0 * eps)) * mesh.trapezoid_weights() * np.asarray(p.dF(vals))
    for k, k1, wl, wr, b in _penalty_cells(mesh, penalties):
        val = wl * vals[k] + wr * vals[k1]
        g[k] += 2.0 * b * val * wl
        g[k1] += 2.0 * b * val * wr
    return g


def minimize_smm_b_quadratic(mesh: Mesh, eps: float, penalties=()) -> Field:
    """Unique minimizer of the quadratic-well penalized energy.

    Solves the linear stationarity system directly: tridiagonal with
    natural (Neumann) boundary rows on an interval, cyclic-tridiagonal
    on the torus.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = mesh.n
    h = mesh.h
    tau = mesh.trapezoid_weights()
    cells = _penalty_cells(mesh, penalties)

    if mesh.domain.kind == "interval":
        diag = (h / eps) * tau
        diag[1:-1] += 2.0 * eps / h
        diag[0] += eps / h
        diag[-1] += eps / h
        off = np.full(n - 1, -eps / h)
        for k, k1, wl, wr, b in cells:
            diag[k] += 2.0 * b * wl * wl
            diag[k1] += 2.0 * b * wr * wr
            off[k] += 2.0 * b * wl * wr
        ab = np.zeros((2, n))
        ab[0] = diag
        ab[1, :-1] = off
        rhs = (h / eps) * tau
        sol = scipy.linalg.solveh_banded(ab, rhs, lower=True)
    else:
        diag = np.full(n, 2.0 * eps / h + h / eps)
        mat = scipy.sparse.lil_matrix((n, n))
        mat.setdiag(diag)
        for i in range(n):
            mat[i, (i + 1) % n] += -eps / h
            mat[i, (i - 1) % n] += -eps / h
        for k, k1, wl, wr, b in cells:
            mat[k, k] += 2.0 * b * wl * wl
            mat[k1, k1] += 2.0 * b * wr * wr
            mat[k, k1] += 2.0 * b * wl * wr
            mat[k1, k] += 2.0 * b * wl * wr
        rhs = np.full(n, h / eps)
        sol = scipy.sparse.linalg.spsolve(mat.tocsr(), rhs)
    return Field(mesh, sol)


def minimize_smm_b_general(mesh: Mesh, eps: float, p: Potential, penalties=(),
                           opts: SolveOptions | None = None) -> Field:
    """Gradient descent for a general single-well potential.

    Starts from v = 1 and iterates descent with backtracking (or a fixed
    step) until the sup norm of the discrete gradient drops below the
    tolerance.  For convex wells the critical point is the global
    minimizer.  Raises ConvergenceError carrying the last iterate if the
    iteration cap is hit.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    opts = opts or SolveOptions()
    report = p.check_conditions()
    if not report.nonneg_unique_zero:
        raise ValueError("potential fails the single-well condition")

    v = np.ones(mesh.n)
    fld = Field(mesh, v)

    def energy(vals):
        return energy_smm_b(Field(mesh, vals), eps, p, penalties).total

    e = energy(v)
    step = opts.step_size if opts.step_rule == "fixed" else 1.0
    for _ in range(opts.max_iter):
        g = smm_b_gradient(Field(mesh, v), eps, p, penalties)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= opts.tol:
            return Field(mesh, v)
        if opts.step_rule == "fixed":
            v = v - step * g
            e = energy(v)
            continue
        g2 = float(np.dot(g, g))
        while True:
            trial = v - step * g
            et = energy(trial)
            if et <= e - 0.5 * step * g2 or step < 1e-16:
                break
            step *= 0.5
        v, e = trial, et
        step *= 2.0
    raise ConvergenceError(
        f"descent did not reach tolerance {opts.tol} in {opts.max_iter} iterations",
        last=Field(mesh, v))


# ---------------------------------------------------------------------------
# Exact prox of the weighted total variation plus quadratic fidelity
# ---------------------------------------------------------------------------
#
# _chain_prox minimizes sum_i c_i (u_i - g_i)^2 + sum_k w_k |u_{k+1} - u_k|
# exactly.  The derivative of the running value function is piecewise
# linear and nondecreasing; it is stored as segments [start, a, b] with
# D(u) = (a + A) u + (b + B) on each segment, where (A, B) accumulate the
# quadratic terms added after the segment was created.  Clipping at
# +-w_k implements the inf-convolution with w_k |.|.

def _clip_left(segs, A, B, w):
    while True:
        x0, a, b = segs[0]
        ae, be = a + A, b + B
        xe = segs[1][0] if len(segs) > 1 else math.inf
        if xe < math.inf and ae * xe + be < -w:
            segs.pop(0)
            continue
        root = (-w - be) / ae
        if x0 > -math.inf:
            root = max(root, x0)
        break
    segs[0:1] = [[-math.inf, -A, -w - B], [root, a, b]]
    return root


def _clip_right(segs, A, B, w):
    xe = math.inf
    while True:
        x0, a, b = segs[-1]
        ae, be = a + A, b + B
        if x0 > -math.inf and ae * x0 + be > w:
            segs.pop()
            xe = x0
            continue
        if ae == 0.0:
            # flat tail at -w (w = 0 up to rounding); crossing sits at
            # the knot where the walk last popped
            root = xe
        else:
            root = (w - be) / ae
            if xe < math.inf:
                # derivative jumps over +w at the knot xe
                root = min(root, xe)
        break
    segs.append([root, -A, w - B])
    return root


def _add_abs(segs, A, B, w, t):
    """Add derivative of w |u - t|: -w left of t, +w right of t."""
    idx = 0
    for j, (x0, a, b) in enumerate(segs):
        if x0 <= t:
            idx = j
        else:
            break
    for j in range(idx):
        segs[j][2] -= w
    for j in range(idx + 1, len(segs)):
        segs[j][2] += w
    x0, a, b = segs[idx]
    segs[idx:idx + 1] = [[x0, a, b - w], [t, a, b + w]]


def _final_root(segs, A, B):
    xe = math.inf
    while True:
        x0, a, b = segs[-1]
        ae, be = a + A, b + B
        if x0 > -math.inf and ae * x0 + be > 0.0:
            segs.pop()
            xe = x0
            continue
        root = -be / ae
        if x0 > -math.inf:
            root = max(root, x0)
        if xe < math.inf:
            root = min(root, xe)
        return root


def _chain_prox(g, c, w, left_anchor=None, right_anchor=None):
    """Exact minimizer of sum c_i (u_i-g_i)^2 + sum w_k |u_{k+1}-u_k|
    plus optional absolute anchors wl |u_0 - tl|, wr |u_last - tr|."""
    n = len(g)
    u = np.empty(n)
    segs = [[-math.inf, 0.0, 0.0]]
    A = 2.0 * c[0]
    B = -2.0 * c[0] * g[0]
    if left_anchor is not None:
        wl, tl = left_anchor
        if wl > 0.0:
            _add_abs(segs, A, B, wl, tl)
    lo = np.empty(max(n - 1, 0))
    hi = np.empty(max(n - 1, 0))
    for k in range(n - 1):
        lo[k] = _clip_left(segs, A, B, w[k])
        hi[k] = _clip_right(segs, A, B, w[k])
        A += 2.0 * c[k + 1]
        B += -2.0 * c[k + 1] * g[k + 1]
    if right_anchor is not None:
        wr, tr = right_anchor
        if wr > 0.0:
            _add_abs(segs, A, B, wr, tr)
    u[n - 1] = _final_root(segs, A, B)
    for k in range(n - 2, -1, -1):
        u[k] = min(max(u[k + 1], lo[k]), hi[k])
    return u


def _prox_data(g: Field, v: Field, sigma: float, lam: float):
    mesh = g.mesh
    c = lam * mesh.h * mesh.trapezoid_weights()
    vals = v.values
    if mesh.domain.kind == "torus":
        w = sigma * np.minimum(vals, np.roll(vals, -1)) ** 2
    else:
        w = sigma * np.minimum(vals[:-1], vals[1:]) ** 2
    return c, w


def _cyclic_objective(u, gvals, c, w):
    du = np.roll(u, -1) - u
    diff = u - gvals
    return float(np.sum(c * diff * diff) + np.sum(w * np.abs(du)))


def prox_weighted_tv(g: Field, v: Field, sigma: float, lam: float) -> Field:
    """Exact minimizer of sigma * weighted TV + lam * trapezoid((u - g)^2).

    On an interval the chain dynamic program is exact; on the torus the
    cycle is cut at node 0 and the cut value is found by golden-section
    search over the partially-minimized objective, which is convex.  The
    objective is resolved to ~1e-13 of scale, which pins the torus
    solution to about 1e-8 of the data range (the value function is flat
    to second order at the optimum).
    """
    if lam <= 0:
        raise ValueError("lam must be positive (lam = 0 leaves the minimizer nonunique)")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if g.mesh.n != v.mesh.n or g.mesh.domain != v.mesh.domain:
        raise ValueError("fields must share a mesh")
    c, w = _prox_data(g, v, sigma, lam)
    gvals = g.values
    if g.mesh.domain.kind == "interval":
        return Field(g.mesh, _chain_prox(gvals, c, w))

    n = g.mesh.n
    if n == 1:
        return Field(g.mesh, gvals.copy())

    def solve_for(t):
        inner = _chain_prox(gvals[1:], c[1:], w[1:n - 1],
                            left_anchor=(w[0], t), right_anchor=(w[n - 1], t))
        u = np.empty(n)
        u[0] = t
        u[1:] = inner
        return u

    def phi(t):
        return _cyclic_objective(solve_for(t), gvals, c, w)

    a, b = float(np.min(gvals)), float(np.max(gvals))
    if b - a < 1e-15:
        return Field(g.mesh, gvals.copy())
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = phi(x1), phi(x2)
    while b - a > 1e-13 * max(1.0, abs(a) + abs(b)):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = phi(x2)
    return Field(g.mesh, solve_for(0.5 * (a + b)))


def minimize_kwc_alternating(g: Field, eps: float, sigma: float, p: Potential,
                             lam: float, opts: SolveOptions | None = None,
                             trace: list | None = None):
    """Alternating minimization of the KWC energy with fidelity.

    The u-step is the exact weighted-TV prox of the datum at the current
    v.  The v-step converts per-cell TV mass sigma |du| into point
    penalties at cell midpoints and solves the penalized well problem;
    the new v is accepted only if the true energy decreases, so the
    energy trace is nonincreasing across half-steps by construction.
    The joint objective is nonconvex, so the limit point is a
    coordinate-wise minimizer, not necessarily global.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    opts = opts or SolveOptions()
    mesh = g.mesh
    v = Field.constant(mesh, 1.0)
    u = Field(mesh, g.values.copy())
    energy = energy_kwc(u, v, eps, sigma, p, lam, g).total

    h = mesh.h
    nodes = mesh.nodes
    for _ in range(opts.rounds):
        u = prox_weighted_tv(g, v, sigma, lam)
        e_u = energy_kwc(u, v, eps, sigma, p, lam, g).total
        if trace is not None:
            trace.append(("u", e_u))

        du = u.cell_diffs()
        pens = []
        for k in range(len(du)):
            d = abs(float(du[k]))
            if d == 0.0:
                continue
            mid = nodes[k] + 0.5 * h
            if mesh.domain.kind == "torus":
                mid %= 1.0
            pens.append(PointPenalty(mid, sigma * d))
        if p.kind == "quadratic":
            v_new = minimize_smm_b_quadratic(mesh, eps, pens)
        else:
            v_new = minimize_smm_b_general(mesh, eps, p, pens, opts)
        e_v = energy_kwc(u, v_new, eps, sigma, p, lam, g).total
        if e_v <= e_u:
            v = v_new
            e_new = e_v
        else:
            e_new = e_u
        if trace is not None:
            trace.append(("v", e_new))
        decrease = energy - e_new
        energy = e_new
        if decrease < opts.tol:
            break
    return u, v, energy_kwc(u, v, eps, sigma, p, lam, g)
