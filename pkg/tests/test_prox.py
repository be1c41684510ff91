"""Weighted-TV prox and the alternating KWC scheme.

The reference for the prox is an exhaustive-pattern convex oracle: every
sign pattern of the increments gives an equality/linearized quadratic
program; the minimizer over all patterns of the true objective is the
exact solution.
"""

import itertools

import numpy as np
import pytest

from singlewell import (Domain1D, Field, Mesh, Potential, SolveOptions, energy_kwc,
                        minimize_kwc_alternating, prox_weighted_tv)
from singlewell.minimize import _chain_prox

P = Potential.quadratic()


def oracle_chain(g, c, w):
    """Brute-force minimizer of sum c_i (u_i - g_i)^2 + sum w_k |du_k|."""
    n = len(g)

    def true_obj(u):
        return float(np.sum(c * (u - g) ** 2) + np.sum(w * np.abs(np.diff(u))))

    best, best_u = np.inf, None
    for pat in itertools.product((-1, 0, 1), repeat=n - 1):
        groups = [0]
        for s in pat:
            groups.append(groups[-1] + (1 if s != 0 else 0))
        m = groups[-1] + 1
        A = np.zeros((m, m))
        rhs = np.zeros(m)
        for i in range(n):
            gi = groups[i]
            A[gi, gi] += 2.0 * c[i]
            rhs[gi] += 2.0 * c[i] * g[i]
        for k, s in enumerate(pat):
            if s != 0:
                rhs[groups[k + 1]] -= w[k] * s
                rhs[groups[k]] += w[k] * s
        u = np.linalg.solve(A, rhs)[groups]
        val = true_obj(u)
        if val < best:
            best, best_u = val, u
    return best_u


def random_instance(rng, kind="interval"):
    n = int(rng.integers(2, 6))
    dom = Domain1D("torus") if kind == "torus" else Domain1D("interval", 0.0, 1.0)
    mesh = Mesh(dom, max(n, 2 if kind == "interval" else 3))
    g = Field(mesh, rng.normal(0.0, 1.0, mesh.n))
    v = Field(mesh, rng.uniform(0.1, 1.3, mesh.n))
    sigma = float(rng.uniform(0.2, 2.0))
    lam = float(rng.uniform(0.5, 2.0))
    return mesh, g, v, sigma, lam


def test_prox_pure_fidelity():
    mesh = Mesh(Domain1D("interval", 0.0, 1.0), 9)
    g = Field(mesh, np.arange(9.0))
    u = prox_weighted_tv(g, Field.constant(mesh, 1.0), 0.0, 1.0)
    assert np.array_equal(u.values, g.values)


def test_prox_two_point_merge():
    # one cell, unit weight: the jump collapses and both values meet at 1/2
    mesh = Mesh(Domain1D("interval", 0.0, 1.0), 2)
    g = Field(mesh, [0.0, 1.0])
    u = prox_weighted_tv(g, Field.constant(mesh, 1.0), 1.0, 1.0)
    assert u.values == pytest.approx([0.5, 0.5], abs=1e-14)


def test_prox_rejects_lam_zero():
    mesh = Mesh(Domain1D("interval", 0.0, 1.0), 4)
    g = Field.constant(mesh, 0.0)
    with pytest.raises(ValueError):
        prox_weighted_tv(g, Field.constant(mesh, 1.0), 1.0, 0.0)


def test_prox_matches_oracle_small_instances():
    rng = np.random.default_rng(2024)
    for trial in range(60):
        mesh, g, v, sigma, lam = random_instance(rng)
        if trial % 5 == 0:
            vals = v.values.copy()
            vals[rng.integers(0, mesh.n)] = 0.0   # zero edge weights
            v = Field(mesh, vals)
        u = prox_weighted_tv(g, v, sigma, lam)
        h = mesh.h
        c = lam * h * mesh.trapezoid_weights()
        w = sigma * np.minimum(v.values[:-1], v.values[1:]) ** 2
        u_ref = oracle_chain(g.values, c, w)
        assert np.max(np.abs(u.values - u_ref)) < 1e-10


def oracle_cyclic(g, c, w):
    n = len(g)

    def true_obj(u):
        du = np.roll(u, -1) - u
        return float(np.sum(c * (u - g) ** 2) + np.sum(w * np.abs(du)))

    best, best_u = np.inf, None
    for pat in itertools.product((-1, 0, 1), repeat=n):
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for k, s in enumerate(pat):
            if s == 0:
                a, b = find(k), find((k + 1) % n)
                if a != b:
                    parent[a] = b
        roots = sorted({find(i) for i in range(n)})
        idx = {r: j for j, r in enumerate(roots)}
        groups = [idx[find(i)] for i in range(n)]
        m = len(roots)
        A = np.zeros((m, m))
        rhs = np.zeros(m)
        for i in range(n):
            gi = groups[i]
            A[gi, gi] += 2.0 * c[i]
            rhs[gi] += 2.0 * c[i] * g[i]
        for k, s in enumerate(pat):
            if s != 0:
                rhs[groups[(k + 1) % n]] -= w[k] * s
                rhs[groups[k]] += w[k] * s
        u = np.linalg.solve(A, rhs)[groups]
        val = true_obj(u)
        if val < best:
            best, best_u = val, u
    return best_u


def test_prox_torus_matches_cyclic_oracle():
    rng = np.random.default_rng(77)
    for _ in range(25):
        mesh, g, v, sigma, lam = random_instance(rng, kind="torus")
        u = prox_weighted_tv(g, v, sigma, lam)
        c = lam * mesh.h * np.ones(mesh.n)
        w = sigma * np.minimum(v.values, np.roll(v.values, -1)) ** 2
        u_ref = oracle_cyclic(g.values, c, w)
        assert np.max(np.abs(u.values - u_ref)) < 1e-6


def test_prox_nonexpansive_weighted_norm():
    # prox of a convex functional is 1-Lipschitz in the fidelity norm
    rng = np.random.default_rng(9)
    mesh = Mesh(Domain1D("interval", 0.0, 1.0), 40)
    v = Field(mesh, rng.uniform(0.1, 1.2, 40))
    cw = mesh.h * mesh.trapezoid_weights()
    for _ in range(25):
        g1 = Field(mesh, rng.normal(0, 1, 40))
        g2 = Field(mesh, rng.normal(0, 1, 40))
        lam = float(rng.uniform(0.5, 3.0))
        u1 = prox_weighted_tv(g1, v, 1.0, lam)
        u2 = prox_weighted_tv(g2, v, 1.0, lam)
        du = float(np.sum(cw * (u1.values - u2.values) ** 2))
        dg = float(np.sum(cw * (g1.values - g2.values) ** 2))
        assert du <= dg * (1.0 + 1e-10)


def test_prox_chain_longer_random_stationarity():
    # longer chains: DP output must beat random perturbations
    rng = np.random.default_rng(123)
    for _ in range(10):
        n = int(rng.integers(20, 120))
        g = rng.normal(0, 1, n)
        c = rng.uniform(0.05, 2.0, n)
        w = rng.uniform(0.0, 1.0, n - 1)
        u = _chain_prox(g, c, w)

        def obj(z):
            return float(np.sum(c * (z - g) ** 2) + np.sum(w * np.abs(np.diff(z))))

        base = obj(u)
        for _ in range(100):
            assert base <= obj(u + rng.normal(0, 1e-3, n)) + 1e-12


def test_kwc_alternating_constant_data():
    mesh = Mesh(Domain1D("interval", -1.0, 1.0), 65)
    g = Field.constant(mesh, 4.0)
    u, v, rep = minimize_kwc_alternating(g, 0.1, 1.0, P, 10.0)
    assert np.max(np.abs(u.values - 4.0)) < 1e-12
    assert np.max(np.abs(v.values - 1.0)) < 1e-12
    assert rep.total == pytest.approx(0.0, abs=1e-14)


def test_kwc_alternating_step_reduction():
    # unit step, strong anchoring: u keeps its jump and v dips to 1/(1+sigma)
    mesh = Mesh(Domain1D("interval", -1.0, 1.0), 1601)
    g = Field(mesh, np.where(mesh.nodes >= 0.0, 1.0, 0.0))
    trace = []
    u, v, rep = minimize_kwc_alternating(g, 1e-2, 1.0, P, 1e3,
                                         SolveOptions(rounds=40, tol=1e-12), trace=trace)
    assert float(np.min(v.values)) == pytest.approx(0.5, abs=5e-2)
    assert float(np.max(np.abs(np.diff(u.values)))) == pytest.approx(1.0, abs=5e-2)
    energies = [e for _, e in trace]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_kwc_alternating_monotone_on_rough_data():
    rng = np.random.default_rng(31)
    mesh = Mesh(Domain1D("interval", -1.0, 1.0), 257)
    g = Field(mesh, np.where(mesh.nodes >= 0.0, 1.0, 0.0) + 0.1 * rng.normal(size=257))
    trace = []
    u, v, rep = minimize_kwc_alternating(g, 0.05, 0.8, P, 50.0,
                                         SolveOptions(rounds=25, tol=1e-12), trace=trace)
    energies = [e for _, e in trace]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
    assert rep.total == pytest.approx(energies[-1], abs=1e-12)


def test_kwc_alternating_rejects_lam_zero():
    mesh = Mesh(Domain1D("interval", -1.0, 1.0), 17)
    with pytest.raises(ValueError):
        minimize_kwc_alternating(Field.constant(mesh, 0.0), 0.1, 1.0, P, 0.0)
