import numpy as np
import pytest

from singlewell import (Domain1D, EnergyReport, Field, Mesh, PointPenalty, Potential,
                        energy_kwc, energy_smm, energy_smm_b, weighted_tv)

P = Potential.quadratic()


def interval_mesh(n=101, a=0.0, b=1.0):
    return Mesh(Domain1D("interval", a, b), n)


def test_domain_distance():
    t = Domain1D("torus")
    assert t.distance(0.1, 0.9) == pytest.approx(0.2)
    i = Domain1D("interval", -1.0, 1.0)
    assert i.distance(-0.5, 0.5) == 1.0


def test_mesh_spacing():
    m = interval_mesh(5)
    assert m.h == 0.25
    mt = Mesh(Domain1D("torus"), 8)
    assert mt.h == 0.125
    assert mt.nodes[0] == 0.0 and mt.nodes[-1] == 0.875


def test_field_validation():
    m = interval_mesh(5)
    with pytest.raises(ValueError):
        Field(m, [1.0, 2.0])


def test_energy_smm_well_bottom():
    m = interval_mesh(64, -1.0, 1.0)
    for eps in (0.01, 1.0):
        assert energy_smm(Field.constant(m, 1.0), eps, P).total == 0.0


def test_energy_smm_constant_zero():
    # v = 0 on (-1, 1), eps = 1: potential integral is exactly 2, halved -> 1
    m = interval_mesh(33, -1.0, 1.0)
    rep = energy_smm(Field.constant(m, 0.0), 1.0, P)
    assert rep.gradient == 0.0
    assert rep.total == pytest.approx(1.0, abs=1e-14)


def test_energy_smm_linear_ramp():
    # v(x) = x on (0,1), eps = 1: exact value 1/2 + (1/2) * 1/3 = 2/3;
    # oracle: fine trapezoid of the exact integrand
    n = 2001
    m = interval_mesh(n)
    rep = energy_smm(Field.from_function(m, lambda x: x), 1.0, P)
    x = np.linspace(0.0, 1.0, 200001)
    oracle = 0.5 + 0.5 * np.trapezoid((x - 1.0) ** 2, x)
    assert oracle == pytest.approx(0.5 + 1.0 / 6.0, abs=1e-10)
    assert rep.total == pytest.approx(oracle, abs=5e-7)


def test_energy_smm_b_constant_one():
    m = interval_mesh(201, -1.0, 1.0)
    f = Field.constant(m, 1.0)
    rep = energy_smm_b(f, 0.1, P, [PointPenalty(0.0, 1.0)])
    assert rep.total == 1.0
    assert energy_smm_b(f, 0.1, P, []).total == 0.0


def test_energy_smm_b_sum():
    m = interval_mesh(201, -1.0, 1.0)
    f = Field.constant(m, 0.0)
    rep = energy_smm_b(f, 1.0, P, [PointPenalty(0.0, 2.0)])
    assert rep.total == pytest.approx(1.0, abs=1e-14)   # 1.0 + 2*0


def test_boundary_penalty_rejected():
    m = interval_mesh(11)
    f = Field.constant(m, 1.0)
    with pytest.raises(ValueError):
        energy_smm_b(f, 0.1, P, [PointPenalty(0.0, 1.0)])


def test_weighted_tv_constant():
    m = interval_mesh(17)
    assert weighted_tv(Field.constant(m, 3.0), Field.constant(m, 0.7), 2.0) == 0.0


def test_weighted_tv_identity_map():
    m = interval_mesh(101)
    u = Field.from_function(m, lambda x: x)
    assert weighted_tv(u, Field.constant(m, 1.0), 1.0) == pytest.approx(1.0, abs=1e-12)


def test_weighted_tv_step_min_rule():
    # jump of size 1 across one cell; weights at its ends 0.5 and 0.7
    m = interval_mesh(5)
    u = Field(m, [0.0, 0.0, 1.0, 1.0, 1.0])
    v = Field(m, [1.0, 0.5, 0.7, 1.0, 1.0])
    assert weighted_tv(u, v, 2.0) == pytest.approx(2.0 * 0.25 * 1.0)


def test_weighted_tv_mesh_mismatch():
    u = Field.constant(interval_mesh(5), 0.0)
    v = Field.constant(interval_mesh(7), 1.0)
    with pytest.raises(ValueError):
        weighted_tv(u, v, 1.0)


def test_weighted_tv_plain_tv_when_v_one():
    rng = np.random.default_rng(5)
    m = interval_mesh(64)
    u = Field(m, rng.normal(0, 1, 64))
    assert weighted_tv(u, Field.constant(m, 1.0), 1.0) == u.tv()


def test_energy_kwc_trivial():
    m = interval_mesh(33, -1.0, 1.0)
    rep = energy_kwc(Field.constant(m, 4.0), Field.constant(m, 1.0), 0.1, 1.0, P)
    assert rep.total == 0.0


def test_energy_kwc_all_terms_vanish():
    # u = g constant, v = 1: every term is zero
    m = interval_mesh(33, -1.0, 1.0)
    g = Field.constant(m, 2.0)
    rep = energy_kwc(g, Field.constant(m, 1.0), 0.1, 1.0, P, lam=3.0, g=g)
    assert rep.total == 0.0
    # nonconstant u = g still has zero fidelity
    g2 = Field.from_function(m, lambda x: np.sin(x))
    rep2 = energy_kwc(g2, Field.constant(m, 1.0), 0.1, 1.0, P, lam=3.0, g=g2)
    assert rep2.fidelity == 0.0
    assert rep2.tv > 0.0


def test_energy_kwc_requires_g():
    m = interval_mesh(33)
    u = Field.constant(m, 0.0)
    v = Field.constant(m, 1.0)
    with pytest.raises(ValueError):
        energy_kwc(u, v, 0.1, 1.0, P, lam=2.0)


def test_energy_kwc_unit_step_is_penalized_smm():
    # fixed unit step at a: the weighted TV term reduces to a point
    # penalty sigma at a, up to one-cell interpolation error
    m = interval_mesh(401, -1.0, 1.0)
    a, sigma, eps = 0.1, 2.0, 0.05
    u = Field(m, np.where(m.nodes >= a, 1.0, 0.0))
    v = Field.from_function(m, lambda x: 1.0 - 0.4 * np.exp(-np.abs(x - a) / eps))
    ek = energy_kwc(u, v, eps, sigma, P).total
    eb = energy_smm_b(v, eps, P, [PointPenalty(a, sigma)]).total
    assert ek == pytest.approx(eb, abs=sigma * 0.4 * m.h / eps)


def test_energy_kwc_decomposition_exact():
    rng = np.random.default_rng(11)
    m = interval_mesh(64, -1.0, 1.0)
    u = Field(m, rng.normal(0, 1, 64))
    v = Field(m, rng.uniform(0.1, 1.2, 64))
    g = Field(m, rng.normal(0, 1, 64))
    rep = energy_kwc(u, v, 0.2, 1.5, P, lam=0.7, g=g)
    assert rep.total == rep.gradient + rep.potential + rep.penalty + rep.tv + rep.fidelity
    smm = energy_smm(v, 0.2, P)
    assert rep.gradient == smm.gradient and rep.potential == smm.potential
    assert rep.tv == weighted_tv(u, v, 1.5)


def test_torus_rotation_invariance():
    rng = np.random.default_rng(0)
    m = Mesh(Domain1D("torus"), 64)
    vals = 1.0 + 0.3 * np.sin(2 * np.pi * m.nodes) + 0.05 * rng.normal(size=64)
    uvals = rng.normal(0, 1, 64)
    e0 = energy_smm(Field(m, vals), 0.05, P).total
    t0 = weighted_tv(Field(m, uvals), Field(m, vals), 1.3)
    for k in (1, 7, 33):
        assert energy_smm(Field(m, np.roll(vals, k)), 0.05, P).total == pytest.approx(e0, abs=1e-12)
        assert weighted_tv(Field(m, np.roll(uvals, k)), Field(m, np.roll(vals, k)),
                           1.3) == pytest.approx(t0, abs=1e-12)


MM_SLACK_C = 1.0   # calibrated on the quadratic well, where the slack is 0


@pytest.mark.parametrize("kind", ["interval", "torus"])
def test_discrete_modica_mortola_inequality(kind):
    # energy >= sum |G(v_{k+1}) - G(v_k)| - C h on random smooth fields
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(16, 200))
        dom = Domain1D(kind) if kind == "torus" else Domain1D("interval", 0.0,
                                                              float(rng.uniform(0.5, 3.0)))
        m = Mesh(dom, n)
        x = m.nodes
        a = rng.normal(0, 1, 3)
        vals = 1.0 + a[0] * np.sin(2 * np.pi * x) + 0.5 * a[1] * np.cos(4 * np.pi * x) + 0.2 * a[2]
        f = Field(m, vals)
        eps = float(rng.uniform(0.005, 0.5))
        e = energy_smm(f, eps, P).total
        gv = P.G(vals)
        if kind == "torus":
            tv_g = float(np.sum(np.abs(np.roll(gv, -1) - gv)))
        else:
            tv_g = float(np.sum(np.abs(np.diff(gv))))
        assert e >= tv_g - MM_SLACK_C * m.h


def test_field_csv_roundtrip(tmp_path):
    m = interval_mesh(17, -1.0, 1.0)
    f = Field.from_function(m, lambda x: x ** 2)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    g = Field.from_csv(path, m)
    assert np.array_equal(f.values, g.values)


def test_field_csv_mesh_mismatch(tmp_path):
    m = interval_mesh(17, -1.0, 1.0)
    f = Field.from_function(m, lambda x: x)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    with pytest.raises(ValueError):
        Field.from_csv(path, interval_mesh(16, -1.0, 1.0))


def test_field_at_torus_wraps():
    m = Mesh(Domain1D("torus"), 4)
    f = Field(m, [0.0, 1.0, 2.0, 1.0])
    assert f.at(1.125) == pytest.approx(f.at(0.125))
    # wrap cell interpolates between the last and first node
    assert f.at(0.875) == pytest.approx(0.5)
