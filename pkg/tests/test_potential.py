import numpy as np
import pytest

from singlewell import Potential, check_conditions, eval_F, eval_G


def quartic_table(lo=-2.0, hi=4.0, m=601, step=1e-3):
    v = np.linspace(lo, hi, m)
    return Potential.tabulated(v, (v - 1.0) ** 4, step=step)


def test_quadratic_f_values():
    p = Potential.quadratic()
    assert eval_F(p, 1.0) == 0.0
    assert eval_F(p, 0.0) == 1.0
    assert eval_F(p, 3.0) == 4.0


def test_quadratic_g_values():
    p = Potential.quadratic()
    assert eval_G(p, 1.0) == 0.0
    assert eval_G(p, 0.0) == 0.5
    assert eval_G(p, 0.5) == 0.125


def test_quadratic_g_is_half_f():
    p = Potential.quadratic()
    v = np.linspace(-3.0, 5.0, 257)
    assert np.max(np.abs(p.G(v) - 0.5 * p.F(v))) == 0.0


def test_conditions_quadratic():
    rep = check_conditions(Potential.quadratic())
    assert rep.all_pass()
    assert rep.c0 == 0.5 and rep.c1 == 1.0
    # the stored constants really dominate: (v-1)^2 >= v^2/2 - 1 everywhere
    v = np.linspace(-50.0, 50.0, 10001)
    assert np.all((v - 1.0) ** 2 >= 0.5 * v * v - 1.0)


def test_conditions_quartic_table():
    rep = quartic_table().check_conditions()
    assert rep.nonneg_unique_zero
    assert rep.positive_at_infinity


def test_conditions_zero_table_fails_f1():
    v = np.linspace(-1.0, 2.0, 31)
    p = Potential.tabulated(v, np.zeros_like(v))
    rep = p.check_conditions()
    assert not rep.nonneg_unique_zero


def test_tabulated_range_error():
    p = quartic_table()
    with pytest.raises(ValueError):
        p.F(5.0)
    with pytest.raises(ValueError):
        p.G(-3.0)


def test_tabulated_g_matches_exact_quartic():
    # exact G for F = (v-1)^4 is |v-1|^3 / 3; the table itself must be
    # fine enough that interpolating F does not dominate the error
    p = quartic_table(m=6001, step=1e-4)
    for v in (0.0, 0.5, 2.0, 3.5):
        assert p.G(v) == pytest.approx(abs(v - 1.0) ** 3 / 3.0, rel=1e-5)


def test_tabulated_g_exact_for_quadratic_table():
    # sqrt of the quadratic table is piecewise linear, so the composite
    # trapezoid is exact at any step
    v = np.linspace(-2.0, 4.0, 1201)
    p = Potential.tabulated(v, (v - 1.0) ** 2, step=5e-2)
    for x in (0.0, 3.3, -1.7):
        assert p.G(x) == pytest.approx(0.5 * (x - 1.0) ** 2, abs=1e-13)


def test_tabulated_g_second_order_in_step():
    # curved sqrt(F): quartic table, G errors shrink like step^2
    v = np.linspace(-2.0, 4.0, 6001)
    f = (v - 1.0) ** 4
    errs = []
    for step in (4e-2, 2e-2, 1e-2):
        p = Potential.tabulated(v, f, step=step)
        errs.append(abs(p.G(3.3) - abs(3.3 - 1.0) ** 3 / 3.0))
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[2] > 8.0   # ~16 expected for O(step^2)


def test_g_monotone_away_from_one():
    for p in (Potential.quadratic(), quartic_table()):
        left = np.linspace(-1.5, 1.0, 41)
        right = np.linspace(1.0, 3.5, 41)
        gl = np.asarray(p.G(left))
        gr = np.asarray(p.G(right))
        assert np.all(np.diff(gl) <= 1e-12)
        assert np.all(np.diff(gr) >= -1e-12)
        assert p.G(1.0) == 0.0


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "pot.csv"
    v = np.linspace(-1.0, 3.0, 101)
    with open(path, "w") as fh:
        fh.write("v,F\n")
        for vi in v:
            fh.write(f"{float(vi)!r},{float((vi - 1.0) ** 2)!r}\n")
    p = Potential.from_csv(path, step=1e-3)
    assert p.F(0.0) == pytest.approx(1.0)
    # coarse 101-point table: interpolating F above the parabola biases G
    assert p.G(0.0) == pytest.approx(0.5, abs=1e-3)


def test_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.0,1.0\n1.0,0.0\n")
    with pytest.raises(ValueError):
        Potential.from_csv(path)
