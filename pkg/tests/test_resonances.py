import math

import numpy as np
import pytest

from schottky_zeta.resonances import (
    ConvergenceError,
    CoverageError,
    DegenerateFitError,
    ResonanceSet,
    Zero,
    count,
    delta_bowen,
    delta_from_determinant,
    find_resonances,
    fit_weyl_exponent,
    resonance_free_boxes,
    theoretical_exponent,
)
from schottky_zeta.schottky import funnel3
from schottky_zeta.transfer import BasisSpec


@pytest.fixture(scope="module")
def near_delta(funnel, delta):
    return find_resonances(funnel, (delta - 0.3, delta + 0.05, -3.0, 3.0))


def test_delta_cylinder(cyl):
    assert delta_bowen(cyl) == 0.0


def test_delta_two_methods(funnel, delta):
    assert 0 < delta < 1
    assert abs(delta_from_determinant(funnel, delta) - delta) < 1e-8


def test_delta_monotone_in_lengths(delta):
    assert delta_bowen(funnel3(8, 8, 8)) < delta


def test_delta_is_simple_zero(near_delta, delta):
    real = [z for z in near_delta.zeros if abs(z.s.imag) < 1e-9]
    top = max(real, key=lambda z: z.s.real)
    assert abs(top.s.real - delta) < 1e-8
    assert top.multiplicity == 1


def test_residuals_and_multiplicities(near_delta):
    assert near_delta.zeros
    for z in near_delta.zeros:
        assert z.residual < 1e-8
        assert z.multiplicity >= 1


def test_zeros_inside_box(near_delta):
    x0, x1, y0, y1 = near_delta.box
    for z in near_delta.zeros:
        assert x0 - 1e-9 <= z.s.real <= x1 + 1e-9 and y0 - 1e-9 <= z.s.imag <= y1 + 1e-9


def test_conjugate_closure(near_delta):
    pts = near_delta.points()
    for p in pts:
        assert np.min(np.abs(pts - np.conj(p))) < 1e-7


def test_winding_matches_total(near_delta):
    assert near_delta.total == near_delta.params["winding"]


def test_empty_box(funnel, delta):
    rs = find_resonances(funnel, (delta + 0.2, delta + 1.0, 0.0, 1.0))
    assert rs.total == 0
    assert rs.params["winding"] == 0


def test_basis_robustness(funnel, delta):
    box = (delta - 0.3, delta + 0.05, 0.0, 4.0)
    a = find_resonances(funnel, box, basis=BasisSpec(24))
    b = find_resonances(funnel, box, basis=BasisSpec(32))
    assert a.total == b.total
    for z in a.zeros:
        assert np.min(np.abs(b.points() - z.s)) < 1e-6


def test_cylinder_lattice(cyl):
    rs = find_resonances(cyl, (-2.5, 0.5, 0.0, 2 * math.pi))
    for z in rs.zeros:
        k, n = -z.s.real, z.s.imag / math.pi
        assert abs(k - round(k)) < 1e-6 and abs(n - round(n)) < 1e-6
        assert z.multiplicity == 2


def test_bad_box(funnel):
    with pytest.raises(ValueError):
        find_resonances(funnel, (1.0, 0.0, 0.0, 1.0))


def _planted(points, box=(0.0, 1.0, 0.0, 100.0)):
    return ResonanceSet([Zero(complex(p), 1, 0.0) for p in points], box)


def test_count_empty():
    assert count(_planted([]), "N", 0.5, 10) == 0


def test_count_nonincreasing_in_sigma(near_delta, delta):
    vals = [count(near_delta, "N", s, 3.0) for s in np.linspace(delta - 0.3, delta, 10)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_count_modes():
    rs = _planted([0.5 + 0.5j, 0.5 + 1.5j, 0.5 + 3j, 0.2 + 1j])
    assert count(rs, "N", 0.3, 2.0) == 2
    assert count(rs, "M", 0.3, 0.5) == 2
    assert count(rs, "M", 0.3, 0.5, center=3.0) == 1


def test_count_coverage():
    rs = _planted([0.5 + 1j], box=(0.4, 1.0, 0.0, 5.0))
    with pytest.raises(CoverageError):
        count(rs, "N", 0.3, 2.0)
    with pytest.raises(CoverageError):
        count(rs, "N", 0.5, 10.0)


def test_planted_weyl_slope(rng):
    alpha = 1.3
    heights = np.sort(rng.random(20000)) ** (1 / alpha) * 100
    rs = _planted(0.5 + 1j * heights)
    fit = fit_weyl_exponent(rs, 0.4, np.geomspace(5, 100, 10), delta=0.2)
    assert abs(fit.slope - alpha) < 0.05


def test_fit_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_weyl_exponent(_planted([0.5 + 3j]), 0.4, [1.5, 2, 3, 4, 5], delta=0.2)


def test_theoretical_exponent(delta):
    assert theoretical_exponent(delta, delta / 2) == pytest.approx(1 + delta)
    assert theoretical_exponent(delta, delta) == pytest.approx(1 + delta - (3 * delta + 2) / (2 * delta + 2) * delta)


def test_free_boxes_right_strip(near_delta, delta):
    rs = ResonanceSet(near_delta.zeros, (delta - 0.3, delta + 0.05, 0.0, 3.0))
    fb = resonance_free_boxes(rs, (delta + 0.01, delta + 0.05), 0.5)
    assert fb.tested > 0 and len(fb.empty) == fb.tested


def test_free_boxes_lambda_zero():
    rs = _planted([0.5 + 1.5j], box=(0.0, 1.0, 0.0, 5.0))
    fb = resonance_free_boxes(rs, (0.4, 0.6), 0.0)
    assert fb.tested == 4
    assert len(fb.empty) == 3


def test_free_boxes_density_monotone(funnel, delta):
    rs = find_resonances(funnel, (delta - 0.3, delta + 0.05, 0.0, 30.0))
    dens = [resonance_free_boxes(rs, (lo, delta + 0.05), 0.5).density for lo in np.linspace(delta - 0.3, delta, 6)]
    assert all(a <= b for a, b in zip(dens, dens[1:]))


def test_free_boxes_coverage():
    with pytest.raises(CoverageError):
        resonance_free_boxes(_planted([]), (-1.0, 0.5), 0.5)


def test_csv(tmp_path, near_delta):
    near_delta.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "re,im,multiplicity,residual"
    assert len(lines) == len(near_delta.zeros) + 1
