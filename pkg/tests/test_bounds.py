import math

import numpy as np
import pytest

from schottky_zeta.bounds import (
    check_separation,
    count_separation_violations,
    hs_norm_check,
    jensen_grid,
    jensen_radii,
    main_estimate_scan,
    make_pair,
    phase,
    phase_derivative,
    phase_derivative_fd,
    phase_derivative_report,
    pointwise_log_det,
    representative_pairs,
    averaged_oscillatory_integral,
    separation_scale,
    target_disks,
    TAU_SWEEP,
)
from schottky_zeta.domains import omega_surrogate
from schottky_zeta.words import arrow, disk_grid, free_reduce, mirror, upsilon


@pytest.fixture(scope="module")
def report(funnel):
    return phase_derivative_report(funnel, (1, 5))


@pytest.fixture(scope="module")
def pair(funnel):
    return make_pair(funnel, 1, (2, 1), (4, 1))


def test_diagonal_phase_is_zero(funnel):
    p = make_pair(funnel, 1, (2,), (2,))
    assert np.all(phase(funnel, p, disk_grid(funnel.disk(1))) == 0)


def test_phase_real_on_axis(funnel, pair):
    d = funnel.disk(1)
    x = np.linspace(d.center - 0.9 * d.radius, d.center + 0.9 * d.radius, 50)
    assert np.max(np.abs(phase(funnel, pair, x).imag)) < 1e-12


def test_phase_unit_modulus_identity(funnel, pair):
    d = funnel.disk(1)
    x = np.linspace(d.center - 0.9 * d.radius, d.center + 0.9 * d.radius, 20)
    ga, gb = [__import__("schottky_zeta.words", fromlist=["word_map"]).word_map(funnel, w) for w in (pair.a_word, pair.b_word)]
    t = 7.3
    lhs = (1 / (ga.c * x + ga.d) ** 2) ** (1j * t) * np.conj((1 / (gb.c * x + gb.d) ** 2) ** (1j * t))
    assert np.allclose(lhs, np.exp(1j * t * phase(funnel, pair, x)), atol=1e-12)


def test_phase_derivative_fd(funnel, pair):
    z = disk_grid(funnel.disk(1), 4, 4, shrink=0.9)
    assert np.max(np.abs(phase_derivative_fd(funnel, pair, z) - phase_derivative(funnel, pair, z))) < 1e-7


def test_higher_derivatives_recursive(funnel, pair):
    z = disk_grid(funnel.disk(1), 3, 3, shrink=0.8)
    eps = 1e-4
    for n in (2, 3, 4):
        fd = (phase_derivative(funnel, pair, z + eps, n - 1) - phase_derivative(funnel, pair, z - eps, n - 1)) / (2 * eps)
        exact = phase_derivative(funnel, pair, z, n)
        assert np.max(np.abs(fd - exact)) < 1e-5 * np.max(np.abs(exact))


def test_separation_scale_recomputable(funnel, pair):
    ab = free_reduce(2, pair.a_word + mirror(2, pair.b_word))
    expect = math.sqrt(upsilon(funnel, pair.a_word) * upsilon(funnel, pair.b_word) / upsilon(funnel, ab))
    assert abs(pair.D_ab - expect) < 1e-12 * expect
    assert separation_scale(funnel, pair.a_word, pair.b_word) == pair.D_ab


def test_make_pair_validation(funnel):
    with pytest.raises(ValueError):
        make_pair(funnel, 1, (3,), (2,))
    with pytest.raises(ValueError):
        make_pair(funnel, 1, (), (2,))


def test_report_ratio_window(report):
    for lv in report.levels:
        assert 0.1 <= lv.ratio_min and lv.ratio_max <= 10


def test_report_fd(report):
    assert max(lv.fd_residual for lv in report.levels) < 1e-7


def test_report_stable(report):
    for name in ("ratio_min", "ratio_max", "nth_constant", "entry_min", "entry_max"):
        assert report.drift(name, 3, 5) < 2


def test_report_entry_constant(report):
    for lv in report.levels:
        C = max(lv.entry_max, 1 / lv.entry_min)
        assert 1 / C <= lv.entry_min <= lv.entry_max <= C


def test_report_n1_consistent(report):
    for lv in report.levels:
        assert lv.n1_constant == pytest.approx(lv.ratio_max, rel=1e-12)


def test_report_lower_bound(report):
    for lv in report.levels:
        assert lv.r0 > 0 and lv.lower_constant > 0


def test_oscillatory_diagonal_volume(funnel):
    p = make_pair(funnel, 1, (2,), (2,))
    h = 0.02
    dom = omega_surrogate(funnel, h)
    vol = sum(math.pi * d.radius**2 for d in target_disks(dom, 1))
    for T in (1.0, 10.0, 100.0):
        assert averaged_oscillatory_integral(funnel, p, h, T) == pytest.approx(vol, rel=1e-12)


def test_oscillatory_decays(funnel):
    for p in representative_pairs(funnel, 3):
        T = 20 / p.D_ab
        h = 0.1 / T
        assert averaged_oscillatory_integral(funnel, p, h, T) >= averaged_oscillatory_integral(funnel, p, h, 2 * T)


def test_oscillatory_hs_kernel_kind(funnel, delta, pair):
    # images starting with different letters never share a disk: the kernel vanishes
    assert averaged_oscillatory_integral(funnel, pair, 0.02, 5.0, f_kind="hs-kernel", sigma=delta) == 0
    same = make_pair(funnel, 1, (2, 1), (2, 2))
    assert averaged_oscillatory_integral(funnel, same, 0.1, 5.0, f_kind="hs-kernel", sigma=delta) > 0
    with pytest.raises(ValueError):
        averaged_oscillatory_integral(funnel, pair, 0.02, 5.0, f_kind="other")


def test_hs_norm(funnel, delta):
    chk = hs_norm_check(funnel, 0.02, 0.01, delta + 0.5, 0.05)
    assert chk.formula_value > 0
    assert chk.rel_err < 1e-3
    assert chk.cross_prefix_value == 0


def test_separation_large_c_violates(funnel):
    rep = check_separation(funnel, 0.01, [10.0])
    assert rep.violations[0] is not None and rep.violations[0] > 0


def test_separation_h_uniform(funnel):
    c = check_separation(funnel, 0.1, [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0]).max_c
    assert c > 0
    rep = check_separation(funnel, 0.05, [c])
    assert rep.violations[0] == 0


def test_separation_first_letters(funnel):
    # for h below the minimal gap, images starting with different letters lie in different disks
    h = 0.5 * funnel.min_gap
    h = min(h, 0.1)
    dom = omega_surrogate(funnel, h)
    for a in funnel.letters:
        for c in funnel.letters:
            if a == c:
                continue
            za = funnel.disk(a).center
            zc = funnel.disk(c).center
            ia, ic = dom.index_of(za)[0], dom.index_of(zc)[0]
            assert ia != ic


def test_violation_count_zero_for_letters(funnel):
    dom = omega_surrogate(funnel, 0.1)
    assert count_separation_violations(funnel, dom, 0.19) == 0


def test_jensen_radii(delta):
    s0, r1, r2 = jensen_radii(delta, delta / 2, 3.0)
    assert s0 == delta + 3
    assert r1 == pytest.approx(math.hypot(s0 - delta / 2, 1))
    assert r2 == pytest.approx(r1 + 1 / 3)


def test_jensen_monotone_in_sigma(funnel, delta):
    sig = [delta / 2, 0.75 * delta, delta]
    grid = jensen_grid(funnel, sig, [5.0, 10.0], delta=delta, n_t=40)
    for T in (5.0, 10.0):
        vals = [next(j.bound for j in grid if j.sigma == s and j.T == T) for s in sig]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_jensen_t_grid(funnel, delta):
    with pytest.raises(ValueError):
        jensen_grid(funnel, [delta], [3.3, 10.0], delta=delta, n_t=4)


def test_pointwise_tau_sweep(funnel, delta):
    vals = [abs(pointwise_log_det(funnel, delta + 1.0, t0, t1)) for t0, t1 in TAU_SWEEP]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < vals[0]


@pytest.fixture(scope="module")
def main_table(funnel, delta):
    return main_estimate_scan(funnel, [delta / 2, delta, (delta + 1) / 2], [10, 20, 40], delta=delta)


def test_main_estimate_positive(main_table):
    assert main_table.rows
    for r in main_table.rows:
        assert r.mean_hs > 0 and r.h > 0 and r.tau0 > 0 and r.tau1 > 0


def test_main_estimate_decreasing(main_table):
    exps = [main_table.exponents[s] for s in sorted(main_table.exponents)]
    assert all(a > b for a, b in zip(exps, exps[1:]))


def test_main_estimate_exponent_at_half_delta(main_table, delta):
    assert abs(main_table.exponents[delta / 2] - delta) <= 0.3
