import cmath
import math

import numpy as np
import pytest

from schottky_zeta.domains import omega_surrogate
from schottky_zeta.resonances import Determinant
from schottky_zeta.schottky import fixed_points
from schottky_zeta.transfer import (
    BasisSpec,
    BranchCutError,
    OperatorKind,
    assemble,
    complex_power,
    cylinder_zeta,
    fredholm_det,
    matrix_trace_power,
    operator_words,
    primitive_classes,
    selberg_zeta_product,
    trace_power_lefschetz,
    zeta_det,
)
from schottky_zeta.words import TauTooLargeError, arrow, enumerate_words, word_map


def test_complex_power_basic():
    assert complex_power(4, 0.5) == pytest.approx(2)
    assert abs(complex_power(3.7, 2.5j)) == pytest.approx(1.0)


def test_complex_power_branch_cut():
    with pytest.raises(BranchCutError):
        complex_power(-1.0, 0.5)


def test_complex_power_continuity_along_path(funnel):
    s = 0.3 + 20j
    for w in [(1,), (1, 2), (3, 4, 3)]:
        g = word_map(funnel, w)
        b = next(b for b in funnel.letters if arrow(2, w, b))
        d = funnel.disk(b)
        z = d.center + 0.95 * d.radius * np.exp(1j * np.linspace(0, 2 * np.pi, 2000))
        arg = np.angle(1 / (g.c * z + g.d) ** 2)
        assert np.max(np.abs(arg)) < math.pi / 2
        assert np.max(np.abs(np.diff(arg))) < 0.1


def test_basis_spec_validation():
    with pytest.raises(ValueError):
        BasisSpec(8, points=16)
    with pytest.raises(ValueError):
        BasisSpec(8, rho=0.95)
    b = BasisSpec(24)
    assert b.points == 96 and b.rho == 0.7


def test_s_zero_constant_function(funnel):
    basis = BasisSpec(12)
    tm = assemble(funnel, "standard", 0.0, basis)
    M = basis.degree
    v = np.zeros(4 * M, dtype=complex)
    for i, d in enumerate(funnel.disks):
        v[i * M] = math.sqrt(math.pi) * d.radius  # constant 1 in the orthonormal basis
    out = tm.matrix @ v
    for i, d in enumerate(funnel.disks):
        blk = out[i * M : (i + 1) * M]
        assert blk[0] == pytest.approx(3 * math.sqrt(math.pi) * d.radius, rel=1e-12)
        assert np.max(np.abs(blk[1:])) < 1e-12


def test_block_structure(funnel):
    tm = assemble(funnel, "standard", 1.0, BasisSpec(8))
    for b in funnel.letters:
        assert np.all(tm.block(b - 1, funnel.inv(b) - 1) == 0)


def test_degree_convergence(funnel, delta):
    s = delta + 1
    d16 = zeta_det(funnel, s, BasisSpec(16))
    d32 = zeta_det(funnel, s, BasisSpec(32))
    assert abs(d16 - d32) < 1e-9


def test_quadrature_doubling(funnel):
    a = assemble(funnel, "standard", 0.7 + 3j, BasisSpec(16, points=64)).matrix
    b = assemble(funnel, "standard", 0.7 + 3j, BasisSpec(16, points=128)).matrix
    assert np.max(np.abs(a - b)) < 1e-10


def test_refined_W2_is_standard(funnel):
    basis = BasisSpec(16)
    std = assemble(funnel, "standard", 0.4 + 2j, basis).matrix
    ref = assemble(funnel, OperatorKind.from_partition(enumerate_words(funnel, 2)), 0.4 + 2j, basis).matrix
    assert np.max(np.abs(std - ref)) < 1e-12


def test_refined_W3_is_square(funnel):
    basis = BasisSpec(16)
    std = assemble(funnel, "standard", 0.4 + 2j, basis).matrix
    ref = assemble(funnel, OperatorKind.from_partition(enumerate_words(funnel, 3)), 0.4 + 2j, basis).matrix
    assert np.max(np.abs(std @ std - ref)) < 1e-10


def test_refined_keeps_delta(funnel, delta):
    for tau in (0.02, 0.005):
        d = Determinant(funnel, OperatorKind.refined(tau), BasisSpec(24))
        assert abs(d(delta)) < 1e-10


def test_refined_tau_too_large(funnel):
    with pytest.raises(TauTooLargeError):
        operator_words(funnel, OperatorKind.refined(0.5))


def test_det_zero_matrix():
    assert fredholm_det(np.zeros((5, 5))).value == 1


def test_det_against_eigenvalues(rng):
    for _ in range(5):
        A = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
        A *= 0.9 / np.max(np.abs(np.linalg.eigvals(A)))
        expect = np.prod(1 - np.linalg.eigvals(A))
        got = fredholm_det(A)
        assert abs(got.value - expect) < 1e-9 * max(1, abs(expect))
        assert got.log_abs == pytest.approx(math.log(abs(expect)))
        sq = fredholm_det(A, square=True)
        assert abs(sq.value - np.prod(1 - np.linalg.eigvals(A) ** 2)) < 1e-9 * max(1, abs(sq.value))


def test_det_conjugate_symmetry(funnel, rng):
    basis = BasisSpec(16)
    for _ in range(10):
        s = complex(rng.uniform(0, 1), rng.uniform(-8, 8))
        assert abs(zeta_det(funnel, s.conjugate(), basis) - np.conj(zeta_det(funnel, s, basis))) < 1e-10


def test_lefschetz_real(funnel, delta):
    for n in (1, 2, 3):
        val = trace_power_lefschetz(funnel, "standard", delta + 0.3, n)
        assert abs(val.imag) < 1e-10 * abs(val)


def test_lefschetz_n1_letters(funnel, delta):
    s = delta + 1
    expect = 0j
    for a in funnel.letters:
        x, _ = fixed_points(funnel.gen(a))
        g = funnel.gen(a)
        d = 1 / (g.c * x + g.d) ** 2
        expect += d**s / (1 - d)
    assert abs(trace_power_lefschetz(funnel, "standard", s, 1) - expect) < 1e-14


def test_lefschetz_refined(funnel, delta):
    s = delta + 1
    tm = assemble(funnel, OperatorKind.refined(0.02), s, BasisSpec(24))
    for n in (1, 2):
        a, b = matrix_trace_power(tm, n), trace_power_lefschetz(funnel, OperatorKind.refined(0.02), s, n)
        assert abs(a - b) < 1e-8 * abs(b)


def test_cylinder_primitive_classes(cyl):
    classes = primitive_classes(cyl, 10.0)
    assert sorted(round(ell, 9) for _, ell in classes) == [2.0, 2.0]


def test_cylinder_product_closed_form(cyl):
    for s in (1.0, 0.5 + 2j, 2 - 3j):
        got = selberg_zeta_product(cyl, s, length_cut=2.5, delta=0.0)
        assert abs(got.value - cylinder_zeta(2.0, s)) < 1e-12


def test_cylinder_det_matches_closed_form(cyl):
    for s in (0.4 + 1j, -0.3 + 2j, 1.0):
        assert abs(zeta_det(cyl, s, BasisSpec(48)) - cylinder_zeta(2.0, s)) < 1e-12


def test_product_tends_to_one(funnel):
    vals = [abs(selberg_zeta_product(funnel, x, length_cut=12).value - 1) for x in (2, 5, 10, 20)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-15


def test_product_domain_error(funnel, delta):
    with pytest.raises(ValueError):
        selberg_zeta_product(funnel, delta + 0.1)


def test_h_independence(funnel, delta):
    s = delta + 0.5 + 1j
    kind = OperatorKind.composed(0.02, 0.01)
    vals = [Determinant(funnel, kind, BasisSpec(24), omega_surrogate(funnel, h), square=True)(s) for h in (0.02, 0.01)]
    assert abs(vals[0] - vals[1]) < 1e-6


def test_composed_matches_product(funnel, delta):
    basis, s = BasisSpec(16), delta + 0.5 + 1j
    a0 = assemble(funnel, OperatorKind.refined(0.02), s, basis).matrix
    a1 = assemble(funnel, OperatorKind.refined(0.01), s, basis).matrix
    comp = assemble(funnel, OperatorKind.composed(0.02, 0.01), s, basis).matrix
    assert np.max(np.abs(comp - a1 @ a0)) < 1e-12 * max(1, np.max(np.abs(comp)))
