import math
import warnings

import mpmath
import numpy as np
import pytest
from scipy.special import eval_hermite, gammaln

from phasecell.hermite import (
    completeness_errors,
    completeness_kernel,
    hermite_functions,
    kernel_matrix,
    orthonormality_matrix,
    project,
    smeared_completeness,
    xi,
    xi_batch,
    xi_table,
)
from phasecell.quadrature import gauss_hermite, gauss_legendre

PI_QUARTER = math.pi**-0.25


def xi_mp(n, k, dps=50):
    # closed form with raw H_n and n!, safe only in arbitrary precision
    with mpmath.workdps(dps):
        k = mpmath.mpf(k)
        val = mpmath.exp(-k * k / 2) * mpmath.hermite(n, k) / (
            mpmath.pi**0.25 * mpmath.sqrt(2**n * mpmath.factorial(n))
        )
        return complex(mpmath.mpc(0, 1) ** n * val)


def psi_scipy(n, k):
    # log-domain normalisation; fine while H_n stays in range
    log_norm = 0.5 * (n * math.log(2.0) + gammaln(n + 1)) + 0.25 * math.log(math.pi)
    return eval_hermite(n, k) * np.exp(-k * k / 2 - log_norm)


def test_xi_examples():
    assert xi(0, 0.0) == complex(PI_QUARTER)
    assert xi(3, 0.0) == 0
    assert xi(5, -1.3) == xi(5, 1.3).conjugate()


def test_xi_two_at_zero_follows_formula():
    # i^2 * H_2(0) = (-1)(-2): the value is positive
    assert xi(2, 0.0) == pytest.approx(PI_QUARTER / math.sqrt(2), abs=1e-16)
    assert xi(2, 0.0) == pytest.approx(xi_mp(2, 0.0), abs=1e-16)


def test_batch_examples():
    assert xi_batch(0, 0.0).values.tolist() == [complex(PI_QUARTER)]
    b = xi_batch(2, 0.0)
    assert b[1] == 0 and b[2] == xi(2, 0.0)
    np.testing.assert_array_equal(xi_batch(25, -0.9).values, xi_batch(25, 0.9).values.conj())


def test_batch_is_read_only():
    b = xi_batch(4, 0.3)
    with pytest.raises(ValueError):
        b.values[0] = 0


@pytest.mark.parametrize("k", [-3.7, -0.4, 0.0, 1.1, 2.5, 6.0])
def test_xi_matches_arbitrary_precision(k):
    for n in (0, 1, 2, 7, 30, 61, 120):
        assert abs(xi(n, k) - xi_mp(n, k)) <= 1e-14, n


def test_real_functions_match_scipy():
    k = np.linspace(-5, 5, 41)
    psi = hermite_functions(60, k)
    for n in range(61):
        np.testing.assert_allclose(psi[n], psi_scipy(n, k), atol=1e-13)


def test_batch_agrees_with_pointwise():
    rng = np.random.default_rng(1)
    for k in rng.uniform(-6, 6, 20):
        b = xi_batch(50, k)
        for n in range(51):
            assert abs(b[n] - xi(n, k)) <= 1e-14


def test_phase_is_exact_quarter_turns():
    vals = xi_table(11, 0.83)
    assert np.all(vals[0::4].imag == 0) and np.all(vals[2::4].imag == 0)
    assert np.all(vals[1::4].real == 0) and np.all(vals[3::4].real == 0)


def test_parity_random_k():
    k = np.random.default_rng(0).uniform(-8, 8, 200)
    pos = xi_table(60, k)
    neg = xi_table(60, -k)
    assert np.max(np.abs(neg - pos.conj())) <= 1e-14


def test_odd_zeros_exact():
    vals = xi_table(61, 0.0)
    for j in range(31):
        assert vals[2 * j + 1] == 0


def test_boundedness_large_n():
    k = np.linspace(-50, 50, 2001)
    vals = xi_table(1000, k)
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(vals)) <= 1.0
    assert np.max(np.abs(vals)) <= PI_QUARTER + 1e-14


def test_large_n_against_mpmath():
    for n, k in [(400, 10.0), (1000, 30.0), (1000, 44.0), (800, -3.3)]:
        want = xi_mp(n, k, dps=80)
        got = xi(n, k)
        assert abs(got - want) <= 1e-13 * max(1.0, abs(want) * 1e3), (n, k)


def test_far_tail_underflows_cleanly():
    assert xi(0, 50.0) == 0
    assert np.isfinite(xi(1000, 50.0))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        xi(-1, 0.0)
    with pytest.raises(ValueError):
        xi(0, float("nan"))
    with pytest.raises(ValueError):
        hermite_functions(-1, 0.0)


def test_orthonormality_n40_order60():
    report = orthonormality_matrix(40, gauss_hermite(60))
    assert report.max_deviation <= 1e-12
    assert report.warning is None


def test_orthonormality_against_independent_rules():
    # a higher Hermite order and a Legendre rule on [-14, 14] give the same Gram matrix
    base = orthonormality_matrix(40, gauss_hermite(60)).matrix
    high = orthonormality_matrix(40, gauss_hermite(240)).matrix
    leg = orthonormality_matrix(40, gauss_legendre(400, -14.0, 14.0)).matrix
    assert np.max(np.abs(base - high)) <= 1e-12
    assert np.max(np.abs(base - leg)) <= 1e-12


def test_orthonormality_small_cases():
    assert abs(orthonormality_matrix(0, gauss_hermite(3)).matrix[0, 0] - 1) <= 1e-13
    assert abs(orthonormality_matrix(1, gauss_hermite(2)).matrix[1, 0]) <= 1e-13


def test_orthonormality_low_order_warns():
    with pytest.warns(RuntimeWarning):
        report = orthonormality_matrix(20, gauss_hermite(10))
    assert report.warning and "order 10" in report.warning
    assert report.as_dict()["order"] == 10


def test_orthonormality_report_dict():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        d = orthonormality_matrix(5, gauss_hermite(8)).as_dict()
    assert d["n_max"] == 5 and d["kind"] == "gauss-hermite" and d["warning"] is None


def test_kernel_examples():
    assert completeness_kernel(1, 0.0, 0.0) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)
    for k, kh in [(0.5, -0.5), (1.3, 0.2), (-2.0, 3.1)]:
        assert completeness_kernel(40, k, kh) == pytest.approx(completeness_kernel(40, kh, k).conjugate(), abs=1e-15)
    with pytest.raises(ValueError):
        completeness_kernel(0, 0.0, 0.0)


def test_kernel_matrix_matches_pointwise():
    k = np.array([-1.0, 0.5])
    kh = np.array([0.2, -0.5, 2.0])
    mat = kernel_matrix(30, k, kh)
    for i, a in enumerate(k):
        for j, b in enumerate(kh):
            assert abs(mat[i, j] - completeness_kernel(30, a, b)) <= 1e-15


def test_projection_reproduces_test_function():
    g = lambda k: np.exp(-k * k)  # noqa: E731
    assert abs(project(128, g, 0.5) - g(0.5)) <= 0.02 * g(0.5)
    assert abs(project(128, g, -0.5) - g(-0.5)) <= 1e-13


@pytest.mark.parametrize("a", [0.0, 0.7])
def test_smeared_completeness_monotone(a):
    g = lambda k: np.exp(-(k - a) ** 2)  # noqa: E731
    report = completeness_errors((16, 32, 64, 128), g)
    tail = report.tail
    assert all(fine < coarse for coarse, fine in zip(tail, tail[1:]))
    assert abs(report.closure_defect) <= 1e-14
    assert report.reference == pytest.approx(math.sqrt(math.pi / 2), abs=1e-14)


@pytest.mark.parametrize("a", [0.0, 0.7])
def test_smeared_completeness_double_quadrature(a):
    # explicit double sum of g K g over a tensor Legendre grid
    rule = gauss_legendre(160, -10.0, 10.0)
    g = lambda k: np.exp(-(k - a) ** 2)  # noqa: E731
    gv = g(rule.nodes)
    for n_cut in (16, 32):
        kern = kernel_matrix(n_cut, rule.nodes, rule.nodes)
        double = (rule.weights * gv) @ kern @ (rule.weights * gv)
        reproduced, reference = smeared_completeness(n_cut, g, rule)
        assert abs(double - reproduced) <= 1e-13
        assert reproduced <= reference + 1e-14
