import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peaklab.errors import DomainError, ModeOverflow, SingularArgument
from peaklab.specfun import (BesselTable, bessel_i, bessel_ratios, bessel_series,
                             fourier_log_sum, scaled_bessel)

mp.mp.dps = 40


def test_bessel_examples():
    assert bessel_i(0, 0.0) == (1.0, 0.0)
    v, d = bessel_i(0, 1.0)
    assert abs(v - 1.266065877752) < 1e-12 and abs(d - 0.565159103992) < 1e-12
    assert abs(bessel_i(1, 1.0)[0] - 0.565159103992) < 1e-12


def test_bessel_errors():
    with pytest.raises(DomainError):
        bessel_i(0, 1.5)
    with pytest.raises(DomainError):
        bessel_i(0, -0.1)
    with pytest.raises(ModeOverflow):
        bessel_i(20, 0.5, k_max=10)


@pytest.mark.parametrize("x", [0.1, 0.25, 0.5, 1.0])
def test_miller_vs_series(x):
    # ratio form of the recurrence against the series oracle, every order <= 64
    for k in range(0, 65):
        ref = bessel_series(k, x, terms=60)
        v, _ = bessel_i(k, x) if k > 8 else (None, None)
        if v is not None:
            assert abs(v - ref) <= 1e-12 * ref


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0])
def test_against_mpmath(x):
    for k in (0, 1, 2, 7, 9, 20, 64, 200):
        v, d = bessel_i(k, x)
        ref = float(mp.besseli(k, x))
        dref = float(mp.diff(lambda t: mp.besseli(k, t), x))
        assert abs(v - ref) <= 1e-12 * ref
        assert abs(d - dref) <= 1e-12 * abs(dref)


@pytest.mark.parametrize("x", [0.25, 0.5, 1.0])
def test_three_term_recurrence(x):
    for k in range(1, 65):
        a, b, c = (bessel_i(j, x)[0] for j in (k - 1, k, k + 1))
        assert abs((a - c) - (2 * k / x) * b) <= 1e-11 * a


def test_table_invariants():
    t = BesselTable(4096)
    assert np.all(t.log_values[:4097] > -np.inf)
    assert np.all(np.diff(t.log_values[:4097]) < 0)
    assert np.all(np.diff(t.log_derivative) > 0)
    for k in (0, 1, 5, 30, 100):
        assert abs(t.value(k) - bessel_series(k, 1.0)) <= 1e-12 * t.value(k)
    # deep orders: compare logs with mpmath
    for k in (500, 2000, 4096):
        assert abs(t.log_values[k] - float(mp.log(mp.besseli(k, 1)))) < 1e-12 * abs(t.log_values[k])
    with pytest.raises(ModeOverflow):
        t.value(4097)


def test_scaled_bessel_matches_mpmath():
    r = np.array([0.0, 0.3, 0.9])
    val, der = scaled_bessel(r, 40)
    for i, ri in enumerate(r):
        for k in (0, 1, 5, 40):
            ref = mp.besseli(k, ri) / mp.besseli(k, 1)
            dref = (mp.besseli(k + 1, ri) if k == 0 else
                    (mp.besseli(k - 1, ri) + mp.besseli(k + 1, ri)) / 2) / mp.besseli(k, 1)
            assert abs(val[i, k] - float(ref)) <= 1e-13 * max(float(ref), 1e-300) + 1e-300
            assert abs(der[i, k] - float(dref)) <= 1e-12 * abs(float(dref)) + 1e-300


def test_ratios_bounded():
    r = bessel_ratios(1.0, 100)
    assert np.all(r[1:] > 0) and np.all(r[1:] < 1)


def test_fourier_log_sum_examples():
    assert abs(fourier_log_sum(np.pi) + math.log(2)) < 1e-15
    assert abs(fourier_log_sum(np.pi / 2) + math.log(math.sqrt(2))) < 1e-15
    assert abs(fourier_log_sum(2 * np.pi / 3) + math.log(math.sqrt(3))) < 1e-15
    with pytest.raises(SingularArgument):
        fourier_log_sum(0.0)
    with pytest.raises(SingularArgument):
        fourier_log_sum(2 * np.pi)


def test_fourier_log_sum_vs_series():
    # Abel-summed series oracle: sum r^k cos(k d)/k = -log|1 - r e^{id}|, r -> 1
    for d in (np.pi, np.pi / 2, 1.0):
        ref = mp.nsum(lambda k: mp.cos(k * d) / k, [1, mp.inf])
        assert abs(fourier_log_sum(d) - float(ref)) < 1e-12


@given(st.floats(1e-6, 2 * np.pi - 1e-6))
@settings(max_examples=200)
def test_fourier_log_sum_even(d):
    # 2 pi - d is rounded; its relative error is amplified by 1/d near 0
    tol = 1e-14 + 4e-16 * 2 * np.pi / min(d, 2 * np.pi - d)
    assert abs(fourier_log_sum(2 * np.pi - d) - fourier_log_sum(d)) < tol
