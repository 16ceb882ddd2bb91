import math

import mpmath
import numpy as np
import pytest

from oracles import scaled_bessel_series
from rpnn.benchmarks import (
    BENCHMARK_IDS,
    DEFAULT_EPS,
    BurgersSeriesConfig,
    f1,
    f2,
    f3,
    f4,
    f5,
    get_benchmark,
    scaled_bessel_i,
    scaled_bessel_sequence,
)
from rpnn.core import NumericalError

# frozen from oracles.scaled_bessel_series (mpmath power series, 60 digits)
I0_50 = 0.05656162664745419
I3_50 = 0.05164737175755633
I30_10 = 3.535551211760518e-16
# frozen from oracles.burgers_fd(0.5, 1/pi): 4096 points, RK4
BURGERS_FD_AT_HALF = -0.7364298164441205


class TestElementary:
    def test_f1(self):
        assert f1(4 / 9, 10) == 0.0 and f1(4 / 9, 100) == 0.0
        assert f1(1.0, 10) == pytest.approx(math.atan(50 / 9), abs=1e-15)
        assert f1(1.0, 10) == pytest.approx(1.3927, abs=1e-4)
        assert f1(0.0, 100) == pytest.approx(math.atan(-400 / 9), abs=1e-15)
        assert f1(0.0, 100) == pytest.approx(-1.5483, abs=1e-4)

    def test_f2(self):
        assert f2(0.0, 1) == pytest.approx(math.log(2), abs=1e-15)
        assert f2(0.0, 10) == pytest.approx(math.log(2), abs=1e-15)
        assert f2(0.5, 1) == pytest.approx(math.log(math.sin(5) + 2) + math.sin(0.5), abs=1e-15)

    def test_f4_f5(self):
        assert f4(1.0) == pytest.approx(10 * math.pi, rel=1e-14)
        assert abs(f5(0.0)) <= 1e-14
        with pytest.raises(ValueError):
            f4(1.0 + DEFAULT_EPS)
        with pytest.raises(ValueError):
            f5(-DEFAULT_EPS)

    def test_f5_zero_count(self):
        x = np.linspace(0.0, 1.0, 100_000)
        y = f5(x)
        interior = int(np.count_nonzero(np.sign(y[1:-1]) != np.sign(y[2:])))
        # the tenth zero sits exactly on the left endpoint, x = 1/(10 pi) - eps = 0
        at_left = int(abs(y[0]) <= 1e-14)
        assert interior == 9 and at_left == 1
        assert interior + at_left == 10


class TestBessel:
    def test_at_zero(self):
        assert scaled_bessel_i(0, 0.0) == 1.0
        assert all(scaled_bessel_i(n, 0.0) == 0.0 for n in (1, 2, 7))

    def test_frozen_values(self):
        assert scaled_bessel_i(0, 50.0) == pytest.approx(I0_50, rel=1e-12)
        assert scaled_bessel_i(3, 50.0) == pytest.approx(I3_50, rel=1e-12)
        assert scaled_bessel_i(30, 10.0) == pytest.approx(I30_10, rel=1e-12)
        # large-argument asymptote 1/sqrt(2 pi z)
        assert scaled_bessel_i(0, 50.0) == pytest.approx(1 / math.sqrt(100 * math.pi), rel=3e-3)

    @pytest.mark.parametrize("z", [0.3, 5.0, 31.830988618379067, 99.0])
    def test_against_power_series(self, z):
        seq = scaled_bessel_sequence(200, z)
        for n in (0, 1, 2, 10, 50, 120, 200):
            ref = scaled_bessel_series(n, z)
            if ref < 1e-300:
                continue
            assert seq[n] == pytest.approx(ref, rel=1e-12)

    def test_recurrence(self):
        z = 50.0
        seq = scaled_bessel_sequence(51, z)
        for n in range(1, 51):
            assert seq[n - 1] - seq[n + 1] == pytest.approx(2 * n / z * seq[n], rel=1e-10, abs=1e-300)

    def test_extended_precision_sequence(self):
        with mpmath.workdps(40):
            seq = scaled_bessel_sequence(5, mpmath.mpf(50), digits=40)
            ref = mpmath.besseli(2, 50) * mpmath.exp(-50)
            assert abs(seq[2] / ref - 1) < mpmath.mpf(10) ** -35

    def test_errors(self):
        with pytest.raises(ValueError):
            scaled_bessel_i(1, -1.0)
        with pytest.raises(ValueError):
            scaled_bessel_i(-1, 1.0)
        with pytest.raises(ValueError):
            scaled_bessel_i(1.5, 1.0)


class TestBurgers:
    @pytest.mark.parametrize("t", [1 / math.pi, 2 / math.pi])
    def test_boundary(self, t):
        assert np.max(np.abs(f3(np.array([-1.0, 1.0]), t))) <= 1e-12

    def test_antisymmetry(self):
        x = np.random.default_rng(0).uniform(-1, 1, 50)
        assert np.max(np.abs(f3(-x) + f3(x))) <= 1e-10

    def test_against_finite_differences(self):
        assert float(f3(0.5)) == pytest.approx(BURGERS_FD_AT_HALF, abs=1e-4)

    def test_shock_region_is_steep_and_finite(self):
        x = np.linspace(-0.02, 0.02, 2001)
        u = f3(x)
        assert np.all(np.isfinite(u)) and abs(u[1000]) <= 1e-12
        assert u[0] > 0.5 and u[-1] < -0.5

    def test_truncation_independent_of_tolerance(self):
        x = np.linspace(-1, 1, 401)
        loose = f3(x, cfg=BurgersSeriesConfig(t=1 / math.pi, truncation_tol=1e-13))
        assert np.max(np.abs(loose - f3(x))) <= 1e-10

    def test_tiny_denominator_raises(self):
        # at nu = 1e-3/pi the scaled denominator falls below 1e-300 near the shock
        with pytest.raises(NumericalError):
            f3(np.array([0.0, 1e-3]), cfg=BurgersSeriesConfig(nu=1e-3 / math.pi, t=1 / math.pi, max_terms=5000))

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            BurgersSeriesConfig(t=-1.0)
        with pytest.raises(ValueError):
            f3(np.nan)


@pytest.mark.parametrize("fid", BENCHMARK_IDS)
def test_finite_on_domain(fid):
    fn = get_benchmark(fid)
    x = np.linspace(*fn.domain, 100_000)
    assert np.all(np.isfinite(fn(x)))


def test_registry():
    fn = get_benchmark("f1", k=100)
    assert fn.domain == (0.0, 1.0) and fn.kwargs == {"k": 100.0}
    assert fn.label() == "f1(k=100)"
    assert get_benchmark("f4").kwargs["eps"] == DEFAULT_EPS
    with pytest.raises(ValueError):
        get_benchmark("f6")
