import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from spatialkir.errors import EmptyDataset, InvalidKernel, InvalidSchedule, ValidationError
from spatialkir.fieldsim import SingleIndexSpec, generate_single_index
from spatialkir.kernelest import (KERNELS, BandwidthSchedule, KernelConfig, density_estimate,
                                  evaluate_on_grid, get_kernel, inverse_regression,
                                  numerator_estimate, scalar_kernel_regression,
                                  unfloored_inverse_regression)
from spatialkir.lattice import RegressionDataset, center_dataset

EPA = KernelConfig("epanechnikov")


def naive_density(ys, y, K, h):
    out = []
    for t in y:
        s = 0.0
        for v in ys:
            s += float(K((t - v) / h))
        out.append(s / (len(ys) * h))
    return np.array(out)


def naive_numerator(xs, ys, y, K, h):
    out = np.zeros((len(y), xs.shape[1]))
    for a, t in enumerate(y):
        for i in range(len(ys)):
            out[a] += xs[i] * float(K((t - ys[i]) / h))
    return out / (len(ys) * h)


def naive_nw(inputs, outputs, K, h, q):
    num = den = 0.0
    for xi, yi in zip(inputs, outputs):
        w = 1.0
        for j in range(len(q)):
            w *= float(K((q[j] - xi[j]) / h))
        num += w * yi
        den += w
    return num / den if den != 0 else float(np.mean(outputs))


class TestKernels:
    @pytest.mark.parametrize("kid", sorted(KERNELS))
    def test_moments_with_independent_quadrature(self, kid):
        K = get_kernel(kid)
        mass = quad(lambda u: float(K(u)), -1, 1, epsabs=1e-13)[0]
        assert abs(mass - 1) < 1e-8
        for j in range(1, K.order):
            assert abs(quad(lambda u: u ** j * float(K(u)), -1, 1, epsabs=1e-13)[0]) < 1e-8
        assert abs(quad(lambda u: u ** K.order * float(K(u)), -1, 1)[0]) > 1e-3

    @pytest.mark.parametrize("kid", sorted(KERNELS))
    def test_compact_support(self, kid):
        K = get_kernel(kid)
        u = np.array([-5.0, -1.0000001, 1.0000001, 3.0])
        assert np.all(K(u) == 0.0)
        assert K(0.0) > 0

    def test_known_values(self):
        assert get_kernel("epanechnikov")(0.0) == 0.75
        assert np.isclose(get_kernel("quartic")(0.5), 15 / 16 * 0.75 ** 2)
        u = np.linspace(-1, 1, 11)
        four = 15 / 32 * (3 - 10 * u ** 2 + 7 * u ** 4)
        assert np.allclose(get_kernel("fourth-order-polynomial")(u), four, atol=1e-12)

    def test_nonnegativity_flags(self):
        assert get_kernel("epanechnikov").nonnegative
        assert get_kernel("quartic").nonnegative
        assert not get_kernel("fourth-order-polynomial").nonnegative

    def test_lipschitz_bound(self):
        assert abs(get_kernel("epanechnikov").lipschitz - 1.5) < 1e-3

    def test_invalid(self):
        with pytest.raises(InvalidKernel):
            get_kernel("gaussian")
        with pytest.raises(InvalidKernel):
            KernelConfig("epanechnikov", order=4)


class TestSchedule:
    def test_window(self):
        BandwidthSchedule().check_window(2)
        with pytest.raises(InvalidSchedule):
            KernelConfig(schedule=BandwidthSchedule(c1=0.45))
        with pytest.raises(InvalidSchedule):
            KernelConfig(schedule=BandwidthSchedule(c1=0.1))
        with pytest.raises(InvalidSchedule):
            BandwidthSchedule(c1=0.6)

    def test_decreasing_positive(self):
        s = BandwidthSchedule(h_scale=2.0)
        ns = [100, 400, 1600, 6400]
        hs, es = [s.h(n) for n in ns], [s.e(n) for n in ns]
        assert all(v > 0 for v in hs + es)
        assert hs == sorted(hs, reverse=True) and es == sorted(es, reverse=True)
        assert np.isclose(s.h(400), 2.0 * 400 ** -0.38)
        assert np.isclose(s.e(400), 0.01 * 400 ** -0.05)

    def test_data_scale(self):
        y = np.array([1.0, 2.0, 4.0])
        assert np.isclose(BandwidthSchedule().scale(y), np.std(y, ddof=1))
        with pytest.raises(ValidationError):
            BandwidthSchedule().scale(np.ones(4))


class TestEstimators:
    def test_single_sample_density(self):
        ds = RegressionDataset([[2.0, -1.0]], [0.0])
        assert density_estimate(ds, EPA, 0.0, h=1.0) == 0.75
        assert density_estimate(ds, EPA, 1.5, h=1.0) == 0.0

    def test_single_sample_numerator(self):
        ds = RegressionDataset([[2.0, -1.0]], [0.0])
        assert numerator_estimate(ds, EPA, 0.0, h=1.0).tolist() == [1.5, -0.75]

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            RegressionDataset(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(EmptyDataset):
            density_estimate(None, EPA, 0.0, h=1.0)
        with pytest.raises(EmptyDataset):
            scalar_kernel_regression(np.zeros((0, 1)), [], EPA, 1.0, [0.0])

    def test_constant_covariates_factorize(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=300)
        c = np.array([1.5, -2.0, 0.25])
        ds = RegressionDataset(np.tile(c, (300, 1)), y)
        grid = np.linspace(-2, 2, 17)
        f = density_estimate(ds, EPA, grid)
        phi = numerator_estimate(ds, EPA, grid)
        assert np.allclose(phi, f[:, None] * c, rtol=0, atol=1e-14)
        ev = inverse_regression(ds, EPA, 0.0)
        assert ev.f_n >= ev.f_en - 1e-15 and np.allclose(ev.r_en, c, atol=1e-12)

    @pytest.mark.parametrize("kid", sorted(KERNELS))
    def test_naive_oracle(self, kid):
        rng = np.random.default_rng(1)
        cfg = KernelConfig(kid, BandwidthSchedule(c1=0.38, c2=0.05) if kid != "fourth-order-polynomial"
                           else BandwidthSchedule(c1=0.3, c2=0.05))
        x = rng.normal(size=(1000, 3))
        y = rng.normal(size=1000)
        ds = RegressionDataset(x, y)
        grid = np.linspace(-3, 3, 50)
        h = 0.4
        K = cfg.kernel
        assert np.max(np.abs(density_estimate(ds, cfg, grid, h=h) - naive_density(y, grid, K, h))) <= 1e-12
        assert np.max(np.abs(numerator_estimate(ds, cfg, grid, h=h)
                             - naive_numerator(x, y, grid, K, h))) <= 1e-12

    def test_nw_naive_oracle(self):
        rng = np.random.default_rng(2)
        inputs = rng.normal(size=(300, 2))
        outputs = rng.normal(size=300)
        queries = rng.normal(size=(50, 2))
        got = scalar_kernel_regression(inputs, outputs, EPA, 0.7, queries)
        want = np.array([naive_nw(inputs, outputs, EPA.kernel, 0.7, q) for q in queries])
        assert np.max(np.abs(got - want)) <= 1e-12

    def test_nw_examples(self):
        rng = np.random.default_rng(3)
        inputs = rng.normal(size=(100, 2))
        assert scalar_kernel_regression(inputs, np.full(100, 4.2), EPA, 0.5, [0.1, 0.3]) == \
            pytest.approx(4.2, abs=1e-14)
        iso = np.array([[0.0], [5.0], [9.0]])
        assert scalar_kernel_regression(iso, [1.0, 2.0, 3.0], EPA, 1.0, [5.0]) == 2.0
        # nothing within support: mean of outputs
        assert scalar_kernel_regression(iso, [1.0, 2.0, 3.0], EPA, 1.0, [20.0]) == 2.0

    def test_nw_sine_link(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-3, 3, size=500)
        y = np.sin(x) + 0.1 * rng.normal(size=500)
        grid = np.linspace(-2, 2, 41)
        est = scalar_kernel_regression(x, y, EPA, 0.3, grid[:, None])
        assert np.sqrt(np.mean((est - np.sin(grid)) ** 2)) < 0.15

    def test_floor_and_isolated_point(self):
        rng = np.random.default_rng(5)
        ds = RegressionDataset(rng.normal(size=(200, 2)), rng.normal(size=200))
        ev = inverse_regression(ds, EPA, 50.0)
        assert ev.f_n == 0 and ev.f_en == EPA.floor_level(ds)
        assert np.all(ev.r_en == 0)
        for e in evaluate_on_grid(ds, EPA, np.linspace(-4, 4, 81)):
            assert e.f_en == max(EPA.floor_level(ds), e.f_n)
            assert np.array_equal(e.r_en, e.phi_n / e.f_en)

    def test_add_floor_variant(self):
        rng = np.random.default_rng(6)
        ds = RegressionDataset(rng.normal(size=(200, 2)), rng.normal(size=200))
        cfg = KernelConfig(floor="add")
        ev = inverse_regression(ds, cfg, 0.3)
        assert ev.f_en == ev.f_n + cfg.floor_level(ds)
        with pytest.raises(ValidationError):
            KernelConfig(floor="min")

    def test_unfloored_fallback(self):
        ds = RegressionDataset([[1.0], [3.0]], [0.0, 1.0])
        assert unfloored_inverse_regression(ds, EPA, 10.0, h=0.5).tolist() == [0.5]
        assert unfloored_inverse_regression(ds, EPA, 0.0, h=0.5).tolist() == [1.0]

    def test_normalization_by_quadrature(self):
        rng = np.random.default_rng(7)
        y = rng.normal(size=40)
        ds = RegressionDataset(np.zeros((40, 1)), y)
        for kid in ("epanechnikov", "quartic"):
            cfg = KernelConfig(kid)
            h = 0.3
            pts = np.sort(np.concatenate([y - h, y + h, y]))
            total = sum(quad(lambda t: density_estimate(ds, cfg, t, h=h), a, b)[0]
                        for a, b in zip(pts[:-1], pts[1:]))
            assert abs(total - 1) < 1e-6

    def test_inverse_regression_single_index(self):
        errs = []
        for seed in range(10):
            ds, _ = center_dataset(generate_single_index(SingleIndexSpec((50, 50), d=3, seed=seed)))
            r = inverse_regression(ds, EPA, 0.8).r_en
            errs.append(np.max(np.abs(r - np.array([0.4, 0.0, 0.0]))))
        assert np.median(errs) < 0.15


class TestGridPurity:
    def test_singleton(self):
        rng = np.random.default_rng(8)
        ds = RegressionDataset(rng.normal(size=(100, 2)), rng.normal(size=100))
        (a,) = evaluate_on_grid(ds, EPA, [0.2])
        b = inverse_regression(ds, EPA, 0.2)
        assert a.f_n == b.f_n and np.array_equal(a.r_en, b.r_en)

    def test_bitwise_sequential_oracle(self):
        rng = np.random.default_rng(9)
        ds = RegressionDataset(rng.normal(size=(2000, 3)), rng.normal(size=2000))
        grid = rng.normal(size=200)
        batch = evaluate_on_grid(ds, EPA, grid)
        for y, ev in zip(grid, batch):
            one = inverse_regression(ds, EPA, y)
            assert ev.f_n == one.f_n and ev.f_en == one.f_en
            assert np.array_equal(ev.phi_n, one.phi_n) and np.array_equal(ev.r_en, one.r_en)

    def test_empty_grid(self):
        ds = RegressionDataset([[0.0], [1.0]], [0.0, 1.0])
        with pytest.raises(ValidationError):
            evaluate_on_grid(ds, EPA, [])

    @settings(max_examples=25, deadline=None)
    @given(st.permutations(list(range(12))))
    def test_permutation(self, perm):
        rng = np.random.default_rng(10)
        ds = RegressionDataset(rng.normal(size=(150, 2)), rng.normal(size=150))
        grid = np.linspace(-2, 2, 12)
        base = evaluate_on_grid(ds, EPA, grid)
        permuted = evaluate_on_grid(ds, EPA, grid[perm])
        for k, p in enumerate(perm):
            assert np.array_equal(permuted[k].r_en, base[p].r_en)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 99), st.floats(-2, 2))
    def test_split_additivity(self, cut, y):
        rng = np.random.default_rng(11)
        x, ys = rng.normal(size=(100, 2)), rng.normal(size=100)
        whole = RegressionDataset(x, ys)
        a, b = RegressionDataset(x[:cut], ys[:cut]), RegressionDataset(x[cut:], ys[cut:])
        h = 0.5
        fa, fb = density_estimate(a, EPA, y, h=h), density_estimate(b, EPA, y, h=h)
        assert abs(density_estimate(whole, EPA, y, h=h) - (cut * fa + (100 - cut) * fb) / 100) < 1e-12
        pa, pb = numerator_estimate(a, EPA, y, h=h), numerator_estimate(b, EPA, y, h=h)
        assert np.allclose(numerator_estimate(whole, EPA, y, h=h),
                           (cut * pa + (100 - cut) * pb) / 100, rtol=0, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-6, 6))
    def test_floor_invariant(self, y):
        rng = np.random.default_rng(12)
        ds = RegressionDataset(rng.normal(size=(80, 2)), rng.normal(size=80))
        ev = inverse_regression(ds, EPA, y)
        e = EPA.floor_level(ds)
        assert ev.f_en >= e
        if ev.f_n >= e:
            assert ev.f_en == ev.f_n


def test_config_echo_keys():
    d = KernelConfig().as_dict()
    assert set(d) == {"kernel.id", "kernel.order", "schedule.c1", "schedule.c2",
                      "schedule.h_scale", "schedule.e_scale", "floor.variant"}
