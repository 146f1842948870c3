import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdv.errors import BlowUpError
from gkdv.norms import (
    WeightedNormConfig,
    gamma_k,
    lebesgue_norm,
    omega_k,
    sobolev_norm,
    spectral_lq_norm,
    x_norm,
    y_norm,
    z_norm,
    z_tilde_norm,
)
from gkdv.probes import gaussian_field, rough_field
from gkdv.semigroup import Propagator, free_trajectory
from gkdv.spectral import GridSpec, SpectralField, coherent_field, inverse_transform
from gkdv.symbols import builtin_symbol


def cfg_for(s=0.0, k=1.0, p=4.0, t_final=1.0, n_times=8):
    return WeightedNormConfig.default(s, k, p, t_final, n_times=n_times)


class TestLebesgue:
    def test_constant_field(self):
        g = GridSpec(10.0, 64)
        f = coherent_field(g, np.full(64, -2.0))
        for q in (1, 2, 4):
            assert lebesgue_norm(f, q) == pytest.approx(2.0 * 10.0 ** (1.0 / q), rel=1e-13)
        assert lebesgue_norm(f, np.inf) == pytest.approx(2.0)

    def test_q2_matches_parseval(self):
        g = GridSpec(17.0, 256)
        rng = np.random.default_rng(5)
        f = coherent_field(g, rng.standard_normal(256))
        phys = lebesgue_norm(f, 2)
        spec = np.sqrt(g.length * np.sum(np.abs(f.spec) ** 2))
        assert phys == pytest.approx(spec, rel=1e-12)

    def test_sine_fourth_power(self):
        # integral of sin^4 over a 2*pi period is 3*pi/4
        g = GridSpec(2 * np.pi, 256)
        f = coherent_field(g, np.sin(g.x))
        assert lebesgue_norm(f, 4) == pytest.approx((3 * np.pi / 4) ** 0.25, rel=1e-12)

    def test_domain_error(self):
        g = GridSpec(2 * np.pi, 64)
        f = coherent_field(g, np.ones(64))
        with pytest.raises(ValueError):
            lebesgue_norm(f, 0.5)


class TestSobolev:
    def test_s0_equals_l2(self):
        g = GridSpec(11.0, 128)
        rng = np.random.default_rng(1)
        f = coherent_field(g, rng.standard_normal(128))
        assert sobolev_norm(f, 0.0) == pytest.approx(lebesgue_norm(f, 2), rel=1e-12)

    def test_single_mode(self):
        g = GridSpec(10.0, 64)
        spec = np.zeros(64, complex)
        spec[4] = 0.5
        spec[-4] = 0.5
        f = inverse_transform(SpectralField(g, spec=spec))
        xi4 = abs(g.xi[4])
        for s in (-0.5, 0.0, 1.3):
            assert sobolev_norm(f, s) == pytest.approx(
                (1 + xi4) ** s * lebesgue_norm(f, 2), rel=1e-12
            )

    def test_monotone_in_s(self):
        g = GridSpec(10.0, 128)
        rng = np.random.default_rng(2)
        f = coherent_field(g, rng.standard_normal(128))
        values = [sobolev_norm(f, s) for s in (-1.0, -0.3, 0.0, 0.5, 2.0)]
        assert np.all(np.diff(values) >= 0)


class TestExponents:
    def test_closed_form_values(self):
        assert gamma_k(1.0) == 5.0 / 4.0
        assert gamma_k(2.0) == 4.0 / 3.0
        assert omega_k(1.0, 4.0) == 3.0 / 8.0
        assert omega_k(1.0, 3.0) == 1.0 / 6.0
        assert omega_k(1.0, 2.5) == 0.0

    def test_gamma_asymptote(self):
        assert 1.49 < gamma_k(1000.0) < 1.5

    def test_random_closed_forms(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            k = float(rng.uniform(0.1, 8.0))
            p = float(rng.uniform(0.5, 9.0))
            assert gamma_k(k) == (3 * k + 2) / (2 * (k + 1))
            assert omega_k(k, p) == (2 * p - 3 * k - 2) / (2 * p)

    def test_gamma_domain(self):
        with pytest.raises(ValueError):
            gamma_k(0.0)


class TestHomogeneityAndTriangle:
    @settings(max_examples=20, deadline=None)
    @given(alpha=st.floats(-5, 5), q=st.sampled_from([1.0, 2.0, 4.0]), seed=st.integers(0, 30))
    def test_homogeneous(self, alpha, q, seed):
        g = GridSpec(9.0, 64)
        rng = np.random.default_rng(seed)
        values = rng.standard_normal(64)
        f = coherent_field(g, values)
        fa = coherent_field(g, alpha * values)
        assert lebesgue_norm(fa, q) == pytest.approx(abs(alpha) * lebesgue_norm(f, q), abs=1e-12)
        assert sobolev_norm(fa, 0.7) == pytest.approx(abs(alpha) * sobolev_norm(f, 0.7), abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 50))
    def test_triangle(self, seed):
        g = GridSpec(9.0, 64)
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(64)
        b = rng.standard_normal(64)
        fa, fb, fab = (coherent_field(g, v) for v in (a, b, a + b))
        for q in (1.0, 2.0, 4.0):
            assert lebesgue_norm(fab, q) <= lebesgue_norm(fa, q) + lebesgue_norm(fb, q) + 1e-10
        assert sobolev_norm(fab, 0.5) <= sobolev_norm(fa, 0.5) + sobolev_norm(fb, 0.5) + 1e-10


class TestSpectralLq:
    def test_parseval_ratio_one(self):
        g = GridSpec(13.0, 128)
        rng = np.random.default_rng(7)
        f = coherent_field(g, rng.standard_normal(128))
        assert spectral_lq_norm(f, 2) == pytest.approx(lebesgue_norm(f, 2), rel=1e-12)


class TestTrajectoryNorms:
    def test_zero_trajectory(self):
        g = GridSpec(10.0, 64)
        zero = coherent_field(g, np.zeros(64))
        cfg = cfg_for()
        assert x_norm(lambda t: zero, cfg).total == 0.0
        assert y_norm(lambda t: zero, cfg).total == 0.0
        assert z_norm(lambda t: zero, cfg) == 0.0
        assert z_tilde_norm(lambda t: zero, cfg) == 0.0

    def test_stationary_smooth_weight_vanishes(self):
        # for a time-independent field the weighted part scales exactly like
        # t^(gamma_k/p), so it vanishes as t -> 0
        g = GridSpec(40.0, 256)
        bump = gaussian_field(g, width=2.0)
        cfg = cfg_for(t_final=1.0, n_times=12)
        rep = x_norm(lambda t: bump, cfg)
        weighted = {}
        for t, name, value in rep.components:
            if name != "hs":
                weighted[t] = weighted.get(t, 0.0) + value
        times = sorted(weighted)
        expected_ratio = (times[0] / times[-1]) ** cfg.weight_exponent
        assert weighted[times[0]] == pytest.approx(
            weighted[times[-1]] * expected_ratio, rel=1e-10
        )
        assert rep.h_s == pytest.approx(sobolev_norm(bump, 0.0), rel=1e-12)

    def test_free_rough_trajectory_weighted_bounded(self):
        g = GridSpec(200 * np.pi, 2 ** 12)
        w0 = rough_field(g, sobolev_index=0.0, seed=4)
        prop = Propagator(builtin_symbol("kdv-ks"), g)
        cfg = WeightedNormConfig(0.0, 1.0, 4.0, 1.0, tuple(np.geomspace(1e-4, 1.0, 12)))
        rep = x_norm(free_trajectory(prop, w0), cfg)
        l2 = lebesgue_norm(w0, 2)
        for t, name, value in rep.components:
            if name != "hs":
                assert value <= 10.0 * l2

    def test_y_norm_components_coincide_at_s0(self):
        g = GridSpec(40.0, 256)
        bump = gaussian_field(g, width=2.0)
        cfg = cfg_for(s=0.0)
        rep = y_norm(lambda t: bump, cfg)
        by_time = {}
        for t, name, value in rep.components:
            by_time.setdefault(t, {})[name] = value
        for entries in by_time.values():
            assert entries["w_dx_lq"] == pytest.approx(entries["w_dxs_lq"], rel=1e-12)

    def test_y_leq_x_at_s0(self):
        g = GridSpec(40.0, 256)
        bump = gaussian_field(g, width=2.0)
        cfg = cfg_for(s=0.0)
        assert y_norm(lambda t: bump, cfg).total <= x_norm(lambda t: bump, cfg).total + 1e-14

    def test_z_tilde_stationary_oracle(self):
        g = GridSpec(40.0, 256)
        bump = gaussian_field(g, width=2.0)
        s, p, t_final = 0.5, 4.0, 0.8
        cfg = WeightedNormConfig(s, 1.0, p, t_final, tuple(np.geomspace(1e-3, t_final, 10)))
        from gkdv.spectral import spatial_derivative

        expected = sobolev_norm(bump, s) + t_final ** ((1 + abs(s)) / p) * lebesgue_norm(
            spatial_derivative(bump), 2
        )
        assert z_tilde_norm(lambda t: bump, cfg) == pytest.approx(expected, rel=1e-12)

    def test_z_finite_whenever_x_finite(self):
        g = GridSpec(40.0, 256)
        rng = np.random.default_rng(9)
        f = coherent_field(g, rng.standard_normal(256))
        cfg = cfg_for()
        assert np.isfinite(x_norm(lambda t: f, cfg).total)
        assert np.isfinite(z_norm(lambda t: f, cfg))

    def test_blow_up_named_time(self):
        g = GridSpec(10.0, 64)
        bad = SpectralField(
            g, phys=np.full(64, np.nan), spec=np.full(64, np.nan, complex), coherent=True
        )
        cfg = cfg_for()
        with pytest.raises(BlowUpError, match="t="):
            x_norm(lambda t: bad, cfg)

    def test_report_serialization(self):
        g = GridSpec(40.0, 256)
        bump = gaussian_field(g, width=2.0)
        cfg = cfg_for(n_times=4)
        rep = x_norm(lambda t: bump, cfg)
        rows = rep.to_csv_rows()
        assert rows[0] == "time,component,value"
        assert len(rows) == 1 + 4 * 4  # hs + three weighted parts per time
        payload = rep.to_json_dict()
        assert payload["space"] == "x"
        assert payload["total"] == rep.total


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            WeightedNormConfig(0.0, 1.0, 4.0, 1.5, (0.1,))
        with pytest.raises(ValueError):
            WeightedNormConfig(0.0, 1.0, 4.0, 1.0, (0.5, 0.1))
        with pytest.raises(ValueError):
            WeightedNormConfig(0.0, -1.0, 4.0, 1.0, (0.1,))

    def test_default_spacing(self):
        cfg = WeightedNormConfig.default(0.0, 1.0, 4.0, 0.5, n_times=20)
        ts = np.asarray(cfg.sample_times)
        assert len(ts) == 20
        assert ts[0] == pytest.approx(1e-4 * 0.5)
        assert ts[-1] == pytest.approx(0.5)
        ratios = ts[1:] / ts[:-1]
        assert np.allclose(ratios, ratios[0])

    def test_weight_exponent(self):
        cfg = WeightedNormConfig.default(0.0, 1.0, 4.0, 1.0)
        assert cfg.weight_exponent == gamma_k(1.0) / 4.0
