import math
from dataclasses import replace

import numpy as np
import pytest

from ksenergy import (
    EnergyConfig,
    check_increment_bound,
    directional_derivative,
    directional_field,
    directional_vector,
    frame_sum_energy,
    make_map,
    make_space,
    minimal_gradient,
    rep_energies,
)
from ksenergy.errors import InvalidDirectionError, StencilRangeError
from ksenergy.maps import MetricMap

MAXNORM_DENSITY = (2.0 + math.pi) / (2.0 * math.pi)
X0 = np.array([0.40625, 0.53125])  # generic interior node of the 16^2 grid


class TestDirectionalDerivative:
    @pytest.mark.parametrize("theta", [0.2, 0.7, 1.2, 2.5])
    def test_max_norm_identity(self, unit_grid_16, cfg_small, theta):
        m = make_map("identity", make_space("max_norm_plane"), 2)
        nu = np.array([math.cos(theta), math.sin(theta)])
        val = directional_derivative(m, X0, nu, cfg_small, unit_grid_16)
        assert val == pytest.approx(max(abs(nu[0]), abs(nu[1])), abs=1e-9)

    def test_constant_map_zero(self, unit_grid_16, cfg_small):
        m = make_map("constant", make_space("euclidean:2"), 2)
        assert directional_derivative(m, X0, np.array([1.0, 0.0]), cfg_small, unit_grid_16) == 0.0

    @pytest.mark.parametrize("theta", [0.0, 0.9, 2.2])
    def test_linear_operator_action(self, unit_grid_16, cfg_small, theta):
        a = np.array([[1.0, 0.0], [0.0, 2.0]])
        m = make_map("linear:1,0;0,2", make_space("euclidean:2"), 2)
        nu = np.array([math.cos(theta), math.sin(theta)])
        val = directional_derivative(m, X0, nu, cfg_small, unit_grid_16)
        assert val == pytest.approx(np.linalg.norm(a @ nu), abs=5e-7)

    def test_rejects_non_unit_direction(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        with pytest.raises(InvalidDirectionError):
            directional_derivative(m, X0, np.array([1.0, 1.0]), cfg_small, unit_grid_16)

    def test_stencil_bound_respected(self, unit_grid_16):
        space = make_space("euclidean:2")
        bounded = MetricMap(space, lambda x: np.array(x, copy=True), "bounded", margin=0.0)
        cfg = EnergyConfig(fd_step=0.25)
        with pytest.raises(StencilRangeError):
            directional_derivative(bounded, np.array([0.1, 0.5]), np.array([1.0, 0.0]), cfg, unit_grid_16)


class TestHomogeneity:
    def test_scaling_identity_exact(self, unit_grid_16, cfg_small):
        m = make_map("linear:1,0;0,2", make_space("euclidean:2"), 2)
        nu = np.array([0.6, 0.8])
        for scale in (2.0, 0.5, 0.125):
            lhs = directional_vector(m, X0, scale * nu, cfg_small, unit_grid_16)
            rhs = scale * directional_derivative(m, X0, nu, cfg_small, unit_grid_16)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_max_norm_axis_vector(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("max_norm_plane"), 2)
        val = directional_vector(m, X0, np.array([2.0, 0.0]), cfg_small, unit_grid_16)
        assert val == pytest.approx(2.0, abs=1e-9)

    def test_sign_symmetry(self, unit_grid_16, cfg_small):
        m = make_map("qsplit", make_space("q:2:1"), 2)
        nu = np.array([math.cos(0.4), math.sin(0.4)])
        a = directional_vector(m, X0, nu, cfg_small, unit_grid_16)
        b = directional_vector(m, X0, -nu, cfg_small, unit_grid_16)
        assert a == b

    def test_zero_vector_rejected(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        with pytest.raises(InvalidDirectionError):
            directional_vector(m, X0, np.zeros(2), cfg_small, unit_grid_16)


class TestMinimalGradient:
    def test_max_norm_component_rule(self, unit_grid_16, cfg_small):
        # for u = (f1, f2) into the max-norm plane the minimal gradient is
        # max(|grad f1|, |grad f2|)
        m = make_map("linear:1,0.5;0.25,2", make_space("max_norm_plane"), 2)
        expected = max(math.hypot(1, 0.5), math.hypot(0.25, 2))
        assert minimal_gradient(m, X0, cfg_small, unit_grid_16) == pytest.approx(expected, abs=2e-6)

    def test_identity_euclidean(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        assert minimal_gradient(m, X0, cfg_small, unit_grid_16) == pytest.approx(1.0, abs=1e-6)

    def test_constant(self, unit_grid_16, cfg_small):
        m = make_map("constant", make_space("euclidean:2"), 2)
        assert minimal_gradient(m, X0, cfg_small, unit_grid_16) == 0.0


class TestRepEnergies:
    def test_max_norm_sphere_density(self, unit_grid_32):
        cfg = EnergyConfig(sphere_order=256)
        m = make_map("identity", make_space("max_norm_plane"), 2)
        frag = rep_energies(m, unit_grid_32, cfg, forms=("sphere", "frame"))
        assert frag.energy_sphere / frag.mask_measure == pytest.approx(MAXNORM_DENSITY, abs=1e-4)
        assert frag.frame_sum / frag.mask_measure == pytest.approx(2.0, abs=1e-6)

    def test_euclidean_identity_density(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        frag = rep_energies(m, unit_grid_16, cfg_small)
        assert frag.energy_sphere / frag.mask_measure == pytest.approx(1.0, abs=1e-6)
        assert frag.frame_sum / frag.mask_measure == pytest.approx(2.0, abs=1e-6)

    def test_diagonal_linear_density(self, unit_grid_16, cfg_small):
        m = make_map("linear:1,0;0,2", make_space("euclidean:2"), 2)
        frag = rep_energies(m, unit_grid_16, cfg_small, forms=("sphere", "ball"))
        assert frag.energy_sphere / frag.mask_measure == pytest.approx(2.5, abs=2.5e-6)
        assert frag.energy_ball / frag.mask_measure == pytest.approx(2.5, abs=2.5e-6)

    def test_constant_all_zero(self, unit_grid_16, cfg_small):
        m = make_map("constant", make_space("max_norm_plane"), 2)
        frag = rep_energies(m, unit_grid_16, cfg_small)
        assert frag.energy_sphere == 0.0
        assert frag.energy_ball == 0.0
        assert frag.frame_sum == 0.0

    def test_sphere_ball_agreement_catalog(self, unit_grid_16, cfg_small):
        from conftest import catalog

        for map_spec, space_spec, m in catalog():
            frag = rep_energies(m, unit_grid_16, cfg_small, forms=("sphere", "ball"))
            ref = max(abs(frag.energy_sphere), 1e-12)
            assert abs(frag.energy_sphere - frag.energy_ball) / ref < 5e-4, (map_spec, space_spec)

    def test_euclidean_density_pointwise_smooth_map(self, unit_grid_16, cfg_small):
        """Density equals |Du(x)|_F^2 / n pointwise for a curved map."""
        a = 0.3
        m = make_map(f"swirl:{a}", make_space("euclidean:2"), 2)
        frag = rep_energies(m, unit_grid_16, cfg_small, forms=("sphere",))
        pts = unit_grid_16.nodes[frag.mask_indices]
        frob = 2.0 + a**2 * (np.cos(pts[:, 1]) ** 2 + np.sin(pts[:, 0]) ** 2)
        assert np.max(np.abs(frag.density_sphere - frob / 2.0)) < 1e-5

    def test_under_truncation_flag_fires_without_refinement(self, unit_grid_16):
        cfg = EnergyConfig(dense_count=8, refine_stages=0, sphere_order=64, ball_order=(8, 64))
        m = make_map("linear:1,0;0,2", make_space("euclidean:2"), 2)
        frag = rep_energies(m, unit_grid_16, cfg, forms=("sphere",))
        assert frag.under_truncation
        cfg_ok = EnergyConfig(dense_count=256, sphere_order=64, ball_order=(8, 64))
        frag_ok = rep_energies(m, unit_grid_16, cfg_ok, forms=("sphere",))
        assert not frag_ok.under_truncation


@pytest.fixture(scope="module")
def fields(unit_grid_16, cfg_small):
    from conftest import catalog

    return {
        map_spec: rep_energies(m, unit_grid_16, cfg_small).field
        for map_spec, _, m in catalog()
    }


class TestFieldInvariants:

    def test_nonnegative(self, fields):
        for f in fields.values():
            assert np.all(f.values >= 0.0)

    def test_domination_by_minimal_gradient(self, fields):
        for name, f in fields.items():
            assert f.max_direction_gap() <= 1e-9, name

    def test_evenness_exact(self, fields):
        # antipodal directions share a representative, so equality is exact
        for f in fields.values():
            dirs = np.round(f.dirs, 12)
            index = {tuple(d): j for j, d in enumerate(dirs)}
            found = 0
            for j, d in enumerate(dirs):
                k = index.get(tuple(-d))
                if k is not None:
                    found += 1
                    assert np.array_equal(f.values[:, j], f.values[:, k])
            assert found > 0

    def test_doubled_prefix_never_smaller(self, fields):
        for f in fields.values():
            assert f.values_doubled is not None
            assert np.all(f.values_doubled >= f.values - 1e-15)

    def test_monotone_in_prefix_length(self, unit_grid_16):
        m = make_map("linear:1,0.5;0.25,2", make_space("euclidean:2"), 2)
        pts = unit_grid_16.nodes[[50, 100, 150]]
        theta = np.linspace(0, np.pi, 9)[:-1]
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        prev = None
        for k in (32, 64, 128, 256):
            cfg = EnergyConfig(dense_count=k, check_truncation=False, refine_stages=0)
            f = directional_field(m, pts, dirs, cfg, unit_grid_16)
            if prev is not None:
                assert np.all(f.values >= prev - 1e-15)
            prev = f.values

    def test_refinement_only_raises_values(self, unit_grid_16):
        m = make_map("linear:1,0.5;0.25,2", make_space("euclidean:2"), 2)
        pts = unit_grid_16.nodes[[77]]
        dirs = np.array([[1.0, 0.0]])
        base = EnergyConfig(dense_count=128, check_truncation=False, refine_stages=0)
        refined = replace(base, refine_stages=8)
        v0 = directional_field(m, pts, dirs, base, unit_grid_16).values
        v1 = directional_field(m, pts, dirs, refined, unit_grid_16).values
        assert np.all(v1 >= v0 - 1e-15)


class TestIncrementBound:
    def test_constant_map_trivial(self, unit_grid_16, cfg_small):
        m = make_map("constant", make_space("euclidean:2"), 2)
        rec = check_increment_bound(m, unit_grid_16, np.array([1.0, 0.0]), 0.05, cfg_small)
        assert rec.lhs == 0.0 and rec.rhs == 0.0 and rec.holds

    def test_identity_slack_is_mask_complement(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        h = 0.1
        rec = check_increment_bound(m, unit_grid_16, np.array([1.0, 0.0]), h, cfg_small)
        inner = unit_grid_16.inner_mask(h).sum() * unit_grid_16.node_weight
        assert rec.lhs == pytest.approx(h**2 * inner, rel=1e-10)
        assert rec.rhs == pytest.approx(h**2 * unit_grid_16.measure, rel=1e-6)
        assert rec.holds

    def test_max_norm_diagonal_direction(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("max_norm_plane"), 2)
        v = np.array([1.0, 1.0]) / math.sqrt(2)
        rec = check_increment_bound(m, unit_grid_16, v, 0.05, cfg_small)
        assert rec.holds
        inner = unit_grid_16.inner_mask(0.05).sum() * unit_grid_16.node_weight
        assert rec.ratio == pytest.approx(inner / unit_grid_16.measure, rel=1e-6)

    def test_short_vector(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        rec = check_increment_bound(m, unit_grid_16, np.array([0.3, 0.0]), 0.05, cfg_small)
        assert rec.holds
        assert rec.lhs > 0

    def test_overlong_vector_rejected(self, unit_grid_16, cfg_small):
        m = make_map("identity", make_space("euclidean:2"), 2)
        with pytest.raises(InvalidDirectionError):
            check_increment_bound(m, unit_grid_16, np.array([1.0, 1.0]), 0.05, cfg_small)


def test_frame_sum_energy_helper(unit_grid_16, cfg_small):
    m = make_map("identity", make_space("max_norm_plane"), 2)
    frag = frame_sum_energy(m, unit_grid_16, cfg_small)
    assert frag.frame_sum / frag.mask_measure == pytest.approx(2.0, abs=1e-6)
