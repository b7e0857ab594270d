"""
Tests for the flat prequantum model: coherent sums, concentration estimates,
windows, nets and colorings.
"""
import math

import numpy as np
import pandas as pd
import pytest

from constants import ANALYTIC_TOL
from exceptions import NetSpacingError, NetTooLargeError, PreconditionError, ContractViolationError
from model_geometry import (
    PrequantumModel, CoherentSection, SubmanifoldY, SeparatedNet, to_complex, to_real,
    coherent_eval, coherent_covariant_derivative, concentration_check, sum_over_separated_set_bound,
    tail_majorant, tail_majorant_coefficients, discretize_window, packing_bound_check, greedy_color,
    radial_profiles, dbar_norms, covering_grid, verify_covering,
)


def _make_section(model, rng, n_terms=4, spread=1.5):
    centers = to_complex(rng.uniform(-spread, spread, size=(n_terms, model.real_dim)) / math.sqrt(model.k))
    coeffs = rng.standard_normal((n_terms, model.rank)) + 1j * rng.standard_normal((n_terms, model.rank))
    coeffs /= np.maximum(1.0, np.abs(coeffs))
    return CoherentSection(model, centers, coeffs)


def _holomorphic_gauge_derivative(s, x, h=1e-6):
    """(∂ - kπ z̄) of the holomorphic-gauge value, brought back to the unitary gauge."""
    n, kpi = s.model.n, s.model.k * math.pi
    z = to_complex(x)[0]
    weight = math.exp(kpi * np.sum(np.abs(z) ** 2) / 2)

    def hol(point):
        w = to_complex(point)[0]
        return s.values(point[None, :])[0] * math.exp(kpi * np.sum(np.abs(w) ** 2) / 2)

    D = np.empty((s.model.rank, n), dtype=complex)
    for j in range(n):
        ex = np.zeros(2 * n)
        ey = np.zeros(2 * n)
        ex[j] = h
        ey[n + j] = h
        dx = (hol(x + ex) - hol(x - ex)) / (2 * h)
        dy = (hol(x + ey) - hol(x - ey)) / (2 * h)
        D[:, j] = 0.5 * (dx - 1j * dy) - kpi * np.conj(z[j]) * hol(x)
    return D / weight


class TestCoherentSection:

    def test_single_state_profile(self):
        model = PrequantumModel(n=2, k=64)
        c = CoherentSection.single(model)
        u = np.linspace(0.0, 3.0, 13)
        X = np.zeros((u.size, 4))
        X[:, 1] = u / math.sqrt(model.k)
        expected = radial_profiles(model.n, u)
        assert np.allclose(c.norms(X), expected[0], atol=1e-12)
        assert np.allclose(c.derivative_norm(X) / math.sqrt(model.k), expected[1], atol=1e-10)
        assert np.allclose(c.hessian_norm(X) / model.k, expected[2], rtol=1e-10)

    def test_derivative_matches_holomorphic_gauge(self, rng):
        model = PrequantumModel(n=2, k=4, rank=2)
        s = _make_section(model, rng, spread=0.5)
        for x in rng.uniform(-0.3, 0.3, size=(3, 4)):
            exact = s.derivative(x[None, :])[0]
            assert np.allclose(exact, _holomorphic_gauge_derivative(s, x), atol=1e-6)

    def test_real_derivative_is_complex_linear(self, rng):
        model = PrequantumModel(n=2, k=16, rank=1)
        u = coherent_covariant_derivative(_make_section(model, rng), rng.uniform(-0.2, 0.2, 4))
        assert u.is_complex
        assert np.allclose(u.j_dst @ u.matrix, u.matrix @ u.j_src)

    def test_eval_at_center(self, line_model):
        c = CoherentSection.single(line_model, coeff=[0.5j])
        value, norm = coherent_eval(c, np.zeros(2))
        assert value[0] == pytest.approx(0.5j)
        assert norm == pytest.approx(0.5)

    def test_control_constants_of_single_state(self, line_model):
        c = CoherentSection.single(line_model)
        Y = SubmanifoldY.coordinate(1, 2, 0.25)
        control = c.control_constants(Y.embed(Y.grid(1.0 / 512)))
        assert control["norms"][0] == pytest.approx(1.0)
        assert control["norms"][1] == pytest.approx(math.sqrt(math.pi) * math.exp(-0.5), rel=1e-3)
        assert control["K"] == pytest.approx(2.0 * math.pi)
        assert control["dbar"] < ANALYTIC_TOL

    def test_coherent_sum_has_no_antilinear_part(self, rng):
        model = PrequantumModel(n=2, k=16, rank=2)
        s = _make_section(model, rng)
        X = rng.uniform(-0.5, 0.5, size=(50, 4))
        dbar = s.antilinear_norm(X)
        assert dbar.shape == (50,)
        assert np.max(dbar) < ANALYTIC_TOL
        assert np.max(s.derivative_norm(X)) > 1.0

    def test_dbar_of_conjugation(self):
        conjugation = np.diag([1.0, -1.0])
        rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
        stack = np.stack([conjugation, rotation, 2.0 * rotation + 0.5 * conjugation])
        assert np.allclose(dbar_norms(stack, 1, 1), [1.0, 0.0, 0.5])

    def test_config_roundtrip(self, rng):
        model = PrequantumModel(n=2, k=32, rank=2)
        s = _make_section(model, rng)
        back = CoherentSection.from_config(s.to_config())
        X = rng.uniform(-0.2, 0.2, size=(5, 4))
        assert back.model == model
        assert np.allclose(back.values(X), s.values(X))

    def test_add_terms_is_additive(self, rng, line_model):
        a = _make_section(line_model, rng)
        b = _make_section(line_model, rng)
        X = rng.uniform(-0.1, 0.1, size=(7, 2))
        both = a.add_terms(b.centers, b.coeffs)
        assert len(both) == len(a) + len(b)
        assert np.allclose(both.values(X), a.values(X) + b.values(X))

    def test_empty_section(self, line_model):
        s = CoherentSection(line_model)
        X = np.zeros((3, 2))
        assert np.all(s.norms(X) == 0)
        assert np.all(s.derivative_norm(X) == 0)


class TestConcentration:

    def test_envelopes_stable_across_k(self, line_model):
        report = concentration_check(line_model, 2, R=2.0)
        assert report["stable"]
        assert report["inverse_stable"]
        assert 0.0 <= report["dbar_max"] < ANALYTIC_TOL
        u = np.linspace(0.0, 6.0, 241)
        for m in range(3):
            envelope = np.polynomial.polynomial.polyval(u, report["envelopes"][m])
            assert np.all(envelope >= radial_profiles(1, u)[m] / np.exp(-math.pi * u ** 2 / 2) - 1e-9)

    def test_inverse_constants(self, line_model):
        report = concentration_check(line_model, 0, R=1.0)
        assert report["inverse_constants"][0] == pytest.approx(math.exp(math.pi / 2), rel=1e-6)

    def test_rejects_large_m(self, line_model):
        with pytest.raises(ValueError):
            concentration_check(line_model, 3, R=1.0)


class TestSeparatedSums:

    def _net_section(self, k, rng):
        model = PrequantumModel(n=1, k=k)
        Y = SubmanifoldY.coordinate(1, 1, 49.5 / math.sqrt(k))
        net = discretize_window(Y, k)
        coeffs = np.exp(2j * np.pi * rng.uniform(size=(len(net), 1))) * rng.uniform(0.5, 1.0, size=(len(net), 1))
        s = CoherentSection(model, to_complex(Y.embed(net.points)), coeffs)
        return s, Y.embed(Y.grid(0.25 / math.sqrt(k)))

    def test_constant_is_stable_across_k(self, rng):
        constants = []
        for k in (16, 64, 256):
            s, X = self._net_section(k, rng)
            assert len(s) == 100
            constants.append(sum_over_separated_set_bound(s, X)["C"])
        assert max(constants) <= 2.0 * min(constants)

    def test_rejects_close_centers(self, line_model):
        s = CoherentSection(line_model, [[0.0], [0.01]], [[1.0], [1.0]])
        with pytest.raises(NetSpacingError):
            sum_over_separated_set_bound(s, np.zeros((1, 2)))

    def test_rejects_large_coefficients(self, line_model):
        with pytest.raises(ValueError):
            sum_over_separated_set_bound(CoherentSection.single(line_model, coeff=[2.0]), np.zeros((1, 2)))


class TestTailMajorant:

    def test_against_brute_force(self):
        M1, C_rate, N = [1.0, 2.0, 0.5], 0.7, 3
        n = np.arange(N, 400)
        brute = np.sum(np.polynomial.polynomial.polyval(n, M1) * np.exp(-C_rate * n))
        assert tail_majorant(M1, C_rate, N) * math.exp(-C_rate * N) == pytest.approx(brute, rel=1e-10)

    def test_recurrence(self):
        coeffs = tail_majorant_coefficients([0.0, 1.0], 1.3)
        for n in range(5):
            lhs = np.polynomial.polynomial.polyval(n, coeffs) - math.exp(-1.3) * np.polynomial.polynomial.polyval(n + 1, coeffs)
            assert lhs == pytest.approx(n, abs=1e-12)

    def test_rate_must_be_positive(self):
        with pytest.raises(ValueError):
            tail_majorant([1.0], 0.0, 1)


class TestWindows:

    def test_frame_must_be_orthonormal(self):
        with pytest.raises(ValueError, match="orthonormal"):
            SubmanifoldY(np.array([[1.0], [1.0]]), [-1.0], [1.0])

    def test_grid_and_embed(self):
        Y = SubmanifoldY.coordinate(2, 2, 0.5)
        grid = Y.grid(0.25)
        assert grid.shape == (25, 2)
        assert np.allclose(grid.min(axis=0), -0.5) and np.allclose(grid.max(axis=0), 0.5)
        assert np.allclose(Y.embed([[0.1, 0.2]]), [[0.1, 0.2, 0.0, 0.0]])


class TestNets:

    def test_line_net(self):
        Y = SubmanifoldY.coordinate(1, 1, 1.0)
        net = discretize_window(Y, 256)
        assert len(net) == 33
        assert net.spacing == pytest.approx(1.0 / 16)

    def test_plane_net_covers(self):
        Y = SubmanifoldY.coordinate(2, 2, 0.5)
        net = discretize_window(Y, 64)
        grid = Y.grid(1.0 / 32)
        distance = np.min(np.linalg.norm(grid[:, None, :] - net.points[None, :, :], axis=2), axis=1)
        assert np.max(distance) <= 1.0 / 8 + 1e-12

    def test_covering_verified_off_the_candidate_grid(self):
        Y = SubmanifoldY.coordinate(2, 2, 0.5)
        net = discretize_window(Y, 64)
        checkpoints = covering_grid(Y, net.spacing)
        assert not np.any(np.all(np.isclose(checkpoints[:, None, :], Y.grid(net.spacing / 4)[None, :, :]), axis=2)[:-4])
        assert verify_covering(net, Y) <= net.spacing + 1e-12

    def test_net_missing_a_corner(self):
        Y = SubmanifoldY.coordinate(2, 2, 0.5)
        net = discretize_window(Y, 64)
        keep = np.linalg.norm(net.points - Y.lows[None, :], axis=1) > 1.5 * net.spacing
        holed = SeparatedNet(net.points[keep], net.spacing)
        with pytest.raises(ContractViolationError, match="covering radius") as excinfo:
            verify_covering(holed, Y)
        assert np.linalg.norm(excinfo.value.probe - Y.lows) < 0.5 * net.spacing

    def test_size_guard(self):
        with pytest.raises(NetTooLargeError):
            discretize_window(SubmanifoldY.coordinate(1, 1, 1e3), 1024)

    def test_packing_bound(self):
        Y = SubmanifoldY.coordinate(2, 2, 0.5)
        net = discretize_window(Y, 64)
        for radius in (0.1, 0.25, 0.6):
            assert packing_bound_check(net, [0.0, 0.0], radius)["ok"]

    def test_spacing_validated(self):
        with pytest.raises(NetSpacingError):
            SeparatedNet(np.array([[0.0], [0.05]]), 0.1)

    def test_frame_dump(self, results_dir):
        net = greedy_color(discretize_window(SubmanifoldY.coordinate(1, 1, 1.0), 256), 4)
        path = results_dir / "net.csv"
        net.dump_csv(path)
        df = pd.read_csv(path)
        assert list(df.columns) == ["t0", "color"]
        assert len(df) == len(net)


class TestGreedyColor:

    def test_line_uses_D_colors(self):
        net = discretize_window(SubmanifoldY.coordinate(1, 1, 1.0), 256)
        colored = greedy_color(net, 4)
        assert colored.n_colors == 4
        assert sum(len(c) for c in colored.color_classes()) == len(net)

    def test_plane_classes_are_separated(self):
        net = discretize_window(SubmanifoldY.coordinate(2, 2, 0.5), 64)
        colored = greedy_color(net, 3)
        for idx in colored.color_classes():
            points = colored.points[idx]
            if len(points) > 1:
                gaps = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
                assert np.min(gaps[np.triu_indices(len(points), 1)]) >= 3 * net.spacing - 1e-12

    def test_D_below_one(self):
        net = discretize_window(SubmanifoldY.coordinate(1, 1, 1.0), 256)
        with pytest.raises(PreconditionError):
            greedy_color(net, 0.5)


def test_real_complex_roundtrip(rng):
    Z = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    assert np.allclose(to_complex(to_real(Z)), Z)
