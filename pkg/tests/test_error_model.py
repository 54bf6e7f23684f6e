import math

import numpy as np
import pytest

import spinpulse as sp


class TestEpsilon:
    def test_reference_value(self):
        assert sp.epsilon(0.15, 2.0, math.pi / 0.15) == pytest.approx(0.0039, abs=1e-4)

    def test_vanishes_on_2pik_condition(self):
        for k in (1, 4, 9):
            rabi = sp.rabi_for_2pik(2.0, k)
            assert sp.epsilon(rabi, 2.0, math.pi / rabi) < 1e-12

    def test_weak_drive_limit(self):
        tau = 11.0
        values = [sp.epsilon(w, 2.0, tau) for w in (1e-2, 1e-3, 1e-4)]
        assert values[0] < 1e-4
        assert values[1] / values[0] == pytest.approx(1e-2, rel=0.05)
        assert values[2] / values[1] == pytest.approx(1e-2, rel=0.05)

    def test_bounded_by_one(self):
        for rabi, delta, tau in ((0.5, 0.1, 3.0), (2.0, 0.0, 0.7), (0.1, 4.0, 100.0)):
            assert 0.0 <= sp.epsilon(rabi, delta, tau) <= 1.0


class TestMu:
    def test_base_value(self):
        assert sp.mu_base(0.1, 100.0) == pytest.approx(2.5e-7, rel=1e-12)

    def test_bulk_series_limit(self):
        # deep in a long chain the inverse-square sum approaches pi^2/3
        mu = sp.mu_base(0.1, 100.0)
        bulk = sp.mu_k(0.1, 100.0, 2000, 4001)
        assert bulk == pytest.approx(mu * math.pi**2 / 3.0, rel=1e-3)

    def test_two_spin_end(self):
        assert sp.mu_k(0.3, 50.0, 0, 2) == pytest.approx(sp.mu_base(0.3, 50.0))

    def test_leak_distance_examples(self):
        mu = sp.mu_base(0.2, 80.0)
        assert sp.nonresonant_leak(0.2, 80.0, 1) == pytest.approx(mu)
        assert sp.nonresonant_leak(0.2, 80.0, 2) == pytest.approx(mu / 4.0)
        total = sum(sp.nonresonant_leak(0.2, 80.0, d) for d in range(1, 6))
        assert total == pytest.approx(sp.mu_k(0.2, 80.0, 0, 6), rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            sp.mu_base(0.1, 0.0)
        with pytest.raises(ValueError):
            sp.nonresonant_leak(0.1, 10.0, 0)
        with pytest.raises(ValueError):
            sp.mu_k(0.1, 10.0, 7, 6)


class TestTotalError:
    def test_vanishes_without_either_channel(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=1e9)
        rabi = sp.rabi_for_2pik(2.0, 8)
        budget = sp.total_error(cfg, rabi)
        assert budget.epsilon < 1e-12
        assert budget.probability < 1e-12

    def test_near_resonant_dominated_regime(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=1e6)
        rabi = 0.125  # close to but off the 2pik point
        budget = sp.total_error(cfg, rabi)
        m_eps = budget.m_pulses * budget.epsilon
        assert budget.probability == pytest.approx(m_eps / 2.0, rel=0.01)

    def test_reduces_to_first_order_law_without_leakage(self):
        cfg = sp.ChainConfig(n_qubits=12, larmor_spacing=1e9)
        budget = sp.total_error(cfg, 0.1247)
        m, eps = budget.m_pulses, budget.epsilon
        exact_near = 0.5 * (1.0 - (1.0 - eps) ** m)
        assert budget.probability == pytest.approx(exact_near, rel=1e-9)
        assert abs(budget.probability - 0.5 * m * eps) <= (m * eps) ** 2

    def test_monotone_in_spacing(self):
        rabi = 0.2
        probs = [
            sp.total_error(
                sp.ChainConfig(n_qubits=10, larmor_spacing=dw), rabi
            ).probability
            for dw in (10.0, 30.0, 100.0, 300.0, 1000.0)
        ]
        assert all(a >= b for a, b in zip(probs, probs[1:]))

    def test_formula_power_law_in_spacing(self):
        rabi = sp.rabi_for_2pik(2.0, 8)
        spacings = [50.0 * 2.0**i for i in range(6)]
        probs = [
            sp.total_error(
                sp.ChainConfig(n_qubits=10, larmor_spacing=dw), rabi
            ).probability
            for dw in spacings
        ]
        slope = np.polyfit(np.log(spacings), np.log(probs), 1)[0]
        assert slope == pytest.approx(-2.0, abs=1e-3)

    def test_needs_three_qubits(self):
        with pytest.raises(ValueError):
            sp.total_error(sp.ChainConfig(n_qubits=2, larmor_spacing=10.0), 0.1)


class TestSweepThresholdRegions:
    def test_unit_threshold_accepts_everything(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=100.0)
        region = sp.sweep_threshold_regions(
            cfg, [50.0, 100.0], [0.1, 0.15, 0.2], threshold=1.0
        )
        assert region.accepted.all()
        assert region.accepted_cells() == 6
        assert all(len(row) == 1 for row in region.intervals)

    def test_accepted_widths_grow_with_threshold(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=100.0)
        rabis = [0.19 + 2e-4 * i for i in range(120)]
        tight = sp.sweep_threshold_regions(cfg, [300.0], rabis, threshold=1e-5)
        loose = sp.sweep_threshold_regions(cfg, [300.0], rabis, threshold=1e-4)
        assert loose.accepted_cells() > tight.accepted_cells()

    def test_longer_chain_accepts_less(self):
        rabis = [0.19 + 5e-4 * i for i in range(40)]
        spacings = [200.0, 400.0, 800.0]
        small = sp.sweep_threshold_regions(
            sp.ChainConfig(n_qubits=10, larmor_spacing=200.0),
            spacings,
            rabis,
            threshold=1e-5,
        )
        large = sp.sweep_threshold_regions(
            sp.ChainConfig(n_qubits=1000, larmor_spacing=200.0),
            spacings,
            rabis,
            threshold=1e-5,
        )
        assert large.accepted_cells() < small.accepted_cells()

    def test_intervals_anchor_on_2pik_points(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=100.0)
        step = 2e-4
        rabis = [0.19 + step * i for i in range(120)]
        region = sp.sweep_threshold_regions(cfg, [500.0], rabis, threshold=1e-5)
        intervals = region.intervals[0]
        assert intervals
        for iv in intervals:
            assert iv.anchor_k == 5
            assert iv.rabi_low - step <= iv.anchor_rabi <= iv.rabi_high + step

    def test_csv_shape(self):
        cfg = sp.ChainConfig(n_qubits=10, larmor_spacing=100.0)
        region = sp.sweep_threshold_regions(cfg, [100.0], [0.1, 0.2], threshold=1e-5)
        lines = region.to_csv().strip().split("\n")
        assert lines[0] == "larmor_spacing,rabi,error_probability,accepted"
        assert len(lines) == 3
