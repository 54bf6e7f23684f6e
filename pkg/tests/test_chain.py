import pytest
from hypothesis import given, settings, strategies as st

import spinpulse as sp
from spinpulse.chain import nearest_flip

CFG2 = sp.ChainConfig(n_qubits=2, larmor_spacing=10.0, base_larmor=100.0)


class TestBasisEnergy:
    def test_two_spin_ground_state(self):
        # -(100 + 110)/2 - 1/2
        assert sp.basis_energy(0, CFG2) == pytest.approx(-105.5, abs=1e-12)

    def test_single_excitations_split_by_larmor_spacing(self):
        e_spin0 = sp.basis_energy(0b01, CFG2)
        e_spin1 = sp.basis_energy(0b10, CFG2)
        assert e_spin1 - e_spin0 == pytest.approx(CFG2.larmor_spacing, abs=1e-12)

    def test_three_spin_all_flipped(self):
        cfg = sp.ChainConfig(n_qubits=3, larmor_spacing=10.0, base_larmor=100.0)
        total = sum(cfg.omega(k) for k in range(3))
        expected = 0.5 * total - cfg.coupling
        assert sp.basis_energy(0b111, cfg) == pytest.approx(expected, abs=1e-12)

    def test_state_size_check(self):
        with pytest.raises(ValueError):
            sp.basis_energy(1 << 2, CFG2)


class TestTransitionFrequency:
    def test_inner_spin_both_neighbours_flipped(self):
        cfg = sp.ChainConfig(n_qubits=4, larmor_spacing=10.0, base_larmor=100.0)
        state = sp.state_from_string("0101")
        # spin 1 has neighbours spin 2 ('1') and spin 0 ('1')
        assert sp.transition_frequency(state, 1, cfg) == pytest.approx(
            cfg.omega(1) - 2 * cfg.coupling, abs=1e-12
        )

    def test_end_spin_with_ground_neighbour(self):
        assert sp.transition_frequency(0, 0, CFG2) == pytest.approx(
            CFG2.omega(0) + CFG2.coupling, abs=1e-12
        )

    def test_inner_spin_opposite_neighbours(self):
        cfg = sp.ChainConfig(n_qubits=3, larmor_spacing=10.0, base_larmor=100.0)
        state = sp.state_from_string("100")
        # spin 1: neighbours spin 2 ('1') and spin 0 ('0')
        assert sp.transition_frequency(state, 1, cfg) == pytest.approx(
            cfg.omega(1), abs=1e-12
        )

    @given(state=st.integers(min_value=0, max_value=255), k=st.integers(0, 7))
    @settings(max_examples=80, deadline=None)
    def test_matches_energy_difference(self, state, k):
        cfg = sp.ChainConfig(n_qubits=8, larmor_spacing=17.0, base_larmor=300.0)
        direct = abs(
            sp.basis_energy(state ^ (1 << k), cfg) - sp.basis_energy(state, cfg)
        )
        assert sp.transition_frequency(state, k, cfg) == pytest.approx(
            direct, abs=1e-9
        )


class TestResonantFrequencyTable:
    def test_two_spin_table(self):
        table = sp.resonant_frequency_table(CFG2)
        expected = sorted(
            [CFG2.omega(0) - 1, CFG2.omega(0) + 1, CFG2.omega(1) - 1, CFG2.omega(1) + 1]
        )
        assert table == pytest.approx(expected)

    def test_three_spin_table_size(self):
        cfg = sp.ChainConfig(n_qubits=3, larmor_spacing=10.0)
        assert len(sp.resonant_frequency_table(cfg)) == 7

    @pytest.mark.parametrize("n", [2, 5, 11, 40])
    def test_size_is_3n_minus_2(self, n):
        cfg = sp.ChainConfig(n_qubits=n, larmor_spacing=10.0)
        assert len(sp.resonant_frequency_table(cfg)) == 3 * n - 2

    def test_all_positive_when_base_exceeds_twice_coupling(self):
        cfg = sp.ChainConfig(n_qubits=6, larmor_spacing=10.0, base_larmor=2.5)
        assert all(f > 0 for f in sp.resonant_frequency_table(cfg))


class TestClassifyTransition:
    CFG = sp.ChainConfig(n_qubits=8, larmor_spacing=100.0)

    def test_ground_state_near_resonant_at_inner_line(self):
        n = self.CFG.n_qubits
        cls = sp.classify_transition(0, self.CFG.omega(n - 2), self.CFG)
        assert cls.kind is sp.TransitionKind.NEAR_RESONANT
        assert cls.spin == n - 2
        assert cls.detuning == pytest.approx(2.0, abs=1e-9)

    def test_resonant_on_domain_state(self):
        n = self.CFG.n_qubits
        state = sp.state_from_string("11100000")
        cls = sp.classify_transition(state, self.CFG.omega(n - 2) - 2.0, self.CFG)
        assert cls.kind is sp.TransitionKind.RESONANT
        assert cls.spin == n - 2

    def test_ground_state_double_detuned(self):
        n = self.CFG.n_qubits
        cls = sp.classify_transition(0, self.CFG.omega(n - 2) - 2.0, self.CFG)
        assert cls.kind is sp.TransitionKind.NEAR_RESONANT
        assert cls.detuning == pytest.approx(4.0, abs=1e-9)

    def test_far_frequency_is_non_resonant(self):
        cls = sp.classify_transition(0, self.CFG.omega(3) + 50.0, self.CFG)
        assert cls.kind is sp.TransitionKind.NON_RESONANT

    @given(state=st.integers(min_value=0, max_value=2**8 - 1))
    @settings(max_examples=60, deadline=None)
    def test_detunings_from_table_are_multiples_of_coupling(self, state):
        # every table frequency lies within 4J of its own spin's line for any
        # neighbour configuration, so no table drive is ever non-resonant
        cfg = self.CFG
        for freq in sp.resonant_frequency_table(cfg):
            cls = sp.classify_transition(state, freq, cfg)
            assert cls.kind is not sp.TransitionKind.NON_RESONANT
            assert min(
                abs(abs(cls.detuning) - v) for v in (0.0, 2.0, 4.0)
            ) < 1e-9

    def test_ambiguous_window_raises(self):
        cfg = sp.ChainConfig(n_qubits=4, larmor_spacing=6.0, base_larmor=60.0)
        # drive between the spin-1 and spin-0 lines: both fall within 4J
        with pytest.raises(sp.AmbiguousTransitionError):
            nearest_flip(0, cfg.omega(1) - 2.0, cfg)


class TestChainConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            sp.ChainConfig(n_qubits=0, larmor_spacing=10.0)
        with pytest.raises(ValueError):
            sp.ChainConfig(n_qubits=4, larmor_spacing=-1.0)
        with pytest.raises(ValueError):
            sp.ChainConfig(n_qubits=4, larmor_spacing=10.0, cutoff=2.0)

    def test_default_base_larmor(self):
        cfg = sp.ChainConfig(n_qubits=4, larmor_spacing=10.0)
        assert cfg.base_larmor == 100.0
        assert cfg.omega(3) == pytest.approx(130.0)

    def test_state_string_round_trip(self):
        s = sp.state_from_string("10100")
        assert s == 0b10100
        assert sp.state_to_string(s, 5) == "10100"
