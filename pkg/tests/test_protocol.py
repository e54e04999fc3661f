"""
Tests for protocol module
What to learn here: Testing a stochastic protocol deterministically through
forced outcomes, and using closed forms and exact simulation as each other's
oracles.
"""

import pytest
import numpy as np

from src.chain_models import ChainModel, ChainSpec, critical_time
from src.dense_engine import evolve
from src.errors import InvalidStateError, MeasurementError, UnsupportedModelError
from src.protocol import (
    MediumSpec,
    candidate_rules,
    closed_form_mixed,
    closed_form_pure,
    correction_gate,
    mirror_inversion,
    run_protocol,
    run_unprojected_N,
    select_correction_rule,
    spin_n_basis,
)
from src.quantum_core import (
    X,
    DensityMatrix,
    SingleQubitState,
    StateVector,
    bloch_state,
    entropy,
    ket,
    partial_trace,
    random_mixed_state,
    random_pure_state,
    state_fidelity,
    tensor,
    trace_distance,
)

OUTCOME_PAIRS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def ising(n):
    return ChainSpec(model=ChainModel.ISING_ENGINEERED, n_sites=n)


def xx(n):
    return ChainSpec(model=ChainModel.XX_ENGINEERED, n_sites=n)


def random_bits(rng, m):
    return "".join(rng.choice(["0", "1"], size=m))


class TestMediumSpec:
    """Medium recipes"""

    def test_length_mismatch(self):
        """Product media must cover the N-2 medium sites"""
        with pytest.raises(InvalidStateError):
            MediumSpec.product_z("01").build(ising(5))

    def test_invalid_labels(self):
        """Bitstrings and sign strings are checked"""
        with pytest.raises(InvalidStateError):
            MediumSpec.product_z("0a")
        with pytest.raises(InvalidStateError):
            MediumSpec.x_eigenstates("+0")

    def test_two_site_chain_has_no_medium(self):
        """N=2 builds no medium state"""
        assert MediumSpec.maximally_mixed().build(ising(2)) is None
        assert MediumSpec.product_z("").build(xx(2)) is None

    def test_variants(self):
        """Every variant yields an (N-2)-qubit state"""
        spec = ising(5)
        media = [
            MediumSpec.product_z("010"),
            MediumSpec.x_eigenstates("+-+"),
            MediumSpec.product_states([SingleQubitState.from_state(bloch_state(0.3 * k)) for k in range(3)]),
            MediumSpec.thermal(0.5),
            MediumSpec.maximally_mixed(),
            MediumSpec.random_pure(seed=1),
            MediumSpec.random_mixed(seed=1, rank=3),
        ]
        for medium in media:
            assert medium.build(spec).n_qubits == 3

    def test_random_media_replay(self):
        """Seeded media are reproducible"""
        a = MediumSpec.random_mixed(seed=4).build(ising(5)).matrix
        b = MediumSpec.random_mixed(seed=4).build(ising(5)).matrix
        np.testing.assert_array_equal(a, b)


class TestCorrectionRule:
    """Correction selection"""

    def test_ising_rule(self):
        """Identity for product +1, X for product -1"""
        rule = select_correction_rule(ising(4))
        assert (rule.on_plus, rule.on_minus) == ("identity", "X")

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_xx_odd_uses_nominal_rule(self, n):
        """For odd N the nominal T^N rule validates"""
        assert select_correction_rule(xx(n)).source == "nominal"

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_xx_even_uses_closed_form_rule(self, n):
        """For even N the -1 branch needs T^(N+2)"""
        assert select_correction_rule(xx(n)).source == "closed-form"

    def test_rules_agree_for_odd_n(self):
        """(T^N)^dag = T^(N+2) when N is odd"""
        for n in (3, 5, 9):
            np.testing.assert_allclose(correction_gate("(T^N)^dag", n), correction_gate("T^(N+2)", n))

    def test_rule_is_total(self):
        """Every candidate maps both outcome products"""
        for rule in candidate_rules(xx(4)):
            assert rule.gate(1).shape == (2, 2) and rule.gate(-1).shape == (2, 2)
            with pytest.raises(InvalidStateError):
                rule.label(0)

    def test_xx_basis_degenerates_to_x(self):
        """|±_N> is the X basis when N = 0 mod 4"""
        plus, minus = spin_n_basis(xx(4))
        np.testing.assert_allclose(plus, np.array([1, 1]) / np.sqrt(2))
        np.testing.assert_allclose(minus, np.array([1, -1]) / np.sqrt(2))


class TestRunProtocol:
    """Full protocol runs"""

    @pytest.mark.parametrize("outcomes", OUTCOME_PAIRS)
    def test_ising_product_medium(self, outcomes):
        """N=5, medium |000>, input (|0>+i|1>)/sqrt(2): unit fidelity"""
        psi = bloch_state(np.pi / 2, np.pi / 2)
        run = run_protocol(ising(5), psi, MediumSpec.product_z("000"), n_outcome=outcomes[0], m1_outcome=outcomes[1])
        assert run.fidelity == pytest.approx(1.0, abs=1e-9)
        assert run.outcome_product == outcomes[0] * outcomes[1]

    def test_ising_uncorrected_minus_branch(self):
        """Without correction the -1 branch delivers X rho X"""
        psi = bloch_state(1.2, 0.4)
        run = run_protocol(ising(4), psi, MediumSpec.product_z("01"), n_outcome=1, m1_outcome=-1, apply_correction=False)
        expected = X @ psi.to_density().matrix @ X
        np.testing.assert_allclose(run.output.matrix, expected, atol=1e-9)

    @pytest.mark.parametrize("n", [4, 5])
    def test_xx_maximally_mixed_medium(self, n):
        """50 Haar-random inputs through a maximally mixed medium"""
        spec = xx(n)
        for k in range(50):
            psi = random_pure_state(1, seed=100 + k)
            outcomes = OUTCOME_PAIRS[k % 4]
            run = run_protocol(spec, psi, MediumSpec.maximally_mixed(), n_outcome=outcomes[0], m1_outcome=outcomes[1])
            assert run.fidelity == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("spec", [ising(4), xx(5), xx(6)])
    def test_outcome_product_sufficiency(self, spec):
        """(+1,+1) and (-1,-1) give the same output, as do (+1,-1) and (-1,+1)"""
        psi = random_pure_state(1, seed=8)
        medium = MediumSpec.random_mixed(seed=3)
        out = {
            pair: run_protocol(spec, psi, medium, n_outcome=pair[0], m1_outcome=pair[1]).output.matrix
            for pair in OUTCOME_PAIRS
        }
        np.testing.assert_allclose(out[(1, 1)], out[(-1, -1)], atol=1e-10)
        np.testing.assert_allclose(out[(1, -1)], out[(-1, 1)], atol=1e-10)

    def test_mixed_input(self):
        """Mixed inputs are transferred with unit Uhlmann fidelity"""
        rho = random_mixed_state(1, rank=2, seed=21)
        run = run_protocol(xx(3), rho, MediumSpec.thermal(2.0), n_outcome=1, m1_outcome=-1)
        assert run.fidelity == pytest.approx(1.0, abs=1e-9)

    def test_sampled_outcomes_replay(self):
        """Sampling with a seed is reproducible"""
        psi = bloch_state(0.9, 0.1)
        a = run_protocol(ising(4), psi, MediumSpec.maximally_mixed(), seed=77)
        b = run_protocol(ising(4), psi, MediumSpec.maximally_mixed(), seed=77)
        assert (a.n_projection_outcome, a.first_spin_outcome) == (b.n_projection_outcome, b.first_spin_outcome)
        assert a.fidelity == pytest.approx(1.0, abs=1e-9)

    def test_forced_impossible_projection(self):
        """Projecting a known |0> spin N onto |1> is impossible"""
        with pytest.raises(MeasurementError):
            run_protocol(ising(3), ket("0"), MediumSpec.product_z("0"), n_outcome=-1, m1_outcome=1, spin_n_prior=ket("0"))

    def test_record(self):
        """Run records carry version and conventions"""
        run = run_protocol(xx(4), ket("+"), MediumSpec.maximally_mixed(), n_outcome=1, m1_outcome=1, seed=5)
        record = run.to_record()
        assert record["version"]
        assert record["conventions"]["correction_rule"] == "closed-form"
        assert record["outcome_product"] == 1
        assert record["seed"] == 5

    def test_homogeneous_needs_time(self):
        """The homogeneous chain has no default time"""
        spec = ChainSpec(model=ChainModel.XX_HOMOGENEOUS, n_sites=4, end_coupling_ratio=0.7)
        with pytest.raises(UnsupportedModelError):
            run_protocol(spec, ket("0"), MediumSpec.maximally_mixed(), n_outcome=1, m1_outcome=1)

    @pytest.mark.slow
    @pytest.mark.parametrize("model", [ChainModel.ISING_ENGINEERED, ChainModel.XX_ENGINEERED])
    def test_unit_fidelity_universality(self, model):
        """All media, N = 3..8, pure and mixed inputs, both outcome products"""
        rng = np.random.default_rng(99)
        for n in range(3, 9):
            spec = ChainSpec(model=model, n_sites=n)
            media = [
                MediumSpec.product_z(random_bits(rng, n - 2)),
                MediumSpec.x_eigenstates("".join(rng.choice(["+", "-"], size=n - 2))),
                MediumSpec.thermal(0.0),
                MediumSpec.thermal(0.5),
                MediumSpec.thermal(2.0),
                MediumSpec.maximally_mixed(),
                MediumSpec.random_pure(seed=int(rng.integers(1000))),
                MediumSpec.random_mixed(seed=int(rng.integers(1000))),
            ]
            inputs = [random_pure_state(1, seed=int(s)) for s in rng.integers(10 ** 6, size=20)]
            inputs += [random_mixed_state(1, seed=int(s)) for s in rng.integers(10 ** 6, size=5)]
            for medium in media:
                for state in inputs:
                    for m1 in (1, -1):
                        run = run_protocol(spec, state, medium, n_outcome=1, m1_outcome=m1)
                        assert run.fidelity == pytest.approx(1.0, abs=1e-9)


class TestClosedForms:
    """Closed-form output states against dense evolution"""

    @pytest.mark.parametrize("n", range(3, 9))
    def test_pure_form_matches_evolution(self, n):
        """Infidelity below 1e-9 for random (psi, bitstring) pairs"""
        spec = ising(n)
        rng = np.random.default_rng(n)
        for k in range(20):
            psi = random_pure_state(1, seed=1000 * n + k)
            bits = random_bits(rng, n - 2)
            evolved = evolve(spec, critical_time(spec), tensor(psi, ket(bits), ket("0")))
            assert 1 - state_fidelity(closed_form_pure(spec, psi, bits), evolved) < 1e-9

    def test_pure_form_two_sites(self):
        """N=2 has no medium"""
        spec = ising(2)
        psi = random_pure_state(1, seed=2)
        evolved = evolve(spec, critical_time(spec), tensor(psi, ket("0")))
        assert 1 - state_fidelity(closed_form_pure(spec, psi, ""), evolved) < 1e-9

    def test_pure_form_any_medium_vector(self):
        """Linearity: an arbitrary pure medium works too"""
        spec = ising(5)
        psi = random_pure_state(1, seed=3)
        medium = random_pure_state(3, seed=4)
        evolved = evolve(spec, critical_time(spec), tensor(psi, medium, ket("0")))
        assert 1 - state_fidelity(closed_form_pure(spec, psi, medium), evolved) < 1e-9

    def test_plus_input_factorizes_spin_n(self):
        """psi = |+>: spin N ends in |+>"""
        spec = ising(5)
        state = closed_form_pure(spec, ket("+"), "011")
        assert state_fidelity(partial_trace(state, [5]), ket("+")) == pytest.approx(1.0, abs=1e-9)

    def test_spin1_entropy_is_maximal(self):
        """<X> = 0 gives a one-bit spin-1 entropy"""
        state = closed_form_pure(ising(4), ket("0"), "10")
        assert entropy(partial_trace(state, [1])) == pytest.approx(1.0, abs=1e-9)

    def test_pure_form_rejects_xx(self):
        """The pure closed form belongs to the Ising chain"""
        with pytest.raises(UnsupportedModelError):
            closed_form_pure(xx(4), ket("0"), "00")

    @pytest.mark.parametrize("spec", [ising(4), ising(5), ising(6), xx(4), xx(5)])
    def test_mixed_form_matches_evolution(self, spec):
        """Trace distance below 1e-9 for random mixed media and inputs"""
        n = spec.n_sites
        pre = StateVector(spin_n_basis(spec)[0])
        for k in range(10):
            rho_in = random_mixed_state(1, seed=500 + k)
            medium = random_mixed_state(n - 2, rank=3, seed=600 + k)
            evolved = evolve(spec, critical_time(spec), tensor(rho_in, medium, pre))
            closed = closed_form_mixed(spec, rho_in, medium)
            assert np.trace(closed.matrix).real == pytest.approx(1.0, abs=1e-10)
            assert trace_distance(closed, evolved) < 1e-9

    @pytest.mark.parametrize("spec", [ising(2), xx(2), xx(3)])
    def test_mixed_form_short_chains(self, spec):
        """Closed forms hold down to the shortest chains"""
        n = spec.n_sites
        pre = StateVector(spin_n_basis(spec)[0])
        rho_in = random_mixed_state(1, seed=31)
        medium = random_mixed_state(n - 2, seed=32) if n > 2 else None
        factors = [rho_in] + ([medium] if medium is not None else []) + [pre]
        evolved = evolve(spec, critical_time(spec), tensor(*factors))
        assert trace_distance(closed_form_mixed(spec, rho_in, medium), evolved) < 1e-9


class TestUnprojected:
    """Spin N left unprojected"""

    def test_pure_zero(self):
        """rho_N = |0><0| reduces to the standard protocol"""
        psi = random_pure_state(1, seed=12)
        _, fidelity = run_unprojected_N(ising(4), psi, MediumSpec.product_z("00"), ket("0").to_density(), m1_outcome=-1)
        assert fidelity == pytest.approx(1.0, abs=1e-9)

    def test_wrong_branch(self):
        """p00 = 0 and psi = |0> delivers |1>"""
        output, fidelity = run_unprojected_N(ising(4), ket("0"), MediumSpec.product_z("00"), ket("1"), m1_outcome=1)
        assert fidelity == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(output.matrix, ket("1").to_density().matrix, atol=1e-9)

    def test_coherence_independence(self):
        """Fidelity does not depend on the coherence of rho_N"""
        psi = random_pure_state(1, seed=13)
        p00 = 0.3
        results = []
        for gamma in (0.0, np.sqrt(p00 * (1 - p00)) * 0.999):
            rho_n = DensityMatrix(np.array([[p00, gamma], [gamma, 1 - p00]]))
            results.append(run_unprojected_N(ising(4), psi, MediumSpec.product_z("01"), rho_n, m1_outcome=1)[1])
        assert abs(results[0] - results[1]) < 1e-10

    def test_xx_unsupported(self):
        """Only defined for the Ising chain"""
        with pytest.raises(UnsupportedModelError):
            run_unprojected_N(xx(4), ket("0"), MediumSpec.product_z("00"), ket("0"))


class TestMirrorInversion:
    """Medium reversal"""

    def test_bitstrings(self):
        """Palindromes are fixed, |01> -> |10>"""
        assert mirror_inversion("0110") == "0110"
        assert mirror_inversion("01") == "10"

    def test_state_vector(self):
        """Reversal of a product ket"""
        np.testing.assert_allclose(mirror_inversion(ket("01")).amplitudes, ket("10").amplitudes)

    def test_involution(self):
        """Applying twice is the identity"""
        rho = random_mixed_state(3, rank=4, seed=6)
        np.testing.assert_allclose(mirror_inversion(mirror_inversion(rho)).matrix, rho.matrix, atol=1e-14)

    def test_density_matches_vector(self):
        """Reversing |psi><psi| equals the projector of the reversed psi"""
        psi = random_pure_state(3, seed=7)
        np.testing.assert_allclose(
            mirror_inversion(psi.to_density()).matrix, mirror_inversion(psi).to_density().matrix, atol=1e-14
        )


if __name__ == "__main__":
    pytest.main([__file__])
