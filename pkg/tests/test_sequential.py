import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsh_seq.errors import DimensionError, NumericalError, ProjectorError, ZeroProbabilityCollapse
from chsh_seq.linalg import PAULI_I, PAULI_Z
from chsh_seq.observables import from_spin_direction, lift, pauli, random_dichotomic
from chsh_seq.sequential import (
    QuantumState,
    basis_state,
    born_probability,
    collapse,
    conditional_probability,
    marginal_deviation,
    marginal_laws_report,
    mixed_joint_distribution,
    sequential_probability,
    singlet_state,
)

import oracles
from conftest import random_state

seeds = st.integers(min_value=0, max_value=2**32 - 1)
angles = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False)

S = 1 / math.sqrt(2)


def as_lists(obs):
    return {1: obs.proj_plus.tolist(), -1: obs.proj_minus.tolist()}


class TestQuantumState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            QuantumState(np.array([1.0, 1.0]))

    def test_accepts_within_tolerance(self):
        QuantumState(np.array([1.0 + 5e-11, 0.0]))

    def test_rejects_nan(self):
        with pytest.raises(NumericalError):
            QuantumState(np.array([np.nan, 0]))

    def test_singlet_layout(self):
        assert np.allclose(singlet_state().amplitudes, [0, S, -S, 0], atol=1e-16)


class TestBornAndCollapse:
    def test_basis_born(self):
        psi = basis_state(2, 0)
        assert born_probability(psi, pauli("z").proj_plus) == 1.0
        assert born_probability(psi, pauli("x").proj_plus) == pytest.approx(0.5, abs=1e-15)

    def test_singlet_born_values(self):
        # frozen from the pure-python oracle
        psi = singlet_state()
        zz_pp = np.kron(pauli("z").proj_plus, pauli("z").proj_plus)
        zz_pm = np.kron(pauli("z").proj_plus, pauli("z").proj_minus)
        assert born_probability(psi, zz_pp) == pytest.approx(0.0, abs=1e-15)
        assert born_probability(psi, zz_pm) == pytest.approx(0.5, abs=1e-15)
        assert born_probability(psi, lift(pauli("z"), "left", 2).proj_plus) == pytest.approx(0.5, abs=1e-15)

    def test_non_projector_rejected(self):
        with pytest.raises(ProjectorError):
            born_probability(basis_state(2), 0.5 * PAULI_I)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            born_probability(basis_state(2), np.eye(4))

    def test_collapse_onto_x(self):
        phi = collapse(basis_state(2, 0), pauli("x").proj_plus)
        assert np.allclose(phi.amplitudes, [S, S], atol=1e-15)

    def test_collapse_zero_probability(self):
        with pytest.raises(ZeroProbabilityCollapse):
            collapse(basis_state(2, 0), pauli("z").proj_minus)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_collapse_is_idempotent(self, seed):
        psi = random_state(seed, 4)
        p = random_dichotomic(seed, 4).proj_plus
        once = collapse(psi, p)
        assert abs(np.linalg.norm(once.amplitudes) - 1) <= 1e-12
        twice = collapse(once, p)
        assert np.allclose(once.amplitudes, twice.amplitudes, atol=1e-12)


class TestSequential:
    def test_z_then_x(self):
        psi = basis_state(2, 0)
        assert sequential_probability(psi, pauli("z"), 1, pauli("x"), 1) == pytest.approx(0.5, abs=1e-15)

    def test_impossible_first_outcome(self):
        psi = basis_state(2, 0)
        assert sequential_probability(psi, pauli("z"), -1, pauli("x"), 1) == 0.0
        assert conditional_probability(psi, pauli("z"), -1, pauli("x"), 1) is None

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, i=st.sampled_from([1, -1]), j=st.sampled_from([1, -1]))
    def test_sequential_equals_born_times_conditional(self, seed, i, j):
        psi = random_state(seed, 3)
        a, b = random_dichotomic((seed, 0), 3), random_dichotomic((seed, 1), 3)
        joint = sequential_probability(psi, a, i, b, j)
        cond = conditional_probability(psi, a, i, b, j)
        assert joint == pytest.approx(born_probability(psi, a.projector(i)) * cond, abs=1e-12)


class TestMixedJoint:
    def test_qubit_z_x(self):
        d = mixed_joint_distribution(basis_state(2, 0), pauli("z"), pauli("x"))
        assert np.allclose(d.probs, [[0.375, 0.375], [0.125, 0.125]], atol=1e-15)
        assert d.as_dict() == pytest.approx({"++": 0.375, "+-": 0.375, "-+": 0.125, "--": 0.125}, abs=1e-15)
        assert d.labels == ("Z", "X")

    def test_singlet_matches_branch_tree(self):
        psi = singlet_state()
        a = lift(from_spin_direction(0.0), "left", 2)
        b = lift(from_spin_direction(math.pi / 4), "right", 2)
        d = mixed_joint_distribution(psi, a, b)
        ref = oracles.branch_tree_joint(psi.amplitudes.tolist(), as_lists(a), as_lists(b))
        for (i, j), p in ref.items():
            assert d.prob(i, j) == pytest.approx(p, abs=1e-14)
        assert d.correlation() == pytest.approx(oracles.singlet_correlation(0.0, math.pi / 4), abs=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, dim=st.sampled_from([2, 3, 4]))
    def test_matches_branch_tree_oracle(self, seed, dim):
        psi = random_state(seed, dim)
        a, b = random_dichotomic((seed, 0), dim), random_dichotomic((seed, 1), dim)
        d = mixed_joint_distribution(psi, a, b)
        ref = oracles.branch_tree_joint(psi.amplitudes.tolist(), as_lists(a), as_lists(b))
        for (i, j), p in ref.items():
            assert d.prob(i, j) == pytest.approx(p, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, dim=st.sampled_from([2, 3, 4]))
    def test_normalized_and_order_symmetric(self, seed, dim):
        psi = random_state(seed, dim)
        a, b = random_dichotomic((seed, 0), dim), random_dichotomic((seed, 1), dim)
        ab = mixed_joint_distribution(psi, a, b).probs
        ba = mixed_joint_distribution(psi, b, a).probs
        assert abs(ab.sum() - 1) <= 1e-12
        assert np.all(ab >= 0)
        assert np.allclose(ab, ba.T, atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_commuting_pair_reduces_to_born(self, seed):
        psi = random_state(seed, 4)
        a = lift(random_dichotomic((seed, 0), 2), "left", 2)
        b = lift(random_dichotomic((seed, 1), 2), "right", 2)
        d = mixed_joint_distribution(psi, a, b)
        for i in (1, -1):
            for j in (1, -1):
                born = born_probability(psi, a.projector(i) @ b.projector(j))
                assert d.prob(i, j) == pytest.approx(born, abs=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            mixed_joint_distribution(basis_state(2), pauli("z"), lift(pauli("x"), "left", 2))


class TestMarginals:
    def test_qubit_alice_deviation(self):
        psi = basis_state(2, 0)
        entries = marginal_deviation(psi, pauli("z"), pauli("x"), pauli("z"))
        assert entries[0].value == pytest.approx(-0.25, abs=1e-12)
        assert entries[1].value == pytest.approx(0.25, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_product_form_no_signalling(self, seed):
        psi = random_state(seed, 4)
        obs = [lift(random_dichotomic((seed, k), 2), "left" if k < 2 else "right", 2) for k in range(4)]
        report = marginal_laws_report(psi, *obs)
        assert len(report.entries) == 8
        assert report.max_abs_deviation <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_plus_minus_deviations_cancel(self, seed):
        psi = random_state(seed, 3)
        a, b, bp = (random_dichotomic((seed, k), 3) for k in range(3))
        plus, minus = marginal_deviation(psi, a, b, bp)
        assert plus.value + minus.value == pytest.approx(0.0, abs=1e-12)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            marginal_deviation(basis_state(2), pauli("z"), pauli("x"), pauli("z"), side="Eve")


def test_projector_sign_validation():
    with pytest.raises(ValueError):
        sequential_probability(basis_state(2), pauli("z"), 0, pauli("x"), 1)


def test_z_projectors_are_diagonal():
    assert np.array_equal(pauli("z").proj_plus - pauli("z").proj_minus, PAULI_Z)
