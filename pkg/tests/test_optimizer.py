import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsh_seq import linalg
from chsh_seq.chsh import MIXED_SEQUENTIAL_BOUND, TSIRELSON_BOUND, chsh_value
from chsh_seq.errors import ParameterError
from chsh_seq.observables import Signature
from chsh_seq.optimizer import (
    Constraint,
    SearchSpace,
    build_observables,
    objective,
    pattern_search,
    search,
    site_dims,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestSearchSpace:
    @pytest.mark.parametrize(
        "dim, constraint, count",
        [
            (2, "free", 16),
            (4, "free", 64),
            (4, "product_form", 16),
            (6, "product_form", 4 + 4 + 9 + 9),
            (4, "a_equals_a_prime", 48),
            (4, "primes_identity", 32),
        ],
    )
    def test_parameter_count(self, dim, constraint, count):
        assert SearchSpace(dim, constraint).parameter_count == count

    def test_site_dims(self):
        assert site_dims(4) == (2, 2)
        assert site_dims(9) == (3, 3)
        assert site_dims(6) == (2, 3)
        with pytest.raises(ParameterError):
            site_dims(3)

    def test_dim_cap(self):
        with pytest.raises(ParameterError):
            SearchSpace(9)
        SearchSpace(9, max_dim=9)

    def test_bad_constraint(self):
        with pytest.raises(ValueError):
            SearchSpace(2, "nonsense")

    def test_signature_mismatch(self):
        with pytest.raises(ParameterError):
            SearchSpace(4, signatures=(Signature(1, 1),) * 4)


class TestBuildObservables:
    def test_zero_params_give_diagonal(self):
        space = SearchSpace(3)
        for obs in build_observables(np.zeros(space.parameter_count), space):
            assert np.allclose(obs.operator, np.diag([1, 1, -1]), atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            build_observables(np.zeros(3), SearchSpace(2))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, constraint=st.sampled_from(list(Constraint)))
    def test_dichotomic(self, seed, constraint):
        space = SearchSpace(4, constraint)
        x = np.random.default_rng(seed).standard_normal(space.parameter_count)
        for obs in build_observables(x, space):
            assert np.max(np.abs(obs.operator @ obs.operator - np.eye(4))) <= 1e-10

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_product_form_commutes_across_sites(self, seed):
        space = SearchSpace(4, "product_form")
        x = np.random.default_rng(seed).standard_normal(space.parameter_count)
        a, ap, b, bp = (o.operator for o in build_observables(x, space))
        for left in (a, ap):
            for right in (b, bp):
                assert np.max(np.abs(linalg.commutator(left, right))) <= 1e-13

    def test_constraint_substitutions(self):
        x = np.random.default_rng(0).standard_normal(SearchSpace(2, "primes_identity").parameter_count)
        quad = build_observables(x, SearchSpace(2, "primes_identity"))
        assert np.array_equal(quad[1].operator, np.eye(2)) and np.array_equal(quad[3].operator, np.eye(2))
        space = SearchSpace(2, "a_equals_a_prime")
        quad = build_observables(np.random.default_rng(1).standard_normal(space.parameter_count), space)
        assert np.array_equal(quad[0].operator, quad[1].operator)


class TestObjective:
    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, dim=st.sampled_from([2, 3, 4]))
    def test_free_bound(self, seed, dim):
        space = SearchSpace(dim)
        x = np.random.default_rng(seed).standard_normal(space.parameter_count)
        assert objective(x, space) <= MIXED_SEQUENTIAL_BOUND + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, dim=st.sampled_from([2, 3, 4]))
    def test_a_equals_a_prime_bound(self, seed, dim):
        space = SearchSpace(dim, "a_equals_a_prime")
        x = np.random.default_rng(seed).standard_normal(space.parameter_count)
        assert objective(x, space) <= 2 + 1e-9

    def test_continuity(self):
        space = SearchSpace(2)
        x = np.random.default_rng(4).standard_normal(space.parameter_count)
        e = np.zeros_like(x)
        e[3] = 1e-7
        assert abs(objective(x + e, space) - objective(x, space)) <= 1e-5


class TestPatternSearch:
    def test_concave_quadratic(self):
        target = np.array([0.3, -1.2, 2.0])
        x, fx, evals, converged, trace = pattern_search(lambda v: -np.sum((v - target) ** 2), np.zeros(3), 10_000)
        assert converged
        assert np.allclose(x, target, atol=1e-5)
        assert evals <= 10_000

    def test_budget_respected(self):
        _, _, evals, converged, _ = pattern_search(lambda v: -np.sum(v**2), np.ones(5), 7)
        assert evals == 7 and not converged

    def test_trace_monotone(self):
        space = SearchSpace(2)
        x0 = np.random.default_rng(0).standard_normal(space.parameter_count)
        *_, trace = pattern_search(lambda v: objective(v, space), x0, 2000)
        values = [v for _, v in trace]
        idx = [i for i, _ in trace]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert all(b > a for a, b in zip(idx, idx[1:]))


class TestSearch:
    def test_deterministic(self):
        space = SearchSpace(2)
        r1 = search(space, budget=800, restarts=3, seed=9)
        r2 = search(space, budget=800, restarts=3, seed=9, workers=1)
        assert r1.best_value == r2.best_value
        assert np.array_equal(r1.best_parameters, r2.best_parameters)
        assert r1.as_dict() == r2.as_dict()

    def test_reevaluation_reproduces_best(self):
        space = SearchSpace(2)
        r = search(space, budget=1500, restarts=2, seed=1)
        assert abs(objective(r.best_parameters, space) - r.best_value) <= 1e-9
        assert r.best_value <= MIXED_SEQUENTIAL_BOUND + 1e-9
        assert chsh_value(r.best_scenario).chsh_value == pytest.approx(r.best_value, abs=1e-9)
        assert r.evaluations == sum(x.evaluations for x in r.restart_results)
        assert r.best_restart.value == r.best_value

    def test_a_equals_a_prime_reaches_classical(self):
        r = search(SearchSpace(2, "a_equals_a_prime"), budget=4000, restarts=4, seed=0)
        assert 2 - 1e-4 <= r.best_value <= 2 + 1e-9

    def test_product_form_marginals(self):
        r = search(SearchSpace(4, "product_form"), budget=3000, restarts=2, seed=3)
        assert chsh_value(r.best_scenario).marginal_report.max_abs_deviation <= 1e-12

    def test_free_dim2_reports_value(self):
        r = search(SearchSpace(2), budget=5000, restarts=4, seed=0)
        assert TSIRELSON_BOUND - 1e-3 <= r.best_value <= MIXED_SEQUENTIAL_BOUND + 1e-9

    def test_bad_arguments(self):
        with pytest.raises(ParameterError):
            search(SearchSpace(2), budget=0)
        with pytest.raises(ParameterError):
            search(SearchSpace(2), restarts=0)


def test_tsirelson_reachable_in_product_form():
    # analytic sanity: value at the best product quadruple never beats 2 sqrt 2
    r = search(SearchSpace(4, "product_form"), budget=6000, restarts=4, seed=2)
    assert r.best_value <= 2 * math.sqrt(2) + 1e-9
