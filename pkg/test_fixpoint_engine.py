"""
Tests for the fixed-point engine
"""

import time

import numpy as np
import pytest

from admissibility import ContractionSpec, ContractionVariant, alpha_by_name
from cvms_core import ComplexMetric
from errors import DivergenceError
from fixpoint_engine import (
    FixpointResult,
    IterationTrace,
    SolverConfig,
    check_pairwise_commuting,
    compose_family,
    diagnose_hypotheses,
    family_fixed_point,
    iterate_pair,
    iterate_single,
    observed_contraction_rate,
    power_map,
    uniqueness_probe,
)
from simulation import SimulationFn

D1 = ComplexMetric.d1()
CFG = SolverConfig(tol=1e-10)


def thirdshift(z):
    return (z + 2j) / 3


class TestSolverConfig:
    @pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"max_iter": 0}, {"cauchy_window": 0}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_from_settings_reads_environment(self, monkeypatch):
        import config

        monkeypatch.setenv("FIXPOINT_TOL", "1e-6")
        monkeypatch.setenv("FIXPOINT_MAX_ITER", "50")
        config.reset_settings()
        cfg = SolverConfig.from_settings(cauchy_window=3, max_iter=None)
        assert cfg.tol == 1e-6
        assert cfg.max_iter == 50
        assert cfg.cauchy_window == 3


class TestIterateSingle:
    def test_halving_map_reaches_i(self, halfshift):
        start = time.perf_counter()
        result = iterate_single(halfshift, 0j, D1, CFG)
        elapsed = time.perf_counter() - start

        assert result.converged
        assert abs(result.point - 1j) <= 1e-9
        assert result.iterations <= 40
        assert elapsed < 0.01
        for n, z in enumerate(result.trace.points):
            assert abs(z - 1j) <= 2.0 ** -n * (1 + 1e-9) + 1e-15

    def test_deltas_are_monotone_and_geometric(self, halfshift):
        deltas = iterate_single(halfshift, 0j, D1, CFG).trace.deltas
        for n in range(len(deltas) - 1):
            assert deltas[n + 1] <= deltas[n] + 1e-12
            assert deltas[n] <= 0.5 ** n * deltas[0] * (1 + 1e-9) + 1e-15

    def test_identity_stays_put(self, identity_map):
        result = iterate_single(identity_map, 3 - 1j, D1, CFG)
        assert result.point == 3 - 1j
        assert result.converged
        assert result.iterations == 0
        assert result.trace.points == [3 - 1j]
        assert result.to_dict()["final_delta"] is None

    def test_expansion_diverges_with_trace(self):
        with pytest.raises(DivergenceError) as info:
            iterate_single(lambda z: 2 * z + 1, 0j, D1, CFG)
        trace = info.value.trace
        assert trace.iterations > 30
        assert len(trace.points) == len(trace.deltas) + 1

    def test_non_finite_iterate_diverges(self):
        with pytest.raises(DivergenceError):
            iterate_single(lambda z: complex(float("nan"), 0), 0j, D1, CFG)

    def test_iteration_cap_reports_non_convergence(self, halfshift):
        result = iterate_single(halfshift, 0j, D1, SolverConfig(tol=1e-10, max_iter=5))
        assert not result.converged
        assert result.iterations == 5

    def test_trace_is_bit_for_bit_deterministic(self, halfshift):
        a = iterate_single(halfshift, 5 + 5j, D1, CFG).trace
        b = iterate_single(halfshift, 5 + 5j, D1, CFG).trace
        assert a.points == b.points
        assert a.deltas == b.deltas

    def test_result_to_dict(self, halfshift):
        data = iterate_single(halfshift, 0j, D1, CFG).to_dict()
        assert data["converged"] is True
        assert data["point"].endswith("i")
        assert {"iterations", "residual_s", "residual_t"} <= set(data)
        assert data["observed_rate"] == pytest.approx(0.5)


def test_alternating_order():
    seen = []

    def S(z):
        seen.append("S")
        return z / 2

    def T(z):
        seen.append("T")
        return z / 3

    iterate_pair(S, T, 1 + 0j, D1, SolverConfig(tol=1e-10, max_iter=4))
    assert seen[:4] == ["S", "T", "S", "T"]


def test_pair_converges_to_common_fixed_point(halfshift):
    result = iterate_pair(halfshift, thirdshift, 7 - 2j, D1, CFG)
    assert result.converged
    assert abs(result.point - 1j) <= 1e-9
    assert max(result.residuals) <= 10 * CFG.tol


def test_common_fixed_start_takes_no_steps(halfshift):
    result = iterate_pair(halfshift, thirdshift, 1j, D1, CFG)
    assert result.converged
    assert result.iterations == 0
    assert result.residuals == (0.0, 0.0)


def test_start_fixed_by_one_map_still_iterates(halfshift):
    result = iterate_pair(lambda z: z, halfshift, 0j, D1, CFG)
    assert result.iterations > 0
    assert result.trace.deltas[0] == 0.0


def test_trace_rows():
    trace = IterationTrace([0j, 0.5j], [0.5])
    assert trace.rows() == [{"iter": 1, "delta": 0.5, "point": "0.0+0.5i"}]
    with pytest.raises(ValueError):
        IterationTrace([0j, 1j], [])


class TestUniquenessProbe:
    def test_halving_map_random_starts(self, halfshift):
        rng = np.random.default_rng(0)
        starts = [complex(x, y) for x, y in rng.uniform(-10, 10, size=(32, 2))]
        report = uniqueness_probe(halfshift, halfshift, starts, D1, CFG)
        assert report.passed
        assert report.samples_tested == 32

    def test_scattered_starts(self, halfshift):
        assert uniqueness_probe(halfshift, halfshift, [0j, 5 + 5j, -3j], D1, CFG).passed

    def test_identity_fails(self, identity_map):
        report = uniqueness_probe(identity_map, identity_map, [0j, 1 + 0j], D1, CFG)
        assert not report.passed
        assert report.witness.clause == "distinct_limits"

    def test_duplicated_start_passes(self, halfshift):
        assert uniqueness_probe(halfshift, halfshift, [2j, 2j], D1, CFG).passed

    def test_needs_two_starts(self, halfshift):
        with pytest.raises(ValueError):
            uniqueness_probe(halfshift, halfshift, [0j], D1, CFG)


class TestComposeFamily:
    def test_single_identity(self, identity_map):
        assert compose_family([identity_map])(4 + 1j) == 4 + 1j

    def test_left_to_right_composition(self):
        composite = compose_family([lambda z: z / 2, lambda z: z + 1j])
        assert composite(3 + 0j) == (3 + 1j) / 2

    def test_order_matters(self):
        square, inc = (lambda z: z * z), (lambda z: z + 1)
        assert compose_family([square, inc])(1) == 4
        assert compose_family([inc, square])(1) == 2

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            compose_family([])


def test_power_map_makes_swap_contractive():
    swap = lambda z: complex(2 * z.imag, 0.0)  # noqa: E731
    square = power_map(swap, 2)
    assert square(3 + 4j) == 0j
    result = iterate_single(square, 3 + 4j, D1, CFG)
    assert result.converged
    assert result.point == 0j


class TestPairwiseCommuting:
    def test_translations_commute(self):
        family = [lambda z: z + 1, lambda z: z + 2j]
        assert check_pairwise_commuting(family, [lambda z: z - 3], 200, 0).passed

    def test_square_and_increment_do_not(self):
        report = check_pairwise_commuting([lambda z: z * z], [lambda z: z + 1], 200, 0)
        assert not report.passed
        assert report.witness.clause == "S1T1"

    def test_singleton_identical_families(self, halfshift):
        assert check_pairwise_commuting([halfshift], [halfshift], 200, 0).passed

    def test_affine_contractions_toward_i(self, halfshift):
        assert check_pairwise_commuting([halfshift, thirdshift], [thirdshift], 500, 0).passed


class TestFamilyFixedPoint:
    def test_single_member_families(self, halfshift):
        result = family_fixed_point([halfshift], [halfshift], 0j, D1, CFG)
        assert abs(result.point - 1j) <= 1e-9
        assert all(r <= 10 * CFG.tol for r in result.component_residuals.values())

    def test_two_commuting_contractions(self, halfshift):
        result = family_fixed_point([halfshift, thirdshift], [thirdshift, halfshift], 4 + 4j, D1, CFG)
        assert result.converged
        assert set(result.component_residuals) == {"S1", "S2", "T1", "T2"}
        assert all(r <= 1e-8 for r in result.component_residuals.values())
        assert result.advisories == []

    def test_non_commuting_input_flags_advisory(self):
        cfg = SolverConfig(tol=1e-10, max_iter=200)
        result = family_fixed_point([lambda z: z / 2], [lambda z: z / 2 + 1], 0j, D1, cfg)
        assert isinstance(result, FixpointResult)
        assert any("do not commute" in a for a in result.advisories)


def test_observed_contraction_rate():
    assert observed_contraction_rate(IterationTrace([0, 1, 2, 3], [1.0, 0.5, 0.25])) == pytest.approx(0.5)
    assert observed_contraction_rate(IterationTrace([0, 0], [0.0])) is None


def test_diagnose_hypotheses_on_halving_map(halfshift):
    spec = ContractionSpec(ContractionVariant.PLAIN, SimulationFn.linear(0.6), alpha_by_name("one"), D1)
    reports = diagnose_hypotheses(spec, halfshift, halfshift, 0j, CFG, sample_count=500)
    assert set(reports) == {"contraction", "triangular_orbital", "start_condition", "regularity", "uniqueness"}
    assert all(r.passed for r in reports.values())


def test_diagnose_hypotheses_flags_bad_start(halfshift):
    spec = ContractionSpec(ContractionVariant.PLAIN, SimulationFn.linear(0.6), alpha_by_name("zero"), D1)
    reports = diagnose_hypotheses(spec, halfshift, halfshift, 0j, CFG, sample_count=100)
    assert not reports["start_condition"].passed
    assert not reports["regularity"].passed
