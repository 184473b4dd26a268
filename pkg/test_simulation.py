"""
Tests for C-simulation functions and their axiom falsifier
"""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from complex_order import ZERO, ComplexScalar, precnsim
from errors import ConeViolationError
from simulation import (
    ConeMap,
    SimulationFn,
    SimulationKind,
    check_simulation_axioms,
    evaluate,
    parse_cone_map,
    parse_simulation,
)

component = st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=1e3))
cone = st.builds(ComplexScalar, component, component).filter(lambda z: not z.is_zero())

BUILTIN_INSTANCES = [
    SimulationFn.linear(0.5),
    SimulationFn.psi_phi(ConeMap.scale(0.5), ConeMap.identity()),
    SimulationFn.imag_penalty(),
]


def fake_difference():
    """ξ(t, s) = s - t, which has no negative margin"""
    return SimulationFn.custom("s-t", lambda t, s: s - t)


def test_linear_evaluation():
    assert evaluate(SimulationFn.linear(0.5), 1, 4) == ComplexScalar(1.0, 0.0)


@pytest.mark.parametrize("xi", BUILTIN_INSTANCES, ids=lambda xi: xi.name)
def test_origin_maps_to_zero(xi):
    assert evaluate(xi, 0, 0) == ZERO


def test_imag_penalty_evaluation():
    value = evaluate(SimulationFn.imag_penalty(), 1 + 1j, 3 + 3j)
    assert value.re == pytest.approx(2.0)
    assert value.im == pytest.approx(2.0 - math.sqrt(2.0))


def test_psi_phi_evaluation():
    xi = SimulationFn.psi_phi(ConeMap.scale(0.25), ConeMap.scale(2.0))
    assert evaluate(xi, 1 + 1j, 4) == ComplexScalar(-1.0, -2.0)


def test_cone_violation_rejected():
    xi = SimulationFn.linear(0.5)
    with pytest.raises(ConeViolationError):
        evaluate(xi, -1, 1)
    with pytest.raises(ConeViolationError):
        evaluate(xi, 1, ComplexScalar(1.0, -1e-12))


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.5, 2.0])
def test_linear_needs_lambda_in_unit_interval(lam):
    with pytest.raises(ValueError):
        SimulationFn.linear(lam)


def test_psi_must_shrink_and_phi_must_dominate():
    with pytest.raises(ValueError):
        SimulationFn.psi_phi(ConeMap.identity(), ConeMap.identity())
    with pytest.raises(ValueError):
        SimulationFn.psi_phi(ConeMap.scale(0.5), ConeMap.scale(0.9))


@given(cone, cone)
def test_axiom_ii_for_builtin_instances(t, s):
    for xi in BUILTIN_INSTANCES:
        assert precnsim(evaluate(xi, t, s), s - t)


@given(cone, cone, cone)
def test_linear_is_affine_in_s(t, s1, s2):
    xi = SimulationFn.linear(0.3)
    whole = evaluate(xi, t, s1 + s2)
    split = evaluate(xi, t, s1) + s2 * 0.3
    assert whole.re == pytest.approx(split.re, abs=1e-9)
    assert whole.im == pytest.approx(split.im, abs=1e-9)


@pytest.mark.parametrize("text, kind", [
    ("xi1:lambda=0.5", SimulationKind.LINEAR),
    ("xi2:psi=scale(0.5),phi=identity", SimulationKind.PSI_PHI),
    ("xi3", SimulationKind.IMAG_PENALTY),
])
def test_parse_simulation(text, kind):
    xi = parse_simulation(text)
    assert xi.kind is kind
    assert xi.describe() == text


@pytest.mark.parametrize("text", ["xi1", "xi1:lambda=1.5", "xi4", "xi2:psi=double", "xi1:lambda"])
def test_parse_simulation_rejects(text):
    with pytest.raises(ValueError):
        parse_simulation(text)


def test_parse_cone_map():
    assert parse_cone_map("identity")(2 + 1j) == ComplexScalar(2.0, 1.0)
    assert parse_cone_map("scale(0.5)")(2 + 1j) == ComplexScalar(1.0, 0.5)
    with pytest.raises(ValueError):
        parse_cone_map("scale(-1)")


@pytest.mark.parametrize("xi", BUILTIN_INSTANCES + [SimulationFn.linear(0.9)], ids=lambda xi: xi.name)
def test_builtin_instances_pass_axioms(xi):
    report = check_simulation_axioms(xi, 10000, 1000, 42)
    assert report.passed
    assert report.failed_clauses == ()


def test_fake_simulation_fails_axiom_iii():
    report = check_simulation_axioms(fake_difference(), 1000, 1000, 7)
    assert not report.passed
    assert "axiom_iii" in report.failed_clauses
    assert report.witness is not None


def test_nonzero_origin_fails_axiom_i():
    shifted = SimulationFn.custom("shifted", lambda t, s: s * 0.5 - t - 1)
    report = check_simulation_axioms(shifted, 100, 10, 0)
    assert report.failed_clauses[0] == "axiom_i"


def test_falsifier_preconditions():
    with pytest.raises(ValueError):
        check_simulation_axioms(SimulationFn.imag_penalty(), 0, 100, 0)
    with pytest.raises(ValueError):
        check_simulation_axioms(SimulationFn.imag_penalty(), 100, 9, 0)


def test_falsifier_is_deterministic():
    a = check_simulation_axioms(fake_difference(), 200, 50, 3).to_dict()
    b = check_simulation_axioms(fake_difference(), 200, 50, 3).to_dict()
    assert a == b
