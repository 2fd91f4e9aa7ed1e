from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaynet import fixtures
from delaynet.ddesim import HistorySegment, simulate
from delaynet.invariants import (
    EquilibriumError,
    conservation_check,
    cu_b,
    degenerate_set,
    delta_coefficients,
    equilibrium_in_set,
    g_constant,
    g_eval,
    gn_eval,
    invariant_set,
    level_surface_csv,
    quasi_delay,
    reference_equilibrium,
    target_orth_basis,
)
from delaynet.kinetics import CompiledRHS, dde_rhs
from delaynet.network import Complex

from .strategies import networks, states

F = Fraction


def test_g_example1_constant_history():
    # 2 + k1 * tau1 * 2^2 * 2 = 10
    assert g_eval(fixtures.example1(), (2.0,))[0] == pytest.approx(10.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_g_matches_closed_form_on_constant_histories(data):
    net = data.draw(networks(exact=False))
    x = np.array(data.draw(states(net.n, 0.2, 2.0)))
    np.testing.assert_allclose(g_eval(net, x), g_constant(net, x), rtol=1e-12, atol=1e-12)


def test_delta_table_scpak():
    table = delta_coefficients(fixtures.scpak(exact=True), fixtures.scpak_witness(exact=True))
    assert table.row_sums() == [F(1, 2), F(3, 2), 1, 1, 1]
    # 2E -> 2E + EP: E is produced at its own scale, EP through lbar = 2
    assert (table.delta[(0, 1)], table.delta[(1, 1)]) == (1, F(1, 2))
    perturbed = table.perturbed(1, 1, 1.1)
    assert perturbed.delta[(1, 1)] == pytest.approx(0.55)
    assert table.delta[(1, 1)] == F(1, 2)


def test_delta_table_needs_single_species_reactants():
    M, w = fixtures.catalogue(exact=True)["example2"]
    with pytest.raises(ValueError, match="single species"):
        delta_coefficients(M, w)


@pytest.mark.parametrize("idx, level", [(0, 25.24), (1, 25.24), (2, 6.56), (3, 6.56)])
def test_scpak_levels(idx, level):
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    theta = fixtures.SCPAK_THETAS[idx]
    spec = invariant_set(net, w, theta, "new_scc_de3")
    assert spec.levels[0] == pytest.approx(level, abs=1e-9)
    table = delta_coefficients(net, w)
    b = [float(v) for v in spec.basis[0]]
    assert cu_b(net, table, theta, b) == pytest.approx(level, abs=1e-9)
    np.testing.assert_allclose(
        gn_eval(net, table, theta), g_constant(net, theta, table.row_sums()), rtol=1e-12
    )


def test_new_set_is_conserved_and_classical_set_is_not():
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    theta = fixtures.SCPAK_THETAS[0]
    traj = simulate(net, theta, 30.0, 0.01)
    new = invariant_set(net, w, theta, "new_scc_de3")
    assert conservation_check(traj, new, samples=60) < 1e-6
    # with plain weights the scaled basis is not conserved
    plain = invariant_set(net, w, theta, "new_scc_de12")
    assert conservation_check(traj, plain, samples=60) > 1e-3
    # the source stoichiometric subspace is all of R^3 so there is nothing to check
    assert invariant_set(net, w, theta, "scc").basis == []


def test_example2_new_set_is_conserved():
    M, w = fixtures.catalogue()["example2_distinct"]
    psi = (1.2, 0.9, 1.0)
    traj = simulate(M, psi, 20.0, 0.01)
    spec = invariant_set(M, w, psi, "new_scc_de12")
    assert len(spec.basis) == 1
    assert conservation_check(traj, spec, samples=40) < 1e-4


def test_unknown_kind_and_missing_witness():
    net = fixtures.scpak()
    with pytest.raises(ValueError):
        invariant_set(net, None, (1, 1, 1), "new_scc_de3")
    with pytest.raises(ValueError):
        invariant_set(net, fixtures.scpak_witness(), (1, 1, 1), "other")


def test_quasi_delay_example1():
    M, w = fixtures.catalogue(exact=True)["example1"]
    assert quasi_delay(M, w, Complex.from_vector([2])) == 2
    assert quasi_delay(M, w, Complex.zero()) == 0
    with pytest.raises(ValueError):
        quasi_delay(M, w, Complex.from_vector([1]))


def test_reference_equilibrium_is_an_equilibrium():
    for name in ("pak1", "scpak", "example2", "degenerate_pair"):
        M, w = fixtures.catalogue()[name]
        x = reference_equilibrium(w)
        past = {t: x for t in M.delays}
        assert np.max(np.abs(dde_rhs(M, x, past))) < 1e-10, name


@pytest.mark.parametrize("idx", range(4))
def test_equilibrium_in_set_matches_expected(idx):
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    theta = fixtures.SCPAK_THETAS[idx]
    spec = invariant_set(net, w, theta, "new_scc_de3")
    x = equilibrium_in_set(net, w, spec)
    np.testing.assert_allclose(x, fixtures.SCPAK_EQUILIBRIA[idx], atol=5e-3)
    assert spec.functional(net, x)[0] == pytest.approx(spec.levels[0], abs=1e-9)


def test_equilibrium_uniqueness_probe():
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    spec = invariant_set(net, w, fixtures.SCPAK_THETAS[0], "new_scc_de3")
    rng = np.random.default_rng(11)
    sols = [equilibrium_in_set(net, w, spec, c0=rng.uniform(-2, 2, 1)) for _ in range(20)]
    assert np.max(np.ptp(np.array(sols), axis=0)) < 1e-7


def test_equilibrium_in_set_dimension_mismatch():
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    spec = invariant_set(net, w, (1, 1, 1), "scc")
    with pytest.raises(ValueError, match="dimension"):
        equilibrium_in_set(net, w, spec)


def test_equilibrium_error_when_level_unreachable():
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    spec = invariant_set(net, w, (1, 1, 1), "new_scc_de3")
    spec.levels = [-1.0]
    with pytest.raises(EquilibriumError):
        equilibrium_in_set(net, w, spec)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=1, max_size=1))
def test_degenerate_set_points_are_equilibria(c):
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    ds = degenerate_set(reference_equilibrium(w), target_orth_basis(w, scaled=False))
    x = ds(c)
    assert x[0] ** 2 == pytest.approx(x[1], rel=1e-12)
    assert x[1] == pytest.approx(x[2], rel=1e-12)
    assert np.max(np.abs(CompiledRHS(net).ode(x))) <= 1e-9


def test_degenerate_pair_family():
    net, w = fixtures.catalogue()["degenerate_pair"]
    ds = degenerate_set(reference_equilibrium(w), target_orth_basis(w, scaled=False))
    assert ds.dim == 1
    for c in np.linspace(-1, 1, 5):
        x = ds([c])
        assert x[0] == pytest.approx(x[1])
        assert np.max(np.abs(CompiledRHS(net).ode(x))) < 1e-12


def test_level_surface_points_lie_on_the_level():
    net, w = fixtures.scpak(), fixtures.scpak_witness()
    spec = invariant_set(net, w, fixtures.SCPAK_THETAS[2], "new_scc_de3")
    axis = np.linspace(0.1, 1.0, 4)
    rows = level_surface_csv(net, spec, [axis, axis]).strip().splitlines()
    assert rows[0] == "x_E,x_EP,x_EPP"
    assert len(rows) == 1 + 16
    weights = spec.weights(net)
    b = np.array([float(v) for v in spec.basis[0]])
    for row in rows[1:]:
        x = np.array([float(v) for v in row.split(",")])
        if np.isfinite(x).all():
            assert b @ g_constant(net, x, weights) == pytest.approx(spec.levels[0], abs=1e-8)


def test_g_rejects_short_history():
    seg = HistorySegment.constant([1.0], 0.5)
    with pytest.raises(ValueError, match="shorter"):
        g_eval(fixtures.example1(), seg)


def test_spec_json():
    net, w = fixtures.scpak(exact=True), fixtures.scpak_witness(exact=True)
    doc = invariant_set(net, w, (1, 1, 1), "new_scc_de3").to_json()
    assert doc["kind"] == "new_scc_de3" and len(doc["delta"]) == 6
