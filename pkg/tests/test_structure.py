from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from delaynet import fixtures
from delaynet.linalg import dot, in_span
from delaynet.network import parse_network
from delaynet.structure import (
    analyze_structure,
    complex_graph,
    deficiency,
    is_weakly_reversible,
    is_wr_deficiency_zero,
    kinetic_subspace,
    linkage_classes,
    orth_complement,
    stoich_subspace,
)

from .strategies import networks


@pytest.mark.parametrize(
    "net, p, l, s, delta, wr",
    [
        (fixtures.reversible_pair(exact=True), 2, 1, 1, 0, True),
        (fixtures.example1(exact=True), 3, 1, 1, 1, False),
        (fixtures.example2_target(exact=True), 3, 1, 2, 0, True),
        (fixtures.example2(exact=True), 6, 1, 2, 3, False),
        (fixtures.pak1_target(exact=True), 3, 1, 2, 0, True),
        (fixtures.degenerate_pair_target(exact=True), 2, 1, 1, 0, True),
        (fixtures.degenerate_pair(exact=True), 4, 1, 2, 1, False),
    ],
)
def test_known_structures(net, p, l, s, delta, wr):
    rep = analyze_structure(net)
    assert (rep.p, rep.linkage_class_count, rep.s, rep.deficiency) == (p, l, s, delta)
    assert rep.weakly_reversible is wr
    assert is_wr_deficiency_zero(net) is (wr and delta == 0)


def test_linkage_classes_of_a_split_network():
    net = parse_network("reaction A -> B : k=1\nreaction C -> 2C : k=1\nreaction B -> A : k=2\n")
    classes = linkage_classes(complex_graph(net))
    assert sorted(len(c) for c in classes) == [2, 2]
    assert not is_weakly_reversible(complex_graph(net))


def test_parallel_reactions_share_one_edge():
    net = parse_network("reaction A -> B : k=1 tau=1\nreaction A -> B : k=2\nreaction B -> A : k=1\n")
    g = complex_graph(net)
    assert g.number_of_edges() == 2
    assert is_weakly_reversible(g)


def test_json_report_is_exact_strings():
    doc = analyze_structure(fixtures.pak1_target(exact=True)).to_json()
    assert doc["deficiency"] == 0 and doc["weakly_reversible"] is True
    assert all(isinstance(v, str) for row in doc["orth_basis"] for v in row)


@settings(max_examples=80, deadline=None)
@given(networks(max_species=4))
def test_subspace_invariants(net):
    S = stoich_subspace(net)
    perp = orth_complement(net)
    # dimensions add up and the complement is orthogonal
    assert len(S) + len(perp) == net.n
    assert all(dot(a, b) == 0 for a in S for b in perp)
    # every reaction vector lies in S; the kinetic subspace lies inside S
    assert all(in_span(net.reaction_vector(i), S, net.n) for i in range(net.r))
    assert all(in_span(v, S, net.n) for v in kinetic_subspace(net))
    # rank agrees with a floating-point oracle
    V = np.array([net.reaction_vector(i) for i in range(net.r)], dtype=float)
    assert len(S) == np.linalg.matrix_rank(V)


@settings(max_examples=80, deadline=None)
@given(networks(max_species=4))
def test_deficiency_is_nonnegative_and_matches_counts(net):
    g = complex_graph(net)
    d = deficiency(net)
    assert d >= 0
    assert d == g.number_of_nodes() - len(linkage_classes(g)) - len(stoich_subspace(net))


def test_kinetic_subspace_can_be_smaller_than_stoichiometric():
    # the two reactions out of X2 cancel in the X1 direction only partly:
    # the RHS is that of X1 <-> X2, so S_k is the line spanned by (1, -1)
    net = fixtures.degenerate_pair(exact=True)
    Sk = kinetic_subspace(net)
    assert len(stoich_subspace(net)) == 2
    assert len(Sk) == 1
    assert in_span((Fraction(1), Fraction(-1)), Sk, 2)
