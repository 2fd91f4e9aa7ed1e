from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from delaynet import fixtures
from delaynet.classifier import (
    Rejection,
    check_hf,
    check_thm1,
    check_thm3,
    classify,
    decomposition_defect,
    reconstruct_rhs,
    split_sign_coefficients,
    thm2_split,
)
from delaynet.kinetics import dde_rhs
from delaynet.network import Complex, ConjugacyWitness, DelayedNetwork, Reaction, parse_network, reactant_groups

from .strategies import delays, positive_fractions, states

F = Fraction

EXPECTED_THEOREM = {
    "example1": "thm1",
    "example2": "cor1_case1",
    "example2_distinct": "cor1_case1",
    "pak1": "thm3",
    "scpak": "thm3",
    "degenerate_pair": "thm1",
    "reversible_pair": "lcdcbmas",
}


@pytest.mark.parametrize("name", sorted(EXPECTED_THEOREM))
def test_catalogue_theorems_and_exact_defect(name, exact_catalogue):
    M, w = exact_catalogue[name]
    cert = classify(M, w)
    assert cert.theorem == EXPECTED_THEOREM[name]
    assert decomposition_defect(M, cert.decomposition) == 0


def _loops(cert):
    return {(lt.y.vector(cert.decomposition.target.n), lt.delay): lt.K for lt in cert.decomposition.loop_terms}


def test_example1_decomposition(exact_catalogue):
    cert = classify(*exact_catalogue["example1"])
    assert cert.decomposition.quasi_rates == {(0, 1): F(1, 2), (1, 0): F(1, 2)}
    assert _loops(cert) == {((2,), 1): F(1, 2)}


def test_example2_distinct_decomposition(exact_catalogue):
    cert = classify(*exact_catalogue["example2_distinct"])
    q = cert.decomposition.quasi_rates
    assert q == {
        (0, 1): F(1, 2), (0, 3): F(1, 2),
        (1, 2): F(1, 3), (1, 3): F(1, 3),
        (2, 1): F(2, 3), (3, 1): F(1),
    }
    assert _loops(cert) == {
        ((3, 0, 0), 1): F(1, 2),
        ((3, 0, 0), 2): F(2, 3),
        ((3, 0, 0), 3): F(1, 6),
        ((0, 0, 3), 1): F(1, 3),
    }


@pytest.mark.parametrize("name, K", [("pak1", F(1, 2)), ("scpak", F(3, 2))])
def test_kinase_chain_loops(name, K, exact_catalogue):
    cert = classify(*exact_catalogue[name])
    assert _loops(cert) == {((2, 0, 0), 1): K}
    assert cert.decomposition.L == fixtures.PAK_L


def test_hf_table_example2():
    ok, table = check_hf(fixtures.example2(exact=True), fixtures.example2_target(exact=True))
    assert ok
    threeA = Complex.from_vector([3, 0, 0])
    assert table[(threeA, 1)] == (3, 4)
    assert table[(threeA, 2)] == (2, 4)


def test_no_witness_and_not_weakly_reversible():
    cert = classify(fixtures.example1(exact=True))
    assert cert.theorem == "none" and not cert.accepted
    assert cert.to_json()["rejections"]


def test_thm1_rejects_negative_loop():
    # 2S1 -> 0 removes two molecules per event where the target removes one,
    # so the source rate sum is below the target's and K < 0 at delay 1
    M = parse_network("species S1\nreaction 2S1 -> 0 : k=1/2 tau=1\nreaction S1 -> 2S1 : k=1", exact=True)
    target = parse_network("species S1\nreaction 2S1 -> S1 : k=1\nreaction S1 -> 2S1 : k=1", exact=True)
    with pytest.raises(Rejection) as info:
        check_thm1(M, target)
    assert "K^(2S1) < 0" in str(info.value)
    # without the delay the same split is accepted
    cert = check_thm1(M.with_delays([0, 0]), target)
    assert decomposition_defect(M.with_delays([0, 0]), cert.decomposition) == 0


def test_thm3_case_three():
    """Part of the source consumes X twice per event while the target
    consumes it once, so the loop coefficient is negative and a delay-0
    share absorbs it."""
    M = parse_network(
        "species X\nreaction 2X -> 0 : k=1/2 tau=1\nreaction 2X -> X : k=1 tau=1\n"
        "reaction X -> 2X : k=2 tau=1/2",
        exact=True,
    )
    target = parse_network("species X\nreaction 2X -> X : k=4\nreaction X -> 2X : k=2", exact=True)
    w = ConjugacyWitness(target, (F(2),))
    cert = check_thm3(M, w)
    two_x = Complex.from_vector([2])
    assert cert.decomposition.cases[two_x] == "III"
    assert cert.decomposition.coefficients[two_x] == F(-1, 2)
    assert cert.decomposition.quasi_rates[(0, 1)] == 2 and cert.decomposition.quasi_rates[(0, 0)] == 2
    assert decomposition_defect(M, cert.decomposition) == 0
    assert cert.decomposition.rate_sums() == {0: 4, 1: 2}
    assert classify(M, w).theorem == "thm3"


def test_thm3_rejects_multi_species_complexes(exact_catalogue):
    M, w = exact_catalogue["example2"]
    with pytest.raises(Rejection) as info:
        check_thm3(M, w)
    assert "single species" in str(info.value)


# --------------------------------------------------------------------------
# sign split and rate split identities

coeffs = st.integers(-4, 4).map(F).filter(lambda a: a != 0)


@settings(max_examples=100)
@given(
    st.lists(st.tuples(st.integers(-6, 6).map(F), st.sampled_from([1, 2, 3])), min_size=1, max_size=3),
    st.lists(coeffs, min_size=2, max_size=4),
    st.data(),
)
def test_sign_split_identities(zt, a_list, data):
    assume(any(a > 0 for a in a_list) and any(a < 0 for a in a_list))
    ztau = {}
    for z, t in zt:
        ztau[t] = ztau.get(t, 0) + z
    a = dict(enumerate(a_list))
    k = {i: data.draw(positive_fractions) for i in a}
    cp, cm = split_sign_coefficients(ztau, a, k)
    for t, z in ztau.items():
        pos = sum((cp.get((i, t), 0) * a[i] for i in a if a[i] > 0), F(0))
        neg = sum((cm.get((i, t), 0) * a[i] for i in a if a[i] < 0), F(0))
        assert pos == max(z, 0) and neg == min(z, 0)
    assert all(v >= 0 for v in list(cp.values()) + list(cm.values()))


@settings(max_examples=100)
@given(
    # rate sums above the total target rate, so no loop coefficient goes negative
    st.lists(st.tuples(st.integers(0, 6).map(F), st.integers(81, 100).map(F)), min_size=1, max_size=3),
    st.lists(st.integers(1, 3).map(F), min_size=1, max_size=2),
    st.data(),
)
def test_same_sign_rate_split_sums(parts, a_list, data):
    ztau = {F(t + 1): z for t, (z, _) in enumerate(parts)}
    ktau = {F(t + 1): kk for t, (_, kk) in enumerate(parts)}
    a = dict(enumerate(a_list))
    k = {i: data.draw(positive_fractions) for i in a}
    quasi, _, rates, case = thm2_split(ztau, ktau, a, k)
    assert case == "I"
    sums = {}
    for (i, _), v in quasi.items():
        sums[i] = sums.get(i, 0) + v
    assert sums == k and rates == k


def test_mixed_sign_split_keeps_rate_sums():
    ztau = {F(1): F(3), F(2): F(-1)}
    ktau = {F(1): F(5), F(2): F(5)}
    a = {0: F(1), 1: F(-1)}
    k = {0: F(4), 1: F(2)}
    quasi, loops, rates, case = thm2_split(ztau, ktau, a, k)
    assert case == "II"
    sums = {}
    for (i, _), v in quasi.items():
        sums[i] = sums.get(i, 0) + v
    assert sums == rates
    assert all(v > 0 for v in loops.values())


# --------------------------------------------------------------------------
# soundness on random delay splits of weakly reversible deficiency-zero targets

TARGET_SHAPES = [
    ("species A B", ["A -> B", "B -> A"]),
    ("species A B", ["2A -> B", "B -> 2A"]),
    ("species A", ["0 -> A", "A -> 0"]),
    ("species A B C", ["A -> B", "B -> C", "C -> A"]),
    ("species A B C", ["2A -> B", "B -> 2A", "B -> C", "C -> B"]),
    ("species A B C", ["A + B -> C", "C -> A + B", "C -> 2B", "2B -> C"]),
]
# splitting these over delays can break the HF bound, so only soundness is checked
MIXED_NORM_SHAPES = TARGET_SHAPES + [
    ("species A B C", ["3A -> A + 2B", "A + 2B -> 3A", "3A -> 3C", "3C -> 3A"]),
]


@st.composite
def split_sources(draw, shapes=TARGET_SHAPES):
    header, arrows = draw(st.sampled_from(shapes))
    rates = [draw(positive_fractions) for _ in arrows]
    text = header + "\n" + "".join(f"reaction {a} : k={r}\n" for a, r in zip(arrows, rates))
    target = parse_network(text, exact=True)
    reactions = []
    for rx in target.reactions:
        parts = draw(st.integers(1, 3))
        weights = [draw(st.integers(1, 5)) for _ in range(parts)]
        for wgt in weights:
            tau = draw(delays)
            reactions.append(Reaction(rx.reactant, rx.product, rx.rate * F(wgt, sum(weights)), tau))
    return DelayedNetwork(target.species, tuple(reactions)), target


@settings(max_examples=60, deadline=None)
@given(split_sources(), st.data())
def test_random_splits_are_certified_exactly(pair, data):
    M, target = pair
    cert = classify(M, ConjugacyWitness.identity(target))
    assert cert.accepted, cert.notes
    d = cert.decomposition
    assert decomposition_defect(M, d) == 0
    assert d.rate_sums() == {i: rx.rate for i, rx in enumerate(d.target.reactions)}
    x_now = data.draw(states(M.n))
    past = {t: data.draw(states(M.n)) for t in M.delays if t != 0}
    got = np.array(reconstruct_rhs(d, x_now, past), dtype=float)
    np.testing.assert_allclose(got, dde_rhs(M, x_now, past), rtol=1e-10, atol=1e-10)


@st.composite
def padded_sources(draw):
    """A random split plus a cancelling pair y -> y + e_j, y -> y - e_j with
    equal rates and different delays; the undelayed dynamics are unchanged."""
    M, target = draw(split_sources(MIXED_NORM_SHAPES))
    y = draw(st.sampled_from(sorted(reactant_groups(M))))
    support = [j for j in range(M.n) if y[j] > 0]
    assume(support)
    j = draw(st.sampled_from(support))
    up = list(y.vector(M.n))
    down = list(y.vector(M.n))
    up[j] += 1
    down[j] -= 1
    rate = draw(positive_fractions)
    extra = (
        Reaction(y, Complex.from_vector(up), rate, draw(delays)),
        Reaction(y, Complex.from_vector(down), rate, draw(delays)),
    )
    return DelayedNetwork(M.species, M.reactions + extra), target


@settings(max_examples=60, deadline=None)
@given(padded_sources())
def test_accepted_certificates_are_exact(pair):
    M, target = pair
    cert = classify(M, ConjugacyWitness.identity(target))
    if cert.accepted:
        assert decomposition_defect(M, cert.decomposition) == 0
    else:
        assert cert.notes


def test_certificate_json_shape(exact_catalogue):
    doc = classify(*exact_catalogue["example1"]).to_json()
    assert doc["theorem"] == "thm1"
    assert {q["delay"] for q in doc["quasi_rates"]} == {"0", "1"}
    assert doc["loop_terms"] == [{"complex": "2S1", "delay": "1", "K": "1/2"}]
