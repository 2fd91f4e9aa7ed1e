"""Worked example networks used by the tests, scripts and CLI.

Each builder takes rate constants and delays and returns either a source
network or a (source, witness) pair.  ``exact=True`` converts every number
to a Fraction so the structural checks run in rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .network import Complex, ConjugacyWitness, DelayedNetwork, Number, Reaction


def _num(x, exact: bool) -> Number:
    return Fraction(x) if exact else float(x)


def _c(**terms) -> dict:
    return terms


def _build(species: Sequence[str], rows, exact: bool) -> DelayedNetwork:
    index = {s: i for i, s in enumerate(species)}

    def cx(d: dict) -> Complex:
        return Complex(tuple((index[k], v) for k, v in d.items()))

    reactions = [
        Reaction(cx(lhs), cx(rhs), _num(k, exact), _num(tau, exact)) for lhs, rhs, k, tau in rows
    ]
    return DelayedNetwork(tuple(species), tuple(reactions))


# --------------------------------------------------------------------------
# one species, two reactions


def example1(k1=1, k2=1, tau1=1, exact: bool = False) -> DelayedNetwork:
    """2S1 -> S1 (k1, tau1) and 0 -> S1 (k2, no delay)."""
    return _build(
        ["S1"],
        [(_c(S1=2), _c(S1=1), k1, tau1), (_c(), _c(S1=1), k2, 0)],
        exact,
    )


def example1_target(k1=1, k2=1, exact: bool = False) -> DelayedNetwork:
    """2S1 <-> 0 with rates k1/2, k2/2."""
    h = Fraction(1, 2)
    return _build(
        ["S1"],
        [(_c(S1=2), _c(), h * Fraction(k1), 0), (_c(), _c(S1=2), h * Fraction(k2), 0)],
        exact,
    )


def reversible_pair(k1=1, k2=1, tau1=0, tau2=0, exact: bool = False) -> DelayedNetwork:
    """2S1 <-> 0 with independent delays."""
    return _build(
        ["S1"],
        [(_c(S1=2), _c(), k1, tau1), (_c(), _c(S1=2), k2, tau2)],
        exact,
    )


# --------------------------------------------------------------------------
# three species A, B, C; five reactions with a shared reactant 3A


EXAMPLE2_MERGED = (1, 2, 1, 1, 1)
EXAMPLE2_DISTINCT = (1, 2, 3, 1, 1)


def example2(k=1, taus: Sequence = EXAMPLE2_MERGED, exact: bool = False) -> DelayedNetwork:
    t = list(taus)
    return _build(
        ["A", "B", "C"],
        [
            (_c(A=3), _c(A=2, B=1), k, t[0]),
            (_c(A=3), _c(A=2, C=1), k, t[1]),
            (_c(A=3), _c(A=1, B=1, C=1), k, t[2]),
            (_c(C=3), _c(A=2, C=1), k, t[3]),
            (_c(A=1, B=2), _c(A=3), k, t[4]),
        ],
        exact,
    )


def example2_target(k=1, exact: bool = False) -> DelayedNetwork:
    """3A -> A+2B -> 3A and 3A <-> 3C."""
    k = Fraction(k)
    return _build(
        ["A", "B", "C"],
        [
            (_c(A=3), _c(A=1, B=2), k, 0),
            (_c(A=3), _c(C=3), Fraction(2, 3) * k, 0),
            (_c(C=3), _c(A=3), Fraction(2, 3) * k, 0),
            (_c(A=1, B=2), _c(A=3), k, 0),
        ],
        exact,
    )


# --------------------------------------------------------------------------
# kinase phosphorylation chain E, EP, EPP


PAK_L = (Fraction(1, 2), Fraction(1), Fraction(1))


def pak1(ks=(1, 1, 1, 1), taus=(1, 1, 1, 1), exact: bool = False) -> DelayedNetwork:
    k1, k2, k3, k4 = ks
    t1, t2, t3, t4 = taus
    return _build(
        ["E", "EP", "EPP"],
        [
            (_c(E=2), _c(E=1, EP=1), k1, t1),
            (_c(EP=1), _c(E=1), k2, t2),
            (_c(EP=1), _c(EPP=1), k3, t3),
            (_c(EPP=1), _c(EP=1), k4, t4),
        ],
        exact,
    )


def pak1_target(ks=(1, 1, 1, 1), exact: bool = False) -> DelayedNetwork:
    """2E <-> EP <-> EPP with the first rate divided by four."""
    k1, k2, k3, k4 = (Fraction(k) for k in ks)
    return _build(
        ["E", "EP", "EPP"],
        [
            (_c(E=2), _c(EP=1), k1 / 4, 0),
            (_c(EP=1), _c(E=2), k2, 0),
            (_c(EP=1), _c(EPP=1), k3, 0),
            (_c(EPP=1), _c(EP=1), k4, 0),
        ],
        exact,
    )


def pak1_witness(ks=(1, 1, 1, 1), exact: bool = False) -> ConjugacyWitness:
    L = tuple(_num(l, exact) for l in PAK_L)
    return ConjugacyWitness(pak1_target(ks, exact), L)


def scpak(k=1, tau=1, exact: bool = False) -> DelayedNetwork:
    """Variant of the chain whose conserved quantity differs from PAK-1's.

    2E -> E, 2E -> 2E + EP, EP -> E, EP -> EPP, EPP -> EP, all with rate k
    and delay tau.  Linearly conjugate to the PAK-1 target with
    L = diag(1/2, 1, 1).
    """
    return _build(
        ["E", "EP", "EPP"],
        [
            (_c(E=2), _c(E=1), k, tau),
            (_c(E=2), _c(E=2, EP=1), k, tau),
            (_c(EP=1), _c(E=1), k, tau),
            (_c(EP=1), _c(EPP=1), k, tau),
            (_c(EPP=1), _c(EP=1), k, tau),
        ],
        exact,
    )


def scpak_witness(k=1, exact: bool = False) -> ConjugacyWitness:
    return pak1_witness((k, k, k, k), exact)


SCPAK_THETAS = (
    (0.1, 0.9, 11.2),
    (2.2, 0.7, 0.79),
    (0.1, 0.4, 2.61),
    (1.1, 0.2, 0.01),
)
_HIGH, _LOW = (1.62, 2.6245, 2.6245), (0.8, 0.64, 0.64)
SCPAK_EQUILIBRIA = (_HIGH, _HIGH, _LOW, _LOW)
SCPAK_LEVELS = (25.24, 25.24, 6.56, 6.56)


# --------------------------------------------------------------------------
# two species with a full-dimensional stoichiometric subspace


def degenerate_pair(k=1, tau1=1, tau2=Fraction(1, 2), exact: bool = False) -> DelayedNetwork:
    """X1 -> X2, X2 -> X1 + X2, X2 -> 0.

    Every reaction vector spans R^2, yet the RHS equals that of X1 <-> X2,
    so every point with x1 = x2 is an equilibrium.
    """
    return _build(
        ["X1", "X2"],
        [
            (_c(X1=1), _c(X2=1), k, tau1),
            (_c(X2=1), _c(X1=1, X2=1), k, tau2),
            (_c(X2=1), _c(), k, tau2),
        ],
        exact,
    )


def degenerate_pair_target(k=1, exact: bool = False) -> DelayedNetwork:
    return _build(["X1", "X2"], [(_c(X1=1), _c(X2=1), k, 0), (_c(X2=1), _c(X1=1), k, 0)], exact)


def catalogue(exact: bool = False) -> dict[str, tuple[DelayedNetwork, ConjugacyWitness | None]]:
    """Named fixtures with the witness the classifier should use."""
    ident = ConjugacyWitness.identity
    return {
        "example1": (example1(exact=exact), ident(example1_target(exact=exact))),
        "example2": (example2(exact=exact), ident(example2_target(exact=exact))),
        "example2_distinct": (
            example2(taus=EXAMPLE2_DISTINCT, exact=exact),
            ident(example2_target(exact=exact)),
        ),
        "pak1": (pak1(exact=exact), pak1_witness(exact=exact)),
        "scpak": (scpak(exact=exact), scpak_witness(exact=exact)),
        "degenerate_pair": (degenerate_pair(exact=exact), ident(degenerate_pair_target(exact=exact))),
        "reversible_pair": (reversible_pair(tau1=1, tau2=2, exact=exact), None),
    }
