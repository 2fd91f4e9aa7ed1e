"""Graph and subspace structure of a reaction network.

Everything here is exact: stoichiometric coefficients are integers and
rates enter only through the kinetic subspace, where they are converted to
Fractions before any elimination.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .kinetics import aggregates
from .linalg import Vec, in_span, row_basis, to_fraction
from .linalg import orth_complement as _orth
from .network import Complex, DelayedNetwork


def complex_graph(net: DelayedNetwork) -> nx.DiGraph:
    """Directed graph with one node per complex and one edge per distinct
    (reactant, product) pair.  Self-loops y -> y are kept."""
    g = nx.DiGraph()
    g.add_nodes_from(net.complexes)
    for i, rx in enumerate(net.reactions):
        if g.has_edge(rx.reactant, rx.product):
            g.edges[rx.reactant, rx.product]["reactions"].append(i)
        else:
            g.add_edge(rx.reactant, rx.product, reactions=[i])
    return g


def linkage_classes(graph: nx.DiGraph) -> list[set[Complex]]:
    """Connected components of the undirected skeleton."""
    return [set(c) for c in nx.weakly_connected_components(graph)]


def is_weakly_reversible(graph: nx.DiGraph) -> bool:
    """True iff every edge u -> v has a directed path back from v to u."""
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(graph)):
        for node in scc:
            comp[node] = k
    return all(comp[u] == comp[v] for u, v in graph.edges)


def stoich_subspace(net: DelayedNetwork) -> list[Vec]:
    return row_basis([net.reaction_vector(i) for i in range(net.r)], net.n)


def orth_complement(net: DelayedNetwork) -> list[Vec]:
    """Basis of the orthogonal complement of the stoichiometric subspace."""
    return _orth(stoich_subspace(net), net.n)


def kinetic_subspace(net: DelayedNetwork) -> list[Vec]:
    """span{Z^(y)}: the monomials x^y are independent functions, so this is
    the span of the image of the non-delayed vector field."""
    agg = aggregates(net)
    vecs = [tuple(to_fraction(v) for v in z) for z in agg.Z.values()]
    return row_basis(vecs, net.n)


def deficiency(net: DelayedNetwork) -> int:
    g = complex_graph(net)
    return g.number_of_nodes() - len(linkage_classes(g)) - len(stoich_subspace(net))


@dataclass(frozen=True)
class StructureReport:
    complexes: tuple[Complex, ...]
    linkage_class_count: int
    weakly_reversible: bool
    stoich_basis: tuple[Vec, ...]
    orth_basis: tuple[Vec, ...]
    kinetic_basis: tuple[Vec, ...]
    deficiency: int

    @property
    def p(self) -> int:
        return len(self.complexes)

    @property
    def s(self) -> int:
        return len(self.stoich_basis)

    def to_json(self) -> dict:
        vec = lambda v: [str(x) for x in v]
        return {
            "p": self.p,
            "l": self.linkage_class_count,
            "s": self.s,
            "deficiency": self.deficiency,
            "weakly_reversible": self.weakly_reversible,
            "stoich_basis": [vec(v) for v in self.stoich_basis],
            "orth_basis": [vec(v) for v in self.orth_basis],
            "kinetic_basis": [vec(v) for v in self.kinetic_basis],
        }


def analyze_structure(net: DelayedNetwork) -> StructureReport:
    g = complex_graph(net)
    S = stoich_subspace(net)
    Sk = kinetic_subspace(net)
    assert all(in_span(v, S, net.n) for v in Sk), "kinetic subspace escaped S"
    l = len(linkage_classes(g))
    return StructureReport(
        complexes=tuple(net.complexes),
        linkage_class_count=l,
        weakly_reversible=is_weakly_reversible(g),
        stoich_basis=tuple(S),
        orth_basis=tuple(_orth(S, net.n)),
        kinetic_basis=tuple(Sk),
        deficiency=g.number_of_nodes() - l - len(S),
    )


def is_wr_deficiency_zero(net: DelayedNetwork) -> bool:
    return is_weakly_reversible(complex_graph(net)) and deficiency(net) == 0
