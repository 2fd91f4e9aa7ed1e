"""Conserved functionals of delayed trajectories, the invariant sets they
cut out, and the positive equilibrium inside each set.

For a history psi on [-tau_max, 0] the vector

    g(psi)   = psi(0) + sum_i k_i       int_{-tau_i}^0 psi(s)^{y_i} ds  y_i
    g^n(psi) = psi(0) + sum_i k_i D_i   int_{-tau_i}^0 psi(s)^{y_i} ds  y_i

gives conserved quantities b^T g (b orthogonal to every per-delay
aggregate) and b^T g^n (b orthogonal to L S~, with D_i the row sums of
the delta table below).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .conjugacy import kbar_values
from .ddesim import HistorySegment, Trajectory
from .kinetics import CompiledRHS
from .linalg import orth_complement, row_basis
from .network import Complex, ConjugacyWitness, DelayedNetwork, Number, reactant_groups
from .quadrature import integrate
from .structure import stoich_subspace

KINDS = ("scc", "new_scc_de12", "new_scc_de3")


class EquilibriumError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


def as_segment(psi, tau_max: float):
    """Constant states become constant segments; segments pass through."""
    if hasattr(psi, "eval_many"):
        return psi
    return HistorySegment.constant(np.asarray(psi, dtype=float), tau_max)


def _monomials(Y: np.ndarray):
    return lambda states: np.prod(np.power(np.maximum(states, 0.0)[:, None, :], Y[None, :, :]), axis=2)


def _integrals(net: DelayedNetwork, seg) -> np.ndarray:
    """int_{-tau_i}^0 psi(s)^{y_i} ds for every reaction."""
    rhs = CompiledRHS(net)
    out = np.zeros(net.r)
    for tau, idx in zip(rhs.delays, rhs.buckets):
        if tau == 0 or idx.size == 0:
            continue
        vals = integrate(seg, _monomials(rhs.Y[idx]), -tau, 0.0)
        out[idx] = vals
    return out


def _weighted_g(net: DelayedNetwork, psi, weights: np.ndarray) -> np.ndarray:
    seg = as_segment(psi, net.tau_max)
    rhs = CompiledRHS(net)
    if hasattr(seg, "domain") and seg.domain[0] > -net.tau_max + 1e-12:
        raise ValueError("history is shorter than the largest delay")
    ints = _integrals(net, seg)
    return np.asarray(seg(0.0), dtype=float) + rhs.Y.T @ (rhs.k * weights * ints)


def g_eval(net: DelayedNetwork, psi) -> np.ndarray:
    return _weighted_g(net, psi, np.ones(net.r))


def g_constant(net: DelayedNetwork, x: Sequence[float], weights=None) -> np.ndarray:
    """Closed form of g (or g^n) for the constant history x."""
    rhs = CompiledRHS(net)
    x = np.asarray(x, dtype=float)
    w = np.ones(net.r) if weights is None else np.asarray(weights, dtype=float)
    tau = np.array([float(rx.delay) for rx in net.reactions])
    return x + rhs.Y.T @ (w * tau * rhs.rates(x))


# --------------------------------------------------------------------------
# delta table


@dataclass
class DeltaTable:
    """delta[(j, i)] for species j produced by source reaction i, and the
    normalisers lbar[(y, j)] they divide by."""

    delta: dict[tuple[int, int], Number]
    lbar: dict[tuple[Complex, int], Number]
    r: int

    def row_sums(self) -> list[Number]:
        out: list[Number] = [0] * self.r
        for (j, i), v in self.delta.items():
            out[i] = out[i] + v
        return out

    def perturbed(self, j: int, i: int, factor: float) -> "DeltaTable":
        d = dict(self.delta)
        d[(j, i)] = d[(j, i)] * factor
        return DeltaTable(d, dict(self.lbar), self.r)


def delta_coefficients(M: DelayedNetwork, witness: ConjugacyWitness) -> DeltaTable:
    """delta_ji = y'_ji / lbar_j^(y) with, for y = c X_j1,

        lbar_j = sum_{i~: y~'_ji~ != 0} kbar l_j y~'_ji~ / (l_j1 sum kbar)   (j != j1)
        lbar_j1 = c.
    """
    target, L = witness.target, witness.L
    kbar = kbar_values(witness)
    tgroups = reactant_groups(target)
    delta: dict = {}
    lbar: dict = {}
    for i, rx in enumerate(M.reactions):
        y = rx.reactant
        j1 = y.single_species()
        if j1 is None:
            raise ValueError(f"reactant {y.format(M.species)} is not a multiple of a single species")
        for j, c in rx.product.terms:
            if (y, j) not in lbar:
                if j == j1:
                    lbar[(y, j)] = y[j1]
                else:
                    prods = [t for t in tgroups.get(y, []) if target.reactions[t].product[j] != 0]
                    if not prods:
                        raise ValueError(
                            f"no target reaction from {y.format(M.species)} produces "
                            f"{M.species[j]}: conjugacy defect"
                        )
                    num = sum(kbar[(y, t)] * L[j] * target.reactions[t].product[j] for t in prods)
                    den = L[j1] * sum(kbar[(y, t)] for t in prods)
                    lbar[(y, j)] = num / den
            delta[(j, i)] = c / lbar[(y, j)]
    return DeltaTable(delta, lbar, M.r)


def gn_eval(net: DelayedNetwork, table: DeltaTable, psi) -> np.ndarray:
    return _weighted_g(net, psi, np.array([float(v) for v in table.row_sums()]))


def cu_b(net: DelayedNetwork, table: DeltaTable, psi, b: Sequence[float]) -> float:
    return float(np.dot(np.asarray(b, dtype=float), gn_eval(net, table, psi)))


# --------------------------------------------------------------------------
# invariant sets


@dataclass
class InvariantSetSpec:
    kind: str
    basis: list[tuple]
    levels: list[float]
    delta: DeltaTable | None = None

    def weights(self, net: DelayedNetwork) -> np.ndarray:
        if self.delta is None:
            return np.ones(net.r)
        return np.array([float(v) for v in self.delta.row_sums()])

    def functional(self, net: DelayedNetwork, psi) -> np.ndarray:
        """b^T g (or b^T g^n) for every basis vector b."""
        B = np.array([[float(v) for v in b] for b in self.basis], dtype=float).reshape(-1, net.n)
        return B @ _weighted_g(net, psi, self.weights(net))

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "basis": [[str(v) for v in b] for b in self.basis],
            "levels": list(self.levels),
        }
        if self.delta is not None:
            out["delta"] = [
                {"species": j, "reaction": i, "value": str(v)}
                for (j, i), v in sorted(self.delta.delta.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            ]
        return out


def target_orth_basis(witness: ConjugacyWitness, scaled: bool) -> list[tuple]:
    """Basis of S~^perp, or of (L S~)^perp when ``scaled``."""
    t = witness.target
    vecs = [t.reaction_vector(i) for i in range(t.r)]
    if scaled:
        vecs = [tuple(Fraction(witness.L[j]) * v[j] for j in range(t.n)) for v in vecs]
    return orth_complement(row_basis(vecs, t.n), t.n)


def invariant_set(
    net: DelayedNetwork,
    witness: ConjugacyWitness | None,
    psi,
    kind: str,
    delta: DeltaTable | None = None,
) -> InvariantSetSpec:
    if kind == "scc":
        basis = orth_complement(stoich_subspace(net), net.n)
        spec = InvariantSetSpec(kind, basis, [])
    elif kind == "new_scc_de12":
        if witness is None:
            raise ValueError("new_scc_de12 needs a target network")
        spec = InvariantSetSpec(kind, target_orth_basis(witness, scaled=False), [])
    elif kind == "new_scc_de3":
        if witness is None:
            raise ValueError("new_scc_de3 needs a witness")
        table = delta if delta is not None else delta_coefficients(net, witness)
        spec = InvariantSetSpec(kind, target_orth_basis(witness, scaled=True), [], table)
    else:
        raise ValueError(f"unknown invariant-set kind {kind!r}")
    spec.levels = [float(v) for v in spec.functional(net, psi)] if spec.basis else []
    return spec


# --------------------------------------------------------------------------
# quasi delays


def quasi_delay(
    M: DelayedNetwork, witness: ConjugacyWitness, y: Complex, augment_loops: bool = True
) -> Number:
    """Rate-weighted delay of the reactions out of y, normalised by the
    target rates out of y.  With a non-identity L each term is scaled by
    l_j1^(-1) L^y for y = c X_j1.  When y is not a target reactant, a
    loop y -> y with rate sum_i k_i^(y) is added (``augment_loops``)."""
    groups = reactant_groups(M)
    if y not in groups:
        raise ValueError(f"{y.format(M.species)} is not a source reactant")
    L = witness.L
    scale = 1
    if not witness.is_identity:
        for j, c in y.terms:
            scale = scale * L[j] ** c / L[j]
    num = sum(M.reactions[i].rate * scale * M.reactions[i].delay for i in groups[y])
    den = sum(witness.target.reactions[i].rate for i in reactant_groups(witness.target).get(y, []))
    if not den:
        if not augment_loops:
            raise ValueError(f"{y.format(M.species)} is not a target reactant")
        den = sum(M.reactions[i].rate for i in groups[y])
    return num / den


# --------------------------------------------------------------------------
# equilibria


def _newton(F, J, u0, maxit=100, tol=1e-13):
    u = np.array(u0, dtype=float)
    r = F(u)
    nr = float(np.max(np.abs(r))) if r.size else 0.0
    for _ in range(maxit):
        if nr <= tol:
            return u, nr
        step = np.linalg.lstsq(J(u), -r, rcond=None)[0]
        lam = 1.0
        while True:
            un = u + lam * step
            rn = F(un)
            nrn = float(np.max(np.abs(rn)))
            if np.isfinite(nrn) and nrn < nr or lam < 1e-10:
                break
            lam /= 2
        u, r, nr = un, rn, nrn
    return u, nr


def reference_equilibrium(witness: ConjugacyWitness, tol: float = 1e-12) -> np.ndarray:
    """A positive equilibrium of the source: L times the equilibrium of the
    target in the compatibility class of the all-ones state."""
    t = witness.target
    rhs = CompiledRHS(t)
    S = np.array([[float(v) for v in b] for b in stoich_subspace(t)]).reshape(-1, t.n)
    B = np.array([[float(v) for v in b] for b in orth_complement(stoich_subspace(t), t.n)]).reshape(-1, t.n)
    V = rhs.Yp - rhs.Y
    one = np.ones(t.n)

    def F(u):
        x = np.exp(u)
        return np.concatenate((S @ rhs.ode(x), B @ (x - one)))

    def J(u):
        x = np.exp(u)
        rates = rhs.rates(x)
        jf = (V.T * rates) @ rhs.Y
        return np.vstack((S @ jf, B * x))

    u, res = _newton(F, J, np.zeros(t.n))
    if res > tol * max(1.0, float(np.max(rhs.k))):
        raise EquilibriumError("target equilibrium solve did not converge", res)
    return np.array([float(l) for l in witness.L]) * np.exp(u)


@dataclass
class DegenerateSet:
    """Points x* exp(V^T c) for coefficient vectors c."""

    x_star: np.ndarray
    basis: np.ndarray

    def __call__(self, c: Sequence[float]) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if self.basis.size == 0:
            return self.x_star.copy()
        return self.x_star * np.exp(self.basis.T @ c)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def degenerate_set(x_star: Sequence[float], basis: Sequence[Sequence]) -> DegenerateSet:
    x = np.asarray(x_star, dtype=float)
    V = np.array([[float(v) for v in b] for b in basis], dtype=float).reshape(-1, x.size)
    return DegenerateSet(x, V)


def equilibrium_in_set(
    net: DelayedNetwork,
    witness: ConjugacyWitness,
    spec: InvariantSetSpec,
    x_star: Sequence[float] | None = None,
    c0: Sequence[float] | None = None,
    tol: float = 1e-12,
) -> np.ndarray:
    """The equilibrium x* exp(V^T c), V a basis of S~^perp, whose functional
    values match the spec's levels."""
    xs = reference_equilibrium(witness) if x_star is None else np.asarray(x_star, dtype=float)
    V = np.array(
        [[float(v) for v in b] for b in target_orth_basis(witness, scaled=False)], dtype=float
    ).reshape(-1, net.n)
    B = np.array([[float(v) for v in b] for b in spec.basis], dtype=float).reshape(-1, net.n)
    if V.shape[0] != B.shape[0]:
        raise ValueError(
            f"invariant set has {B.shape[0]} functionals but the equilibrium family has "
            f"dimension {V.shape[0]}"
        )
    if V.shape[0] == 0:
        return xs
    rhs = CompiledRHS(net)
    w = spec.weights(net)
    tau = np.array([float(rx.delay) for rx in net.reactions])
    coef = w * tau  # per-reaction multiplier of k x^y in the constant closed form
    W = np.asarray(spec.levels, dtype=float)

    def G(x):
        return x + rhs.Y.T @ (coef * rhs.rates(x))

    def F(c):
        return B @ G(xs * np.exp(V.T @ c)) - W

    def J(c):
        x = xs * np.exp(V.T @ c)
        r = coef * rhs.rates(x)
        inner = np.diag(x) + (rhs.Y.T * r) @ rhs.Y
        return B @ inner @ V.T

    start = np.zeros(V.shape[0]) if c0 is None else np.asarray(c0, dtype=float)
    c, res = _newton(F, J, start, tol=tol * max(1.0, float(np.max(np.abs(W)))))
    if res > 1e-9 * max(1.0, float(np.max(np.abs(W)))):
        raise EquilibriumError("equilibrium solve did not converge in 100 iterations", res)
    return xs * np.exp(V.T @ c)


# --------------------------------------------------------------------------
# trajectory checks and exports


def conservation_check(
    traj: Trajectory, spec: InvariantSetSpec, samples: int = 200
) -> float:
    """Largest |functional(x_t) - level| over evenly spaced t in [0, T]."""
    if not spec.basis:
        return 0.0
    W = np.asarray(spec.levels, dtype=float)
    drift = 0.0
    for t in np.linspace(0.0, traj.T, samples):
        vals = spec.functional(traj.net, traj.segment(float(t)))
        drift = max(drift, float(np.max(np.abs(vals - W))))
    return drift


def level_surface_csv(
    net: DelayedNetwork,
    spec: InvariantSetSpec,
    grid: Sequence[Sequence[float]],
    free: int | None = None,
    index: int = 0,
    upper: float = 1e3,
) -> str:
    """Constant states on the level set of functional ``index``.

    ``grid`` lists axes for every species except ``free`` (default the last
    one); the free coordinate is solved by bracketing on [0, upper].  Points
    with no solution are written as nan.
    """
    n = net.n
    free = n - 1 if free is None else free
    axes = [j for j in range(n) if j != free]
    b = np.array([float(v) for v in spec.basis[index]])
    w = spec.weights(net)
    level = spec.levels[index]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([f"x_{s}" for s in net.species])
    for point in np.stack(np.meshgrid(*grid, indexing="ij"), axis=-1).reshape(-1, len(axes)):
        x = np.zeros(n)
        x[axes] = point

        def fn(z):
            x[free] = z
            return float(b @ g_constant(net, x, w)) - level

        try:
            z = brentq(fn, 0.0, upper)
        except ValueError:
            z = float("nan")
        x[free] = z
        wr.writerow([repr(float(v)) for v in x])
    return buf.getvalue()
