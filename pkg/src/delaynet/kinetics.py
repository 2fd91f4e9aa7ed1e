"""Mass-action rates, delayed and non-delayed right-hand sides, and the
per-reactant / per-delay aggregate vectors used by the stability checks.

Aggregates keep the numeric type of the rate constants, so a network
parsed with ``exact=True`` yields exact :class:`~fractions.Fraction` tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .linalg import row_basis, to_fraction
from .network import Complex, DelayedNetwork, Number, reactant_groups

Vector = tuple  # tuple of numbers, length n


def monomial(x: Sequence[float], y: Complex | Sequence[int]) -> float:
    """x^y = prod_j x_j^{y_j}, with 0^0 = 1."""
    if isinstance(y, Complex):
        out = 1
        for j, c in y.terms:
            out = out * x[j] ** c
        return out
    out = 1
    for xj, c in zip(x, y):
        if c:
            out = out * xj ** c
    return out


class CompiledRHS:
    """Vectorised evaluator of the delayed right-hand side.

    Reactions are bucketed by delay so one monomial evaluation per bucket
    suffices.  Zero-delay reactions read the current state.
    """

    def __init__(self, net: DelayedNetwork):
        self.net = net
        n = net.n
        self.Y = np.array([rx.reactant.vector(n) for rx in net.reactions], dtype=float).reshape(net.r, n)
        self.Yp = np.array([rx.product.vector(n) for rx in net.reactions], dtype=float).reshape(net.r, n)
        self.k = np.array([float(rx.rate) for rx in net.reactions], dtype=float)
        self.delays = tuple(float(t) for t in net.delays)
        dl = np.array([float(rx.delay) for rx in net.reactions])
        self.buckets = [np.flatnonzero(dl == t) for t in self.delays]

    def rates(self, x: np.ndarray) -> np.ndarray:
        """k_i x^{y_i} for every reaction."""
        return self.k * np.prod(np.power(x[None, :], self.Y), axis=1)

    def ode(self, x: np.ndarray) -> np.ndarray:
        return (self.Yp - self.Y).T @ self.rates(x)

    def dde(self, x_now: np.ndarray, x_delayed: Sequence[np.ndarray]) -> np.ndarray:
        """``x_delayed[m]`` is the state at ``t - self.delays[m]``."""
        now = self.rates(x_now)
        out = -(self.Y.T @ now)
        for idx, t, xd in zip(self.buckets, self.delays, x_delayed):
            past = now[idx] if t == 0.0 else self.rates(xd)[idx]
            out += self.Yp[idx].T @ past
        return out


def ode_rhs(net: DelayedNetwork, x: Sequence[float]) -> np.ndarray:
    """Non-delayed mass-action vector field sum_i k_i x^{y_i} (y'_i - y_i)."""
    return CompiledRHS(net).ode(np.asarray(x, dtype=float))


def dde_rhs(
    net: DelayedNetwork,
    x_now: Sequence[float],
    x_delayed: Mapping[Number, Sequence[float]],
) -> np.ndarray:
    """Delayed vector field: consumption at ``t``, production from ``t - tau_i``.

    ``x_delayed`` maps each distinct delay to the state at ``t - delay``; the
    zero delay may be omitted (it reads ``x_now``).
    """
    rhs = CompiledRHS(net)
    xn = np.asarray(x_now, dtype=float)
    past = []
    for t in net.delays:
        if t in x_delayed:
            past.append(np.asarray(x_delayed[t], dtype=float))
        elif t == 0:
            past.append(xn)
        else:
            raise KeyError(f"no delayed state supplied for delay {t}")
    return rhs.dde(xn, past)


# --------------------------------------------------------------------------
# aggregates


def _zeros(n: int, like: Number) -> list:
    return [0 * like for _ in range(n)]


@dataclass(frozen=True)
class AggregateTable:
    """Per-reactant and per-(reactant, delay) sums.

    ``Z[y]``      = sum_i k_i^(y) (y'_i - y)
    ``Ztau[y,t]`` = sum_i k_i^(y,t) (y'_i - y)
    ``Y[y]``      = sum_i k_i^(y) y'_i
    ``Ytau[y,t]`` = sum_i k_i^(y,t) y'_i
    ``K[y]``, ``Ktau[y,t]`` = the matching rate sums.
    """

    Z: dict[Complex, Vector]
    Ztau: dict[tuple[Complex, Number], Vector]
    Y: dict[Complex, Vector]
    Ytau: dict[tuple[Complex, Number], Vector]
    K: dict[Complex, Number]
    Ktau: dict[tuple[Complex, Number], Number]

    def delays_of(self, y: Complex) -> list[Number]:
        return sorted(t for (c, t) in self.Ztau if c == y)


def aggregates(net: DelayedNetwork) -> AggregateTable:
    n = net.n
    Z: dict = {}
    Ztau: dict = {}
    Y: dict = {}
    Ytau: dict = {}
    K: dict = {}
    Ktau: dict = {}
    for y, idxs in reactant_groups(net).items():
        like = net.reactions[idxs[0]].rate
        Z[y], Y[y] = _zeros(n, like), _zeros(n, like)
        K[y] = 0 * like
        for i in idxs:
            rx = net.reactions[i]
            key = (y, rx.delay)
            if key not in Ztau:
                Ztau[key], Ytau[key] = _zeros(n, like), _zeros(n, like)
                Ktau[key] = 0 * like
            v = net.reaction_vector(i)
            yp = rx.product.vector(n)
            for j in range(n):
                Z[y][j] += rx.rate * v[j]
                Ztau[key][j] += rx.rate * v[j]
                Y[y][j] += rx.rate * yp[j]
                Ytau[key][j] += rx.rate * yp[j]
            K[y] += rx.rate
            Ktau[key] += rx.rate
    freeze = lambda d: {k: tuple(v) for k, v in d.items()}
    return AggregateTable(freeze(Z), freeze(Ztau), freeze(Y), freeze(Ytau), K, Ktau)


def reactant_aggregate(net: DelayedNetwork, y: Complex):
    """Z^(y) for one complex; the zero vector when y is not a reactant."""
    like = net.reactions[0].rate if net.reactions else 0
    out = _zeros(net.n, like)
    for i, rx in enumerate(net.reactions):
        if rx.reactant == y:
            v = net.reaction_vector(i)
            for j in range(net.n):
                out[j] += rx.rate * v[j]
    return tuple(out)


# --------------------------------------------------------------------------
# one-dimensional reaction frames


@dataclass(frozen=True)
class OneDimFrame:
    """All reaction vectors out of ``y`` are multiples a_i * w of one vector.

    ``w`` has first nonzero entry 1; ``zero_span`` marks the degenerate case
    where every vector is zero (then ``w`` is None and all a_i = 0).
    """

    y: Complex
    w: tuple[Fraction, ...] | None
    a: dict[int, Fraction]
    zero_span: bool = False


def parallel_coefficient(w: Sequence[Fraction], v: Sequence) -> Fraction | None:
    """a with v = a * w, or None when v is not parallel to w."""
    j0 = next(j for j, x in enumerate(w) if x != 0)
    a = to_fraction(v[j0]) / w[j0]
    if all(to_fraction(vj) == a * wj for vj, wj in zip(v, w)):
        return a
    return None


def one_dim_frame(net: DelayedNetwork, y: Complex) -> OneDimFrame | None:
    """Frame of span{v_i : y_i = y}, or None if that span is not 1-dimensional."""
    idxs = reactant_groups(net).get(y)
    if not idxs:
        raise ValueError(f"{y.format(net.species)} is not a reactant complex")
    vecs = [net.reaction_vector(i) for i in idxs]
    basis = row_basis(vecs, net.n)
    if len(basis) == 0:
        return OneDimFrame(y, None, {i: Fraction(0) for i in idxs}, zero_span=True)
    if len(basis) > 1:
        return None
    b = basis[0]
    j0 = next(j for j, x in enumerate(b) if x != 0)
    w = tuple(x / b[j0] for x in b)
    a = {i: parallel_coefficient(w, v) for i, v in zip(idxs, vecs)}
    return OneDimFrame(y, w, a)
