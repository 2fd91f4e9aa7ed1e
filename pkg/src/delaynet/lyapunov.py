"""Lyapunov functionals built from a classifier decomposition.

    V(psi) = sum_j w_j h(psi_j(0); xbar_j)
           + sum_terms c int_{-tau}^0 h(psi(s)^y; xbar^y) ds

with h(z; beta) = beta - z - z ln(beta / z).  Point weights are 1, or
1 / l_j when the decomposition carries a conjugacy matrix L.  Each delayed
share of a target reaction contributes an integral term with weight
k~^(tau) prod_j l_j^(-y~_j); each loop term with coefficient K contributes
weight K / l_j1 for y = c X_j1 (K when L is absent).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifier import StabilityCertificate, reconstruct_rhs
from .ddesim import Trajectory
from .invariants import as_segment
from .network import Complex
from .quadrature import segment_nodes

EQUILIBRIUM_TOL = 1e-10


def h(z, beta):
    """beta - z - z ln(beta / z); nonnegative, zero only at z = beta."""
    z = np.asarray(z, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(z <= 0) or np.any(beta <= 0):
        raise ValueError("h needs positive arguments")
    out = beta - z + z * np.log(z / beta)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PointTerm:
    species: int
    weight: float
    center: float


@dataclass(frozen=True)
class IntegralTerm:
    y: Complex
    delay: float
    weight: float
    center: float  # xbar^y
    source: str  # "quasi" or "loop"


@dataclass(frozen=True)
class LyapunovFunctional:
    n: int
    point_terms: tuple[PointTerm, ...]
    integral_terms: tuple[IntegralTerm, ...]
    xbar: tuple[float, ...]

    @property
    def tau_max(self) -> float:
        return max((t.delay for t in self.integral_terms), default=0.0)

    def to_json(self, species: Sequence[str] | None = None) -> dict:
        fmt = (lambda y: y.format(species)) if species else (lambda y: repr(y.terms))
        return {
            "xbar": list(self.xbar),
            "point_terms": [
                {"species": p.species, "weight": p.weight, "center": p.center} for p in self.point_terms
            ],
            "integral_terms": [
                {"complex": fmt(t.y), "delay": t.delay, "weight": t.weight, "source": t.source}
                for t in self.integral_terms
            ],
        }


def _power(x: Sequence[float], y: Complex) -> float:
    out = 1.0
    for j, c in y.terms:
        out *= float(x[j]) ** c
    return out


def build_functional(cert: StabilityCertificate, xbar: Sequence[float]) -> LyapunovFunctional:
    if not cert.accepted or cert.decomposition is None:
        raise ValueError("certificate does not certify stability")
    d = cert.decomposition
    target = d.target
    n = target.n
    xbar = np.asarray(xbar, dtype=float)
    if xbar.shape != (n,) or np.any(xbar <= 0):
        raise ValueError("center must be a positive state of the right length")
    L = [float(l) for l in d.l_vector]
    # the decomposition equals the source RHS, so check it directly
    resid = _decomp_rhs_at_constant(cert, xbar)
    if np.max(np.abs(resid)) > EQUILIBRIUM_TOL * max(1.0, float(np.max(xbar))):
        raise ValueError(f"center is not an equilibrium (|f| = {np.max(np.abs(resid)):.3g})")

    points = tuple(PointTerm(j, 1.0 / L[j] if d.L is not None else 1.0, float(xbar[j])) for j in range(n))
    terms = []
    for (i, tau), rate in sorted(d.quasi_rates.items(), key=lambda kv: (kv[0][0], float(kv[0][1]))):
        if tau == 0 or rate == 0:
            continue
        y = target.reactions[i].reactant
        scale = 1.0
        for j, c in y.terms:
            scale *= L[j] ** c
        terms.append(IntegralTerm(y, float(tau), float(rate) / scale, _power(xbar, y), "quasi"))
    for lt in d.loop_terms:
        if lt.delay == 0 or lt.K == 0:
            continue
        j1 = lt.y.single_species()
        w = float(lt.K) / L[j1] if d.L is not None and j1 is not None else float(lt.K)
        terms.append(IntegralTerm(lt.y, float(lt.delay), w, _power(xbar, lt.y), "loop"))
    return LyapunovFunctional(n, points, tuple(terms), tuple(float(v) for v in xbar))


def _decomp_rhs_at_constant(cert: StabilityCertificate, x: np.ndarray) -> np.ndarray:
    d = cert.decomposition
    delays = {tau for (_, tau) in d.quasi_rates} | {lt.delay for lt in d.loop_terms}
    past = {tau: list(x) for tau in delays}
    return np.asarray(reconstruct_rhs(d, list(x), past), dtype=float)


def evaluate(V: LyapunovFunctional, seg) -> float:
    """V on a history segment (or a constant state)."""
    seg = as_segment(seg, V.tau_max)
    x0 = np.asarray(seg(0.0), dtype=float)
    if np.any(x0 <= 0):
        raise ValueError("segment must be strictly positive")
    total = 0.0
    for p in V.point_terms:
        total += p.weight * h(x0[p.species], p.center)
    by_delay: dict[float, list[IntegralTerm]] = {}
    for t in V.integral_terms:
        by_delay.setdefault(t.delay, []).append(t)
    for tau, terms in by_delay.items():
        nodes, weights = segment_nodes(seg, -tau, 0.0)
        states = seg.eval_many(nodes)
        if np.any(states <= 0):
            raise ValueError("segment must be strictly positive")
        for t in terms:
            mono = np.ones(len(nodes))
            for j, c in t.y.terms:
                mono = mono * states[:, j] ** c
            total += t.weight * float(weights @ h(mono, t.center))
    return float(total)


def evaluate_constant(V: LyapunovFunctional, x: Sequence[float]) -> float:
    """Closed form of V for the constant history x."""
    x = np.asarray(x, dtype=float)
    total = sum(p.weight * h(x[p.species], p.center) for p in V.point_terms)
    total += sum(t.weight * t.delay * h(_power(x, t.y), t.center) for t in V.integral_terms)
    return float(total)


def lie_derivative_estimate(V: LyapunovFunctional, traj: Trajectory, t: float, delta: float | None = None) -> float:
    """Central difference of V along the trajectory with step ``delta``
    (default the integrator step)."""
    d = traj.h if delta is None else delta
    if t - d < 0 or t + d > traj.T + 1e-12:
        raise ValueError(f"t={t} too close to the ends of [0, {traj.T}]")
    return (evaluate(V, traj.segment(t + d)) - evaluate(V, traj.segment(t - d))) / (2 * d)


def trace(V: LyapunovFunctional, traj: Trajectory, times: Sequence[float]) -> np.ndarray:
    """Rows (t, V, dV/dt estimate); the derivative is nan at the ends."""
    rows = []
    for t in times:
        v = evaluate(V, traj.segment(float(t)))
        try:
            dv = lie_derivative_estimate(V, traj, float(t))
        except ValueError:
            dv = float("nan")
        rows.append((float(t), v, dv))
    return np.array(rows).reshape(-1, 3)


def trace_csv(rows: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "V", "dVdt"])
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()
