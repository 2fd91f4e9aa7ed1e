"""Dynamic equivalence and diagonal linear conjugacy between mass-action
systems, plus a search for conjugacy constants.

Convention: M with rates k is linearly conjugate to M~ with rates k~ under
L = diag(l) when, for every complex y that is a reactant in either system,

    sum_i k_i^(y) (y'_i - y) = sum_i~ kbar_i~^(y) L (y~'_i~ - y),
    kbar_i~^(y) = k~_i~ prod_j l_j^(-y_j).

Equivalently f(x) = L f~(L^-1 x).  ``literal=True`` drops the L on the
right-hand side, which only agrees with the above when L = I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .kinetics import reactant_aggregate
from .linalg import solve as exact_solve
from .network import Complex, ConjugacyWitness, DelayedNetwork, Number, reactant_groups

DEFAULT_TOL = 1e-9
KBAR_FLOOR = 1e-12


class ConjugacyInfeasible(Exception):
    """No positive target rates reproduce the source vector field.

    ``certificate`` maps each offending reactant complex to the minimal
    residual norm of its nonnegative least-squares problem.
    """

    def __init__(self, message: str, certificate: dict | None = None):
        super().__init__(message)
        self.certificate = certificate or {}


@dataclass
class ConjugacyReport:
    kind: str  # dynamically_equivalent | linearly_conjugate | neither
    residuals: dict[Complex, tuple]
    kbar: dict[tuple[Complex, int], Number]
    scale: float = 1.0
    species: tuple[str, ...] = field(default_factory=tuple)

    @property
    def residual_max(self) -> float:
        return max((abs(float(v)) for r in self.residuals.values() for v in r), default=0.0)

    @property
    def ok(self) -> bool:
        return self.kind != "neither"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "residual_max": self.residual_max,
            "kbar": [
                {"reactant": y.format(self.species), "target_reaction": i, "value": float(v)}
                for (y, i), v in sorted(self.kbar.items(), key=lambda kv: kv[0][1])
            ],
        }


def _check_species(M: DelayedNetwork, target: DelayedNetwork) -> None:
    if tuple(M.species) != tuple(target.species):
        raise ValueError(f"species mismatch: {M.species} vs {target.species}")


def _all_reactants(M: DelayedNetwork, target: DelayedNetwork) -> list[Complex]:
    out = dict.fromkeys(reactant_groups(M))
    out.update(dict.fromkeys(reactant_groups(target)))
    return list(out)


def kbar_values(witness: ConjugacyWitness) -> dict[tuple[Complex, int], Number]:
    """kbar_i~ = k~_i~ * prod_j l_j^(-y~_j) for every target reaction."""
    out = {}
    for i, rx in enumerate(witness.target.reactions):
        scale = 1
        for j, c in rx.reactant.terms:
            scale = scale * witness.L[j] ** c
        out[(rx.reactant, i)] = rx.rate / scale
    return out


def _tolerance(M: DelayedNetwork, tol: float) -> tuple[float, float]:
    zmax = 0.0
    for y in reactant_groups(M):
        zmax = max([zmax] + [abs(float(v)) for v in reactant_aggregate(M, y)])
    scale = max(1.0, zmax)
    return tol * scale, scale


def check_dynamic_equivalence(
    M: DelayedNetwork, target: DelayedNetwork, tol: float = DEFAULT_TOL
) -> ConjugacyReport:
    """Z^(y) of M against Z~^(y) of the target for every y in RC u RC~."""
    _check_species(M, target)
    residuals = {}
    for y in _all_reactants(M, target):
        z = reactant_aggregate(M, y)
        zt = reactant_aggregate(target, y)
        residuals[y] = tuple(a - b for a, b in zip(z, zt))
    thr, scale = _tolerance(M, tol)
    kbar = {(rx.reactant, i): rx.rate for i, rx in enumerate(target.reactions)}
    report = ConjugacyReport("neither", residuals, kbar, scale, M.species)
    if report.residual_max <= thr:
        report.kind = "dynamically_equivalent"
    return report


def conjugate_aggregate(witness: ConjugacyWitness, y: Complex, literal: bool = False) -> tuple:
    """sum_i~ kbar_i~^(y) L (y~'_i~ - y) for one reactant complex."""
    target = witness.target
    n = target.n
    kbar = kbar_values(witness)
    like = target.reactions[0].rate if target.reactions else 0
    out = [0 * like for _ in range(n)]
    yv = y.vector(n)
    for i, rx in enumerate(target.reactions):
        if rx.reactant != y:
            continue
        yp = rx.product.vector(n)
        for j in range(n):
            lj = 1 if literal else witness.L[j]
            out[j] += kbar[(y, i)] * lj * (yp[j] - yv[j])
    return tuple(out)


def check_linear_conjugacy(
    M: DelayedNetwork,
    witness: ConjugacyWitness,
    tol: float = DEFAULT_TOL,
    literal: bool = False,
) -> ConjugacyReport:
    _check_species(M, witness.target)
    if any(not l > 0 for l in witness.L):
        raise ValueError("L entries must be positive")
    if len(witness.L) != M.n:
        raise ValueError("L has the wrong length")
    residuals = {}
    for y in _all_reactants(M, witness.target):
        z = reactant_aggregate(M, y)
        rhs = conjugate_aggregate(witness, y, literal=literal)
        residuals[y] = tuple(a - b for a, b in zip(z, rhs))
    thr, scale = _tolerance(M, tol)
    report = ConjugacyReport("neither", residuals, kbar_values(witness), scale, M.species)
    if report.residual_max <= thr:
        report.kind = "dynamically_equivalent" if witness.is_identity else "linearly_conjugate"
    return report


# --------------------------------------------------------------------------
# search


def _inner_solve(
    M: DelayedNetwork, structure: DelayedNetwork, L: Sequence[float], exact: bool
) -> tuple[dict[int, Number], dict[Complex, float]]:
    """Positive kbar per target reaction, plus per-reactant residual norms."""
    n = M.n
    targets = reactant_groups(structure)
    kbar: dict[int, Number] = {}
    resid: dict[Complex, float] = {}
    _, scale = _tolerance(M, 1.0)
    for y in _all_reactants(M, structure):
        z = reactant_aggregate(M, y)
        idxs = targets.get(y, [])
        yv = y.vector(n)
        cols = [
            tuple(L[j] * (structure.reactions[i].product.vector(n)[j] - yv[j]) for j in range(n))
            for i in idxs
        ]
        if not idxs:
            resid[y] = float(np.linalg.norm(np.asarray(z, dtype=float))) / scale
            continue
        sol = None
        if exact:
            try:
                sol = exact_solve(cols, z)
            except ValueError:
                sol = None
            if sol is not None and all(v > 0 for v in sol):
                for i, v in zip(idxs, sol):
                    kbar[i] = v
                resid[y] = 0.0
                continue
        A = np.array(cols, dtype=float).T.reshape(n, len(idxs))
        b = np.asarray(z, dtype=float) - A @ np.full(len(idxs), KBAR_FLOOR)
        u, rnorm = nnls(A, b)
        for i, v in zip(idxs, u + KBAR_FLOOR):
            kbar[i] = float(v)
        resid[y] = float(rnorm) / scale
    return kbar, resid


def _witness_from_kbar(structure, L, kbar, as_fraction: bool) -> ConjugacyWitness:
    reactions = []
    for i, rx in enumerate(structure.reactions):
        scale = 1
        for j, c in rx.reactant.terms:
            scale = scale * L[j] ** c
        rate = kbar[i] * scale
        rate = Fraction(rate) if as_fraction else float(rate)
        reactions.append(type(rx)(rx.reactant, rx.product, rate, rx.delay))
    target = DelayedNetwork(structure.species, tuple(reactions))
    return ConjugacyWitness(target, tuple(L))


def find_conjugacy(
    M: DelayedNetwork,
    structure: DelayedNetwork,
    L_fixed: Sequence[Number] | None = None,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = 400,
) -> ConjugacyWitness:
    """Target rates (and, without ``L_fixed``, a diagonal L) making M
    conjugate to a network with the given reaction arrows.

    With ``L_fixed`` the problem is linear in kbar and solved directly
    (exactly when each reactant's target columns are independent).  Without
    it, a coordinate pattern search over log L wraps the linear problem; this
    is a heuristic and may miss feasible witnesses.
    """
    _check_species(M, structure)
    exact = all(isinstance(rx.rate, Fraction) for rx in M.reactions)

    def objective(L):
        kbar, resid = _inner_solve(M, structure, L, exact=False)
        return sum(r * r for r in resid.values()), kbar, resid

    if L_fixed is not None:
        L = tuple(Fraction(l) if exact else float(l) for l in L_fixed)
        if any(not l > 0 for l in L):
            raise ValueError("L entries must be positive")
        kbar, resid = _inner_solve(M, structure, L, exact=exact)
        bad = {y: r for y, r in resid.items() if r > tol}
        if bad:
            raise ConjugacyInfeasible("no positive target rates for fixed L", bad)
    else:
        logL = np.zeros(M.n)
        best, kbar, resid = objective(np.exp(logL))
        step = 1.0
        sweeps = 0
        while best > tol * tol and step > 1e-13 and sweeps < max_sweeps:
            sweeps += 1
            improved = False
            for j in range(M.n):
                cands = []
                for sgn in (-1.0, 1.0):
                    trial = logL.copy()
                    trial[j] += sgn * step
                    val, kb, rs = objective(np.exp(trial))
                    cands.append((val, tuple(trial), kb, rs))
                cands.sort(key=lambda c: (c[0], c[1]))
                if cands[0][0] < best:
                    best, logL = cands[0][0], np.array(cands[0][1])
                    kbar, resid = cands[0][2], cands[0][3]
                    improved = True
            if not improved:
                step /= 2
        L = tuple(float(v) for v in np.exp(logL))
        if best > tol * tol:
            raise ConjugacyInfeasible(
                "L search did not reach a conjugacy (heuristic)",
                {y: r for y, r in resid.items() if r > tol},
            )
    witness = _witness_from_kbar(structure, L, kbar, as_fraction=exact)
    report = check_linear_conjugacy(M, witness, tol=tol)
    if not report.ok:
        raise ConjugacyInfeasible(
            f"witness failed verification (residual {report.residual_max:.3g})",
            {y: max(abs(float(v)) for v in r) for y, r in report.residuals.items()},
        )
    return witness
