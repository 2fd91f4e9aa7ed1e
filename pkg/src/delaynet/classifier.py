"""Stability classification of delayed mass-action networks that are
dynamically equivalent or linearly conjugate to a complex-balanced target.

Every accepting check returns a :class:`Decomposition` that rewrites the
delayed right-hand side of the source network as

    sum_(i~,tau) k~_i~^(tau) prod_j l_j^(-y~_j) [x(t-tau)^y~ L y~' - x(t)^y~ L y~]
  + sum_(y,tau)  K^(y,tau) [x(t-tau)^y - x(t)^y] y

that is, a target network whose reactions are split over several delays
plus nonnegative "loop" terms y -> y.  The Lyapunov module turns this into
a functional.  :func:`classify` runs the checks in a fixed order and keeps
the first certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .conjugacy import (
    DEFAULT_TOL,
    check_dynamic_equivalence,
    check_linear_conjugacy,
    kbar_values,
)
from .kinetics import OneDimFrame, aggregates, monomial, parallel_coefficient
from .linalg import rank, row_basis, solve as exact_solve, to_fraction
from .network import (
    Complex,
    ConjugacyWitness,
    DelayedNetwork,
    Number,
    reactant_groups,
    serialize_witness,
    strip_delays,
)
from .structure import is_wr_deficiency_zero

THEOREMS = (
    "lcdcbmas",
    "thm1",
    "thm2_case1",
    "thm2_case2",
    "cor1_case1",
    "cor1_case2",
    "thm3",
    "none",
)


class Rejection(Exception):
    def __init__(self, check: str, reasons: Sequence[str]):
        self.check = check
        self.reasons = list(reasons)
        super().__init__(f"{check}: " + "; ".join(self.reasons))


@dataclass(frozen=True)
class LoopTerm:
    """K * [x(t - delay)^y - x(t)^y] * y."""

    y: Complex
    delay: Number
    K: Number


@dataclass
class Decomposition:
    """Split of the delayed RHS into quasi-delayed target terms and loops.

    ``quasi_rates[(i, tau)]`` is the share of target reaction ``i`` acting
    with delay ``tau``; the shares of one reaction sum to its rate in
    ``target``.  ``target`` is the network actually used, which differs
    from the witness target only when a sign split rescales rates.
    ``coefficients`` holds the per-reactant loop coefficient K^(y) for the
    checks that define one, including values that produce no loop term.
    """

    target: DelayedNetwork
    quasi_rates: dict[tuple[int, Number], Number]
    loop_terms: list[LoopTerm]
    L: tuple[Number, ...] | None = None
    residual_kind: str = "zero-by-construction"
    delta: dict = field(default_factory=dict)
    cases: dict = field(default_factory=dict)
    coefficients: dict = field(default_factory=dict)

    @property
    def l_vector(self) -> tuple[Number, ...]:
        return self.L if self.L is not None else tuple(1 for _ in self.target.species)

    def rate_sums(self) -> dict[int, Number]:
        out: dict[int, Number] = {}
        for (i, _), v in self.quasi_rates.items():
            out[i] = out.get(i, 0) + v
        return out


@dataclass
class StabilityCertificate:
    theorem: str
    decomposition: Decomposition | None
    witness: ConjugacyWitness | None
    notes: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.theorem != "none"

    def to_json(self) -> dict:
        out = {
            "theorem": self.theorem,
            "witness": serialize_witness(self.witness) if self.witness else None,
            "quasi_rates": [],
            "loop_terms": [],
            "rejections": list(self.notes),
        }
        d = self.decomposition
        if d is not None:
            sp = d.target.species
            for (i, tau), v in sorted(d.quasi_rates.items(), key=lambda kv: (kv[0][0], float(kv[0][1]))):
                rx = d.target.reactions[i]
                out["quasi_rates"].append(
                    {
                        "reaction": i,
                        "reactant": rx.reactant.format(sp),
                        "product": rx.product.format(sp),
                        "delay": str(tau),
                        "rate": str(v),
                    }
                )
            for lt in d.loop_terms:
                out["loop_terms"].append(
                    {"complex": lt.y.format(sp), "delay": str(lt.delay), "K": str(lt.K)}
                )
        return out


# --------------------------------------------------------------------------
# helpers


def _is_exact(*nets: DelayedNetwork) -> bool:
    return all(isinstance(rx.rate, Fraction) for net in nets for rx in net.reactions)


def _slack(M: DelayedNetwork, tol: float) -> float:
    """Absolute tolerance used for sign tests in float mode (0 when exact)."""
    if _is_exact(M):
        return 0.0
    kmax = max((abs(float(rx.rate)) for rx in M.reactions), default=1.0)
    return tol * max(1.0, kmax)


def _nonneg(v: Number, slack: float) -> tuple[bool, Number]:
    if v >= 0:
        return True, v
    if -v <= slack:
        return True, 0 * v
    return False, v


def _zero_delay(net: DelayedNetwork) -> Number:
    return Fraction(0) if _is_exact(net) else 0.0


def _add(d: dict, key, v) -> None:
    d[key] = d[key] + v if key in d else v


def _fmt(y: Complex, species) -> str:
    return y.format(species)


def _orphan_targets(M: DelayedNetwork, target: DelayedNetwork, quasi: dict) -> None:
    """Target reactions whose reactant is not a source reactant run at delay 0."""
    rc = set(reactant_groups(M))
    zero = _zero_delay(M)
    for i, rx in enumerate(target.reactions):
        if rx.reactant not in rc:
            _add(quasi, (i, zero), rx.rate)


def _require_equivalence(M, target, tol, check):
    rep = check_dynamic_equivalence(M, target, tol)
    if not rep.ok:
        raise Rejection(check, [f"not dynamically equivalent (residual {rep.residual_max:.3g})"])


# --------------------------------------------------------------------------
# RHS reconstruction


def reconstruct_rhs(
    decomp: Decomposition,
    x_now: Sequence,
    x_delayed: Mapping[Number, Sequence],
) -> list:
    """Evaluate the decomposition.  Works with floats or Fractions."""
    target = decomp.target
    n = target.n
    L = decomp.l_vector

    def past(tau):
        if tau == 0:
            return x_now
        return x_delayed[tau]

    out = [0 * x_now[0] for _ in range(n)] if n else []
    for (i, tau), rate in decomp.quasi_rates.items():
        rx = target.reactions[i]
        scale = 1
        for j, c in rx.reactant.terms:
            scale = scale * L[j] ** c
        w = rate / scale
        md = monomial(past(tau), rx.reactant)
        mn = monomial(x_now, rx.reactant)
        for j, c in rx.product.terms:
            out[j] += w * md * L[j] * c
        for j, c in rx.reactant.terms:
            out[j] -= w * mn * L[j] * c
    for lt in decomp.loop_terms:
        diff = monomial(past(lt.delay), lt.y) - monomial(x_now, lt.y)
        for j, c in lt.y.terms:
            out[j] += lt.K * diff * c
    return out


def _source_coefficients(M: DelayedNetwork) -> dict:
    """RHS as a table {(monomial, delay or 'now'): vector}; delay 0 maps to 'now'."""
    table: dict = {}
    n = M.n
    for rx in M.reactions:
        key_p = (rx.reactant, "now" if rx.delay == 0 else rx.delay)
        key_c = (rx.reactant, "now")
        for j in range(n):
            _add(table, (key_p, j), rx.rate * rx.product[j])
            _add(table, (key_c, j), -rx.rate * rx.reactant[j])
    return table


def _decomposition_coefficients(decomp: Decomposition) -> dict:
    table: dict = {}
    target = decomp.target
    L = decomp.l_vector
    for (i, tau), rate in decomp.quasi_rates.items():
        rx = target.reactions[i]
        scale = 1
        for j, c in rx.reactant.terms:
            scale = scale * L[j] ** c
        w = rate / scale
        key_p = (rx.reactant, "now" if tau == 0 else tau)
        key_c = (rx.reactant, "now")
        for j in range(target.n):
            _add(table, (key_p, j), w * L[j] * rx.product[j])
            _add(table, (key_c, j), -w * L[j] * rx.reactant[j])
    for lt in decomp.loop_terms:
        key_p = (lt.y, "now" if lt.delay == 0 else lt.delay)
        for j in range(target.n):
            _add(table, (key_p, j), lt.K * lt.y[j])
            _add(table, ((lt.y, "now"), j), -lt.K * lt.y[j])
    return table


def decomposition_defect(M: DelayedNetwork, decomp: Decomposition) -> Number:
    """Largest coefficient difference between the source RHS and the
    decomposition, viewed as polynomials in delayed monomials.  Exactly 0
    in rational mode when the decomposition is exact."""
    a = _source_coefficients(M)
    b = _decomposition_coefficients(decomp)
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0) - b.get(k, 0)) for k in keys), default=0)


# --------------------------------------------------------------------------
# HF property


def check_hf(
    M: DelayedNetwork, target: DelayedNetwork
) -> tuple[bool, dict[tuple[Complex, Number], tuple[Number, Number | None]]]:
    """Rate-weighted mean reaction vector per (y, tau) against the smallest
    nonzero target reaction vector out of y, both in the 1-norm.

    Returns (holds, {(y, tau): (mean norm, bound)}); bound is None when y
    has no nonzero target reaction vector.
    """
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    table = {}
    ok = True
    for (y, tau), z in agg.Ztau.items():
        K = agg.Ktau[(y, tau)]
        norm = sum(abs(v) for v in z) / K
        norms = [
            sum(abs(v) for v in target.reaction_vector(i)) for i in tgroups.get(y, [])
        ]
        norms = [v for v in norms if v != 0]
        bound = min(norms) if norms else None
        table[(y, tau)] = (norm, bound)
        if bound is None:
            ok = ok and norm == 0
        elif norm > bound * (1 + 1e-12):
            ok = False
    return ok, table


# --------------------------------------------------------------------------
# lcdcbmas: every target reaction transported to exactly one source delay


def lcdcbmas(
    M: DelayedNetwork, witness: ConjugacyWitness, tol: float = DEFAULT_TOL, max_combos: int = 4096
) -> StabilityCertificate:
    rep = check_linear_conjugacy(M, witness, tol)
    if not rep.ok:
        raise Rejection("lcdcbmas", ["not linearly conjugate to the target"])
    target, L = witness.target, witness.L
    n = M.n
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    kbar = kbar_values(witness)
    slack = _slack(M, tol)
    quasi: dict = {}
    reasons = []
    for y, idxs in reactant_groups(M).items():
        tids = tgroups.get(y, [])
        ksum = sum((kbar[(y, i)] for i in tids), 0)
        lhs = [agg.K[y] * y[j] for j in range(n)]
        rhs = [ksum * L[j] * y[j] for j in range(n)]
        if any(abs(a - b) > slack for a, b in zip(lhs, rhs)) or not tids:
            reasons.append(f"{_fmt(y, M.species)}: consumption does not match the target")
            continue
        taus = agg.delays_of(y)
        if len(taus) ** len(tids) > max_combos:
            reasons.append(f"{_fmt(y, M.species)}: too many delay assignments")
            continue
        found = None
        for combo in itertools.product(taus, repeat=len(tids)):
            good = True
            for tau in taus:
                acc = [0] * n
                for i, t in zip(tids, combo):
                    if t == tau:
                        prod = target.reactions[i].product
                        for j in range(n):
                            acc[j] += kbar[(y, i)] * L[j] * prod[j]
                if any(abs(a - b) > slack for a, b in zip(acc, agg.Ytau[(y, tau)])):
                    good = False
                    break
            if good:
                found = combo
                break
        if found is None:
            reasons.append(f"{_fmt(y, M.species)}: no single-delay assignment of target reactions")
            continue
        for i, t in zip(tids, found):
            _add(quasi, (i, t), target.reactions[i].rate)
    if reasons:
        raise Rejection("lcdcbmas", reasons)
    _orphan_targets(M, target, quasi)
    decomp = Decomposition(target, quasi, [], None if witness.is_identity else L)
    return StabilityCertificate("lcdcbmas", decomp, witness)


# --------------------------------------------------------------------------
# single delay per reactant


def check_thm1(M: DelayedNetwork, target: DelayedNetwork, tol: float = DEFAULT_TOL) -> StabilityCertificate:
    """Accept when each reactant complex has one delay and K^(y) >= 0."""
    _require_equivalence(M, target, tol, "thm1")
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    slack = _slack(M, tol)
    reasons = []
    quasi: dict = {}
    loops: list[LoopTerm] = []
    coefficients: dict = {}
    for y, idxs in reactant_groups(M).items():
        taus = agg.delays_of(y)
        name = _fmt(y, M.species)
        if len(taus) > 1:
            reasons.append(f"mixed delays for {name}")
            continue
        tau = taus[0]
        K = agg.K[y] - sum((target.reactions[i].rate for i in tgroups.get(y, [])), 0)
        ok, K = _nonneg(K, slack)
        if not ok and tau != 0:
            reasons.append(f"K^({name}) < 0")
            continue
        coefficients[y] = K
        for i in tgroups.get(y, []):
            _add(quasi, (i, tau), target.reactions[i].rate)
        if tau != 0 and K > 0:
            loops.append(LoopTerm(y, tau, K))
    if reasons:
        raise Rejection("thm1", reasons)
    _orphan_targets(M, target, quasi)
    decomp = Decomposition(target, quasi, loops, coefficients=coefficients)
    return StabilityCertificate("thm1", decomp, ConjugacyWitness.identity(target))


# --------------------------------------------------------------------------
# one-dimensional reaction spans


def combined_frame(M: DelayedNetwork, target: DelayedNetwork, y: Complex) -> OneDimFrame | None:
    """1-dim frame of the source and target reaction vectors out of y.

    ``a`` holds the target coefficients only (keyed by target index).
    """
    n = M.n
    src = [M.reaction_vector(i) for i in reactant_groups(M).get(y, [])]
    tids = reactant_groups(target).get(y, [])
    tgt = [target.reaction_vector(i) for i in tids]
    basis = row_basis(src + tgt, n)
    if len(basis) > 1:
        return None
    if not basis:
        return OneDimFrame(y, None, {i: Fraction(0) for i in tids}, zero_span=True)
    b = basis[0]
    j0 = next(j for j, x in enumerate(b) if x != 0)
    w = tuple(x / b[j0] for x in b)
    return OneDimFrame(y, w, {i: parallel_coefficient(w, v) for i, v in zip(tids, tgt)})


def split_sign_coefficients(
    ztau: Mapping[Number, Number],
    a_tilde: Mapping[int, Number],
    k_tilde: Mapping[int, Number],
) -> tuple[dict[tuple[int, Number], Number], dict[tuple[int, Number], Number]]:
    """Sign-split shares c^(tau,+), c^(tau,-) of the target rates.

    With Z~+ = sum_{a~>0} k~ a~ (and Z~- likewise), each delay receives
    c_i~^(tau,+) = (max(z_tau, 0) / Z~+) k~_i~ on positive-a~ reactions and
    c_i~^(tau,-) = (min(z_tau, 0) / Z~-) k~_i~ on negative ones, so that
    sum_{a~>0} c^(tau,+) a~ = max(z_tau, 0) exactly.
    """
    pos = [i for i, a in a_tilde.items() if a > 0]
    neg = [i for i, a in a_tilde.items() if a < 0]
    zp = sum((k_tilde[i] * a_tilde[i] for i in pos), 0)
    zm = sum((k_tilde[i] * a_tilde[i] for i in neg), 0)
    cp: dict = {}
    cm: dict = {}
    for tau, z in ztau.items():
        if z > 0:
            if not pos:
                raise ValueError("no positive a~ to carry a positive delay aggregate")
            for i in pos:
                cp[(i, tau)] = z / zp * k_tilde[i]
        elif z < 0:
            if not neg:
                raise ValueError("no negative a~ to carry a negative delay aggregate")
            for i in neg:
                cm[(i, tau)] = z / zm * k_tilde[i]
    return cp, cm


def thm2_split(
    ztau: Mapping[Number, Number],
    ktau: Mapping[Number, Number],
    a_tilde: Mapping[int, Number],
    k_tilde: Mapping[int, Number],
    slack: float = 0.0,
) -> tuple[dict, dict, dict, str]:
    """Split one reactant complex's target rates over its delays.

    Inputs are scalars along the frame vector w: ``ztau[tau]`` is the
    source aggregate coefficient, ``ktau[tau]`` the source rate sum, and
    ``a_tilde``/``k_tilde`` the target coefficients and rates.

    Returns (quasi, loops, rates, case): quasi shares keyed (i~, tau), loop
    coefficients keyed tau, the possibly rescaled target rates, and "I" or
    "II".  Raises ValueError on a negative loop coefficient at a positive
    delay.
    """
    zero = 0 * next(iter(ktau.values()))
    z = sum(ztau.values(), zero)
    signs = {(v > 0) - (v < 0) for v in ztau.values() if v != 0}
    quasi: dict = {}
    rates = dict(k_tilde)
    if len(signs) <= 1:
        case = "I"
        if z != 0:
            delta = {t: v / z for t, v in ztau.items()}
        else:
            total = sum(ktau.values(), zero)
            delta = {t: v / total for t, v in ktau.items()}
        for t, d in delta.items():
            for i, k in k_tilde.items():
                if d != 0:
                    _add(quasi, (i, t), d * k)
    else:
        case = "II"
        cp, cm = split_sign_coefficients(ztau, a_tilde, k_tilde)
        pos = [i for i, a in a_tilde.items() if a > 0]
        neg = [i for i, a in a_tilde.items() if a < 0]
        zp_src = sum((v for v in ztau.values() if v > 0), zero)
        zp_tgt = sum((k_tilde[i] * a_tilde[i] for i in pos), zero)
        lam = zp_src / zp_tgt
        for key, v in list(cp.items()) + list(cm.items()):
            _add(quasi, key, v)
        if lam <= 1:
            zm_src = sum((v for v in ztau.values() if v < 0), zero)
            zm_tgt = sum((k_tilde[i] * a_tilde[i] for i in neg), zero)
            lam_m = zm_src / zm_tgt
            for i in pos:
                if lam < 1:
                    _add(quasi, (i, zero), (1 - lam) * k_tilde[i])
            for i in neg:
                if lam_m < 1:
                    _add(quasi, (i, zero), (1 - lam_m) * k_tilde[i])
            for i, a in a_tilde.items():
                if a == 0:
                    _add(quasi, (i, zero), k_tilde[i])
        else:
            zm_src = sum((v for v in ztau.values() if v < 0), zero)
            zm_tgt = sum((k_tilde[i] * a_tilde[i] for i in neg), zero)
            lam_m = zm_src / zm_tgt
            for i in pos:
                rates[i] = lam * k_tilde[i]
            for i in neg:
                rates[i] = lam_m * k_tilde[i]
            for i, a in a_tilde.items():
                if a == 0:
                    _add(quasi, (i, zero), k_tilde[i])
    loops = {}
    for t, K in ktau.items():
        share = sum((v for (i, tt), v in quasi.items() if tt == t), zero)
        ok, val = _nonneg(K - share, slack)
        if t == 0:
            continue
        if not ok:
            raise ValueError(f"negative loop coefficient {val} at delay {t}")
        if val != 0:
            loops[t] = val
    return quasi, loops, rates, case


def check_thm2(M: DelayedNetwork, target: DelayedNetwork, tol: float = DEFAULT_TOL) -> StabilityCertificate:
    _require_equivalence(M, target, tol, "thm2")
    ok, table = check_hf(M, target)
    if not ok:
        raise Rejection("thm2", ["HF property fails"])
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    slack = _slack(M, tol)
    wr0 = is_wr_deficiency_zero(strip_delays(target))
    quasi: dict = {}
    loops: list[LoopTerm] = []
    new_rates = {i: rx.rate for i, rx in enumerate(target.reactions)}
    reasons = []
    any_case2 = False
    cases = {}
    for y in reactant_groups(M):
        name = _fmt(y, M.species)
        frame = combined_frame(M, target, y)
        if frame is None:
            reasons.append(f"reaction span of {name} is not one-dimensional")
            continue
        taus = agg.delays_of(y)
        ktau = {t: agg.Ktau[(y, t)] for t in taus}
        if frame.zero_span:
            ztau = {t: 0 * ktau[t] for t in taus}
        else:
            ztau = {t: parallel_coefficient(frame.w, agg.Ztau[(y, t)]) for t in taus}
            if not _is_exact(M):
                ztau = {t: float(v) for t, v in ztau.items()}
        tids = tgroups.get(y, [])
        a = {i: frame.a[i] for i in tids}
        if not _is_exact(M):
            a = {i: float(v) for i, v in a.items()}
        kt = {i: target.reactions[i].rate for i in tids}
        mixed = len({(v > 0) - (v < 0) for v in ztau.values() if v != 0}) > 1
        if mixed:
            has_pos = any(v > 0 for v in a.values())
            has_neg = any(v < 0 for v in a.values())
            if not (wr0 and has_pos and has_neg):
                reasons.append(
                    f"{name}: delay aggregates change sign but the target lacks "
                    "mixed-sign vectors in a weakly reversible deficiency-zero network"
                )
                continue
        if not tids:
            if any(v != 0 for v in ztau.values()):
                reasons.append(f"{name}: nonzero delay aggregates with no target reaction")
                continue
            for t in taus:
                if t != 0:
                    loops.append(LoopTerm(y, t, ktau[t]))
            cases[y] = "I"
            continue
        try:
            q, lp, rates, case = thm2_split(ztau, ktau, a, kt, slack)
        except ValueError as exc:
            reasons.append(f"{name}: {exc}")
            continue
        any_case2 = any_case2 or case == "II"
        cases[y] = case
        for key, v in q.items():
            _add(quasi, key, v)
        for t, K in lp.items():
            loops.append(LoopTerm(y, t, K))
        new_rates.update(rates)
    if reasons:
        raise Rejection("thm2", reasons)
    used = target.with_rates([new_rates[i] for i in range(target.r)])
    _orphan_targets(M, used, quasi)
    decomp = Decomposition(used, quasi, loops, cases=cases)
    label = "thm2_case2" if any_case2 else "thm2_case1"
    return StabilityCertificate(label, decomp, ConjugacyWitness.identity(used))


# --------------------------------------------------------------------------
# cone membership of delay aggregates


def _cone_lp(
    vecs: list[tuple], ztau: dict, ktau: dict, k_tilde: list, zero_slot: Number
) -> dict | None:
    """Nonnegative e[i, tau] with sum_i e v_i = Z^(tau), sum_tau e = k~ and
    sum_i e <= K^(tau) for positive delays.  A delay-0 slot is always
    available.  Returns None when infeasible."""
    taus = list(ztau)
    if zero_slot not in ztau:
        taus.append(zero_slot)
    m = len(vecs)
    n = len(vecs[0]) if vecs else 0
    nv = m * len(taus)
    idx = lambda i, ti: ti * m + i
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for ti, t in enumerate(taus):
        z = ztau.get(t, [0] * n)
        for j in range(n):
            row = np.zeros(nv)
            for i in range(m):
                row[idx(i, ti)] = float(vecs[i][j])
            A_eq.append(row)
            b_eq.append(float(z[j]))
        if t != 0:
            row = np.zeros(nv)
            for i in range(m):
                row[idx(i, ti)] = 1.0
            A_ub.append(row)
            b_ub.append(float(ktau[t]))
    for i in range(m):
        row = np.zeros(nv)
        for ti in range(len(taus)):
            row[idx(i, ti)] = 1.0
        A_eq.append(row)
        b_eq.append(float(k_tilde[i]))
    res = linprog(
        np.zeros(nv),
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq),
        b_eq=np.array(b_eq),
        bounds=[(0, None)] * nv,
        method="highs",
    )
    if res.status != 0:
        return None
    return {(i, t): float(res.x[idx(i, ti)]) for ti, t in enumerate(taus) for i in range(m)}


def check_cor1(M: DelayedNetwork, target: DelayedNetwork, tol: float = DEFAULT_TOL) -> StabilityCertificate:
    """Each delay aggregate Z^(y,tau) must lie in the cone of the target
    reaction vectors out of y."""
    _require_equivalence(M, target, tol, "cor1")
    ok, _ = check_hf(M, target)
    if not ok:
        raise Rejection("cor1", ["HF property fails"])
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    slack = _slack(M, tol)
    exact = _is_exact(M, target)
    wr0 = is_wr_deficiency_zero(strip_delays(target))
    n = M.n
    quasi: dict = {}
    loops: list[LoopTerm] = []
    reasons = []
    all_independent = True
    zero = _zero_delay(M)
    for y in reactant_groups(M):
        name = _fmt(y, M.species)
        taus = agg.delays_of(y)
        tids = tgroups.get(y, [])
        vecs = [target.reaction_vector(i) for i in tids]
        shares: dict = {}
        if not tids:
            if any(any(v != 0 for v in agg.Ztau[(y, t)]) for t in taus):
                reasons.append(f"cone-membership infeasible at {name}: no target reactions")
                continue
        elif rank(vecs, n) == len(vecs):
            bad = False
            for t in taus:
                sol = exact_solve(vecs, [to_fraction(v) for v in agg.Ztau[(y, t)]])
                if sol is None or any(v < -slack for v in sol):
                    reasons.append(f"cone-membership infeasible at ({name}, {t})")
                    bad = True
                    break
                for i, v in zip(tids, sol):
                    v = v if exact else float(v)
                    if v > 0:
                        _add(shares, (i, t), v)
            if bad:
                continue
            sums = {i: sum((v for (ii, _), v in shares.items() if ii == i), 0) for i in tids}
            if any(abs(sums[i] - target.reactions[i].rate) > slack for i in tids):
                reasons.append(f"{name}: delay shares do not sum to the target rates")
                continue
        else:
            all_independent = False
            if not wr0:
                reasons.append(
                    f"{name}: dependent target vectors and the target is not weakly "
                    "reversible with deficiency zero"
                )
                continue
            sol = _cone_lp(
                vecs,
                {t: agg.Ztau[(y, t)] for t in taus},
                {t: agg.Ktau[(y, t)] for t in taus},
                [target.reactions[i].rate for i in tids],
                zero,
            )
            if sol is None:
                reasons.append(f"cone-membership infeasible at {name}")
                continue
            for (pos, t), v in sol.items():
                if v > 0:
                    _add(shares, (tids[pos], t), v)
        bad = False
        for t in taus:
            share = sum((v for (i, tt), v in shares.items() if tt == t), 0)
            ok, K = _nonneg(agg.Ktau[(y, t)] - share, slack)
            if t == 0:
                continue
            if not ok:
                reasons.append(f"K^({name},{t}) < 0")
                bad = True
                break
            if K != 0:
                loops.append(LoopTerm(y, t, K))
        if bad:
            continue
        for key, v in shares.items():
            _add(quasi, key, v)
    if reasons:
        raise Rejection("cor1", reasons)
    _orphan_targets(M, target, quasi)
    decomp = Decomposition(target, quasi, loops)
    label = "cor1_case1" if all_independent else "cor1_case2"
    return StabilityCertificate(label, decomp, ConjugacyWitness.identity(target))


# --------------------------------------------------------------------------
# linear conjugacy with single-species reactant complexes


def check_thm3(M: DelayedNetwork, witness: ConjugacyWitness, tol: float = DEFAULT_TOL) -> StabilityCertificate:
    """Per reactant complex y = c X_j1, split target rates over delays by
    the per-species production ratios delta_j^(y,tau) = Y_j^(y,tau) / Y_j^(y).

    Case I: loop coefficient K = sum k - sum kbar l_j1 >= 0.
    Case II: nothing is produced in X_j1 (Y_j1 = 0).
    Case III: K < 0; X_j1-producing target reactions absorb the deficit
    through a delay-0 share.
    Case IV: y is not a target reactant; everything becomes loops.
    """
    target, L = witness.target, witness.L
    n = M.n
    bad = [
        _fmt(c, M.species)
        for c in list(reactant_groups(M)) + list(target.complexes)
        if c.single_species() is None
    ]
    if bad:
        raise Rejection(
            "thm3", [f"{c} is not a multiple of a single species" for c in dict.fromkeys(bad)]
        )
    rep = check_linear_conjugacy(M, witness, tol)
    if not rep.ok:
        raise Rejection("thm3", [f"not linearly conjugate (residual {rep.residual_max:.3g})"])
    agg = aggregates(M)
    tgroups = reactant_groups(target)
    kbar = kbar_values(witness)
    slack = _slack(M, tol)
    zero = _zero_delay(M)
    quasi: dict = {}
    loops: list[LoopTerm] = []
    deltas: dict = {}
    cases: dict = {}
    coefficients: dict = {}
    for y in reactant_groups(M):
        j1 = y.single_species()
        tids = tgroups.get(y, [])
        taus = agg.delays_of(y)
        Yy = agg.Y[y]
        K = agg.K[y] - sum((kbar[(y, i)] * L[j1] for i in tids), 0)
        if K < 0 and -K <= slack:
            K = 0 * K
        prod_species = {i: target.reactions[i].product.single_species() for i in tids}
        S1 = [i for i in tids if prod_species[i] == j1]
        P = sum((kbar[(y, i)] * L[j1] * target.reactions[i].product[j1] for i in S1), 0)
        if not tids:
            case = "IV"
        elif Yy[j1] == 0:
            case = "II"
        elif K < 0:
            case = "III"
        else:
            case = "I"
        cases[y] = case
        coefficients[y] = K
        for t in taus:
            Yt = agg.Ytau[(y, t)]
            delta = [0 * K] * n
            for j in range(n):
                if case == "III" and j == j1:
                    delta[j] = Yt[j] / P
                elif Yy[j] != 0:
                    delta[j] = Yt[j] / Yy[j]
            deltas[(y, t)] = tuple(delta)
            for i in tids:
                d = delta[prod_species[i]]
                if d != 0:
                    _add(quasi, (i, t), d * target.reactions[i].rate)
            if K > 0 and delta[j1] != 0 and t != 0:
                loops.append(LoopTerm(y, t, delta[j1] * K))
        if case == "III":
            used = sum((deltas[(y, t)][j1] for t in taus), 0)
            for i in S1:
                rem = (1 - used) * target.reactions[i].rate
                if rem != 0:
                    _add(quasi, (i, zero), rem)
    _orphan_targets(M, target, quasi)
    decomp = Decomposition(
        target, quasi, loops, L, delta=deltas, cases=cases, coefficients=coefficients
    )
    return StabilityCertificate("thm3", decomp, witness)


# --------------------------------------------------------------------------
# driver


def classify(
    M: DelayedNetwork, witness: ConjugacyWitness | None = None, tol: float = DEFAULT_TOL
) -> StabilityCertificate:
    """Run the checks in order lcdcbmas, thm1, thm3, cor1, thm2 and return
    the first certificate, or theorem "none" with every rejection reason."""
    notes: list[str] = []
    if witness is None:
        base = strip_delays(M)
        if not is_wr_deficiency_zero(base):
            return StabilityCertificate(
                "none", None, None,
                ["no witness given and the network is not weakly reversible with deficiency zero"],
            )
        witness = ConjugacyWitness.identity(base)
    if not is_wr_deficiency_zero(strip_delays(witness.target)):
        notes.append("target is not weakly reversible with deficiency zero")
        return StabilityCertificate("none", None, witness, notes)
    checks = [
        lambda: lcdcbmas(M, witness, tol),
        lambda: check_thm1(M, witness.target, tol),
        lambda: check_thm3(M, witness, tol),
        lambda: check_cor1(M, witness.target, tol),
        lambda: check_thm2(M, witness.target, tol),
    ]
    for run in checks:
        try:
            cert = run()
        except Rejection as rej:
            notes.extend(f"{rej.check}: {r}" for r in rej.reasons)
            continue
        cert.notes = notes
        return cert
    return StabilityCertificate("none", None, witness, notes)
