"""Delayed mass-action networks and their line-oriented text format.

A network is an ordered species list plus an ordered reaction list.  Each
reaction carries a reactant complex, a product complex, a rate constant
and a constant delay.  Stoichiometric coefficients are exact integers;
rates and delays are floats by default or :class:`fractions.Fraction`
when parsed with ``exact=True``.

Text format::

    # comment
    species S1 S2
    reaction 2S1 -> S1 : k=1 tau=0.5
    reaction 0 -> S1 : k=2 tau=0

A witness file adds an ``L`` line and a ``target:`` block holding the
target network in the same syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[float, Fraction, int]

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_TERM_RE = re.compile(rf"^\s*(\d*)\s*({_NAME})\s*$")
_NAME_RE = re.compile(rf"^{_NAME}$")


class ParseError(ValueError):
    """Raised for malformed network or witness text.

    ``kind`` is one of ``syntax``, ``unknown_species``, ``nonpositive_rate``,
    ``negative_delay``, ``duplicate_species`` or ``witness``.
    """

    def __init__(self, kind: str, message: str, line: int, col: int = 1):
        self.kind = kind
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


@dataclass(frozen=True, order=True)
class Complex:
    """Nonnegative integer combination of species, keyed by species index."""

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        merged: dict[int, int] = {}
        for idx, coeff in self.terms:
            if coeff < 0:
                raise ValueError(f"negative stoichiometric coefficient {coeff}")
            merged[int(idx)] = merged.get(int(idx), 0) + int(coeff)
        clean = tuple(sorted((i, c) for i, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_vector(cls, vec: Iterable[int]) -> "Complex":
        return cls(tuple((i, int(c)) for i, c in enumerate(vec) if c))

    @classmethod
    def zero(cls) -> "Complex":
        return cls(())

    def __getitem__(self, idx: int) -> int:
        for i, c in self.terms:
            if i == idx:
                return c
        return 0

    def vector(self, n: int) -> tuple[int, ...]:
        out = [0] * n
        for i, c in self.terms:
            out[i] = c
        return tuple(out)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def single_species(self) -> int | None:
        """Index ``j`` when the complex is ``c * X_j`` (c >= 1), else None."""
        if len(self.terms) == 1:
            return self.terms[0][0]
        return None

    def format(self, species: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, c in self.terms:
            name = species[i] if i < len(species) else f"#{i}"
            parts.append(name if c == 1 else f"{c}{name}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate: Number
    delay: Number = 0


@dataclass(frozen=True)
class DelayedNetwork:
    """Ordered species names plus ordered reactions (M_De = (S, C, R, k, tau))."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def complexes(self) -> tuple[Complex, ...]:
        """Distinct complexes in order of first appearance."""
        seen: dict[Complex, None] = {}
        for rx in self.reactions:
            seen.setdefault(rx.reactant)
            seen.setdefault(rx.product)
        return tuple(seen)

    @property
    def p(self) -> int:
        return len(self.complexes)

    @property
    def delays(self) -> tuple[Number, ...]:
        """Distinct delays, sorted ascending."""
        return tuple(sorted(set(rx.delay for rx in self.reactions)))

    @property
    def tau_max(self) -> float:
        return float(max(self.delays, default=0))

    def reaction_vector(self, i: int) -> tuple[int, ...]:
        rx = self.reactions[i]
        y = rx.reactant.vector(self.n)
        yp = rx.product.vector(self.n)
        return tuple(b - a for a, b in zip(y, yp))

    def with_rates(self, rates: Sequence[Number]) -> "DelayedNetwork":
        if len(rates) != self.r:
            raise ValueError(f"expected {self.r} rates, got {len(rates)}")
        return replace(
            self,
            reactions=tuple(replace(rx, rate=k) for rx, k in zip(self.reactions, rates)),
        )

    def with_delays(self, delays: Sequence[Number]) -> "DelayedNetwork":
        if len(delays) != self.r:
            raise ValueError(f"expected {self.r} delays, got {len(delays)}")
        return replace(
            self,
            reactions=tuple(replace(rx, delay=t) for rx, t in zip(self.reactions, delays)),
        )


@dataclass(frozen=True)
class ConjugacyWitness:
    """Target network M~ (delays ignored) plus the diagonal of L."""

    target: DelayedNetwork
    L: tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(self.L))

    @classmethod
    def identity(cls, target: DelayedNetwork) -> "ConjugacyWitness":
        return cls(target, tuple(1 for _ in target.species))

    @property
    def is_identity(self) -> bool:
        return all(l == 1 for l in self.L)


@dataclass(frozen=True)
class Diagnostic:
    reaction: int | None
    reason: str

    def __str__(self) -> str:
        where = "network" if self.reaction is None else f"reaction {self.reaction}"
        return f"{where}: {self.reason}"


# --------------------------------------------------------------------------
# validation and simple transforms


def validate_network(net: DelayedNetwork) -> list[Diagnostic]:
    """Check the type invariants; an empty list means well-formed."""
    diags: list[Diagnostic] = []
    if len(set(net.species)) != len(net.species):
        diags.append(Diagnostic(None, "duplicate species names"))
    for name in net.species:
        if not _NAME_RE.match(name):
            diags.append(Diagnostic(None, f"invalid species name {name!r}"))
    for i, rx in enumerate(net.reactions):
        for side in (rx.reactant, rx.product):
            if any(idx < 0 or idx >= net.n for idx in side.support):
                diags.append(Diagnostic(i, "complex references undeclared species"))
                break
        if not rx.rate > 0:
            diags.append(Diagnostic(i, "nonpositive rate"))
        if rx.delay < 0:
            diags.append(Diagnostic(i, "negative delay"))
    return diags


def strip_delays(net: DelayedNetwork) -> DelayedNetwork:
    """Same network with every delay set to zero."""
    return net.with_delays([0 * rx.delay for rx in net.reactions])


def reactant_groups(net: DelayedNetwork) -> dict[Complex, list[int]]:
    """Map each reactant complex to the indices of reactions it feeds."""
    groups: dict[Complex, list[int]] = {}
    for i, rx in enumerate(net.reactions):
        groups.setdefault(rx.reactant, []).append(i)
    return groups


# --------------------------------------------------------------------------
# parsing


def _parse_number(token: str, exact: bool, lineno: int, col: int) -> Number:
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError("syntax", f"invalid number {token!r}", lineno, col) from None
    return value if exact else float(value)


def _parse_complex(
    text: str,
    index: dict[str, int] | None,
    inferred: list[str] | None,
    lineno: int,
    col: int,
) -> Complex:
    text = text.strip()
    if text == "0" or text == "∅":
        return Complex.zero()
    if not text:
        raise ParseError("syntax", "empty complex (write 0 for the zero complex)", lineno, col)
    terms = []
    for chunk in text.split("+"):
        m = _TERM_RE.match(chunk)
        if not m:
            raise ParseError("syntax", f"bad complex term {chunk.strip()!r}", lineno, col)
        coeff = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if index is not None:
            if name not in index:
                raise ParseError("unknown_species", f"unknown species {name!r}", lineno, col)
            terms.append((index[name], coeff))
        else:
            assert inferred is not None
            if name not in inferred:
                inferred.append(name)
            terms.append((inferred.index(name), coeff))
    return Complex(tuple(terms))


def _parse_reaction(
    body: str,
    index: dict[str, int] | None,
    inferred: list[str] | None,
    lineno: int,
    col0: int,
    exact: bool,
) -> Reaction:
    if ":" not in body:
        raise ParseError("syntax", "expected ': k=<rate> [tau=<delay>]'", lineno, col0)
    lhs_rhs, _, params = body.partition(":")
    if "->" not in lhs_rhs:
        raise ParseError("syntax", "expected '->' between complexes", lineno, col0)
    lhs, _, rhs = lhs_rhs.partition("->")
    col_rhs = col0 + len(lhs) + 2
    reactant = _parse_complex(lhs, index, inferred, lineno, col0)
    product = _parse_complex(rhs, index, inferred, lineno, col_rhs)

    col_params = col0 + len(lhs_rhs) + 1
    values: dict[str, Number] = {}
    for tok in params.split():
        key, eq, val = tok.partition("=")
        if not eq or key not in ("k", "tau") or key in values:
            raise ParseError("syntax", f"bad parameter {tok!r}", lineno, col_params)
        values[key] = _parse_number(val, exact, lineno, col_params)
    if "k" not in values:
        raise ParseError("syntax", "missing rate k=", lineno, col_params)
    rate = values["k"]
    delay = values.get("tau", Fraction(0) if exact else 0.0)
    if not rate > 0:
        raise ParseError("nonpositive_rate", f"nonpositive rate {rate}", lineno, col_params)
    if delay < 0:
        raise ParseError("negative_delay", f"negative delay {delay}", lineno, col_params)
    return Reaction(reactant, product, rate, delay)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _parse_lines(
    lines: Sequence[tuple[int, str]],
    exact: bool,
    species: Sequence[str] | None = None,
) -> DelayedNetwork:
    declared: list[str] | None = list(species) if species is not None else None
    pending: list[tuple[int, str, int]] = []
    for lineno, raw in lines:
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.lstrip()
        col = len(line) - len(stripped) + 1
        keyword, _, rest = stripped.partition(" ")
        if keyword == "species":
            if declared is None:
                declared = []
            for name in rest.split():
                if not _NAME_RE.match(name):
                    raise ParseError("syntax", f"invalid species name {name!r}", lineno, col)
                if name in declared:
                    raise ParseError("duplicate_species", f"duplicate species {name!r}", lineno, col)
                declared.append(name)
        elif keyword == "reaction":
            pending.append((lineno, rest, col + len("reaction ")))
        else:
            raise ParseError("syntax", f"unknown directive {keyword!r}", lineno, col)

    reactions = []
    inferred: list[str] | None = None if declared is not None else []
    index = {name: i for i, name in enumerate(declared)} if declared is not None else None
    for lineno, body, col in pending:
        reactions.append(_parse_reaction(body, index, inferred, lineno, col, exact))
    names = declared if declared is not None else inferred
    return DelayedNetwork(tuple(names or ()), tuple(reactions))


def parse_network(text: str, exact: bool = False) -> DelayedNetwork:
    """Parse network text.  Without a ``species`` line, species are
    inferred in order of first appearance."""
    return _parse_lines(list(enumerate(text.splitlines(), start=1)), exact)


def _format_number(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def serialize_network(net: DelayedNetwork) -> str:
    lines = []
    if net.species:
        lines.append("species " + " ".join(net.species))
    for rx in net.reactions:
        lines.append(
            f"reaction {rx.reactant.format(net.species)} -> {rx.product.format(net.species)}"
            f" : k={_format_number(rx.rate)} tau={_format_number(rx.delay)}"
        )
    return "\n".join(lines) + "\n"


def parse_witness(
    text: str, species: Sequence[str] | None = None, exact: bool = False
) -> ConjugacyWitness:
    """Parse a witness file: optional ``species``, an ``L`` line, and a
    ``target:`` block.  ``species`` (usually the source network's) is used
    when the file itself declares none."""
    head: list[tuple[int, str]] = []
    block: list[tuple[int, str]] = []
    L: list[Number] | None = None
    in_target = False
    file_species: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        if in_target:
            block.append((lineno, raw))
            continue
        if stripped == "target:":
            in_target = True
            continue
        keyword, _, rest = stripped.partition(" ")
        if keyword == "L":
            L = [_parse_number(tok, exact, lineno, 3) for tok in rest.split()]
            if any(not l > 0 for l in L):
                raise ParseError("witness", "L entries must be positive", lineno, 3)
        elif keyword == "species":
            file_species = rest.split()
            head.append((lineno, raw))
        else:
            raise ParseError("syntax", f"unknown witness directive {keyword!r}", lineno, 1)
    if not in_target:
        raise ParseError("witness", "missing 'target:' block", len(text.splitlines()) or 1)

    has_own_species = any(_strip_comment(r).strip().startswith("species") for _, r in block)
    base = None if has_own_species else (file_species if file_species is not None else species)
    target = _parse_lines(block, exact, species=base)
    if species is not None and list(target.species) != list(species):
        raise ParseError("witness", "target species differ from source species", block[0][0] if block else 1)
    if L is None:
        L = [Fraction(1) if exact else 1.0 for _ in target.species]
    if len(L) != target.n:
        raise ParseError("witness", f"L has {len(L)} entries for {target.n} species", 1)
    return ConjugacyWitness(target, tuple(L))


def serialize_witness(w: ConjugacyWitness) -> str:
    lines = ["species " + " ".join(w.target.species)]
    lines.append("L " + " ".join(_format_number(l) for l in w.L))
    lines.append("target:")
    body = serialize_network(w.target).splitlines()
    lines.extend("  " + ln for ln in body if not ln.startswith("species"))
    return "\n".join(lines) + "\n"
