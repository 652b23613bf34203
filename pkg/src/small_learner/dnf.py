"""k-DNF formulae as prototype matrices, and rule readouts of trained models.

Text syntax: terms separated by ``|``, literals by ``&``, negation by ``!``,
for example ``"A & !B | !C & D"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class DnfError(ValueError):
    pass


@dataclass(frozen=True)
class DnfFormula:
    terms: tuple  # tuple of terms; a term is a tuple of (var index, +1 | -1)
    n: int
    names: tuple = ()

    def __post_init__(self):
        terms = tuple(tuple((int(v), int(s)) for v, s in term) for term in self.terms)
        if not terms:
            raise DnfError("a DNF needs at least one term")
        for t, term in enumerate(terms):
            if not term:
                raise DnfError(f"term {t} is empty")
            seen = set()
            for v, s in term:
                if not 0 <= v < self.n:
                    raise DnfError(f"term {t}: variable index {v} out of range for n={self.n}")
                if s not in (1, -1):
                    raise DnfError(f"term {t}: literal sign must be +1 or -1")
                if v in seen:
                    raise DnfError(f"term {t}: variable {self._name(v)} appears twice")
                seen.add(v)
        if self.names and len(self.names) != self.n:
            raise DnfError("names must have one entry per variable")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "names", tuple(self.names))

    def _name(self, v):
        return self.names[v] if self.names else f"x{v}"

    @property
    def p(self) -> int:
        return len(self.terms)

    def __str__(self):
        return " | ".join(
            " & ".join(("" if s > 0 else "!") + self._name(v) for v, s in term) for term in self.terms
        )


def parse_dnf(text: str, names=None) -> DnfFormula:
    """Parse ``"A & !B | C"``.

    With ``names`` the variable order (and n) is fixed by that list; without
    it, variables are numbered in order of first appearance.
    """
    known = list(names) if names is not None else []
    index = {nm: i for i, nm in enumerate(known)}
    terms = []
    for raw_term in text.split("|"):
        term = []
        for raw_lit in raw_term.split("&"):
            lit = raw_lit.strip()
            sign = 1
            while lit.startswith("!"):
                sign = -sign
                lit = lit[1:].strip()
            if not _NAME.match(lit):
                raise DnfError(f"bad literal {raw_lit.strip()!r}")
            if lit not in index:
                if names is not None:
                    raise DnfError(f"unknown variable {lit!r}")
                index[lit] = len(known)
                known.append(lit)
            term.append((index[lit], sign))
        terms.append(term)
    return DnfFormula(tuple(terms), len(known), tuple(known))


def encode_dnf(f: DnfFormula):
    """Return (W, k): one {-1, 0, 1} row per term.

    Only strict k-DNFs (all terms of size k) are accepted.
    """
    sizes = {len(t) for t in f.terms}
    if len(sizes) != 1:
        raise DnfError(f"terms have unequal sizes {sorted(sizes)}; need a strict k-DNF")
    W = np.zeros((f.p, f.n))
    for j, term in enumerate(f.terms):
        for v, s in term:
            W[j, v] = s
    return W, sizes.pop()


def dnf_satisfied(f: DnfFormula, assignment) -> bool:
    """True iff max_j w_j . x >= k, which for x in {-1,+1}^n is exactly the
    formula's truth value."""
    x = np.asarray(assignment, dtype=float)
    if x.shape != (f.n,):
        raise DnfError(f"assignment must have length {f.n}")
    if not np.all((x == 1) | (x == -1)):
        raise DnfError("assignment entries must be -1 or +1")
    W, k = encode_dnf(f)
    return bool(np.max(W @ x) >= k)


@dataclass
class RuleReport:
    prototypes: list  # per prototype: list of (feature name, weight)
    shared: list  # names in the support of more than one prototype

    def lines(self) -> list[str]:
        out = []
        for j, rule in enumerate(self.prototypes, start=1):
            out.append(f"prototype {j}: {len(rule)} feature(s)")
            for name, w in rule:
                flag = "  [shared]" if name in self.shared else ""
                out.append(f"  {name}: {w:+.6g}{flag}")
        if self.shared:
            out.append("shared: " + ", ".join(self.shared))
        return out

    def rows(self) -> list[str]:
        """Tab-separated ``prototype  feature  weight  shared`` rows."""
        out = ["prototype\tfeature\tweight\tshared"]
        for j, rule in enumerate(self.prototypes, start=1):
            for name, w in rule:
                out.append(f"{j}\t{name}\t{w!r}\t{int(name in self.shared)}")
        return out


def extract_rules(model, top: int | None = None) -> RuleReport:
    """Per prototype, the non-zero (name, weight) pairs by decreasing |weight|."""
    W = np.asarray(model.W)
    names = model.feature_names
    rules = []
    counts = {}
    for row in W:
        support = np.flatnonzero(row)
        order = support[np.argsort(-np.abs(row[support]), kind="stable")]
        for l in order:
            counts[names[l]] = counts.get(names[l], 0) + 1
        if top is not None:
            order = order[:top]
        rules.append([(names[l], float(row[l])) for l in order])
    shared = [nm for nm in names if counts.get(nm, 0) > 1]
    return RuleReport(rules, shared)
