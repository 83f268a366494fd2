"""Truncated multivariate series in descendant variables.

A variable is a pair (a, m): descendant level a >= 0 and basis slot m.
Coefficients are Laurent polynomials in the genus parameter lambda with
even exponents only; exponent 2g-2 carries the genus-g part.  Monomials
are capped by total degree, lambda exponents live in a per-series window
[lam_floor, 2*genus_cap - 2].

Truncation contract: coefficients of stored monomials are exact up to the
``valid_degree`` watermark; differentiation lowers the watermark since the
derivative of a capped series is only exact one degree below the cap.
Products landing below a series' lambda floor raise GenusUnderflow rather
than being dropped silently; the exponential deliberately widens its floor
(each lambda^{-2} factor carries at least three units of degree, so the
default floor -2*ceil(D/3) loses nothing below the degree cap).
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Callable, Iterable, Optional

from dataclasses import dataclass

from .util import Q

EXACT = "exact"
NUMERIC = "numeric"


class ModeMismatch(Exception):
    pass


class CapMismatch(Exception):
    pass


class GenusUnderflow(Exception):
    pass


class PreconditionViolated(Exception):
    pass


class SingularMatrix(Exception):
    pass


class LevelCapExceeded(Exception):
    pass


@dataclass(frozen=True)
class SeriesCaps:
    degree: int   # max total monomial degree
    level: int    # max descendant level
    genus: int    # lambda exponents stored up to 2*genus - 2

    @property
    def lam_ceiling(self) -> int:
        return 2 * self.genus - 2


# A monomial is a sorted tuple of ((level, slot), exponent) pairs.

def mono_from_vars(pairs: Iterable) -> tuple:
    acc = {}
    for v in pairs:
        acc[v] = acc.get(v, 0) + 1
    return tuple(sorted(acc.items()))


def mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for v, e in m2:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def mono_max_level(m: tuple) -> int:
    return max((v[0] for v, _ in m), default=0)


class TruncatedSeries:
    """terms: {monomial: {lambda exponent: coefficient}}"""

    __slots__ = ("caps", "mode", "system", "terms", "lam_floor", "valid_degree")

    def __init__(self, caps: SeriesCaps, *, mode: str = EXACT,
                 system: Optional[str] = None, lam_floor: int = -2,
                 valid_degree: Optional[int] = None, terms=None):
        self.caps = caps
        self.mode = mode
        self.system = system
        self.lam_floor = lam_floor
        self.valid_degree = caps.degree if valid_degree is None else valid_degree
        self.terms = {} if terms is None else terms

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, caps, **kw):
        return cls(caps, **kw)

    @classmethod
    def constant(cls, caps, value, *, lam: int = 0, **kw):
        if lam % 2 != 0:
            raise ValueError("lambda exponents must be even")
        kw.setdefault("lam_floor", min(-2, lam))
        s = cls(caps, **kw)
        if value and lam <= caps.lam_ceiling:
            s.terms[()] = {lam: value}
        return s

    @classmethod
    def one(cls, caps, **kw):
        one = Q(1) if kw.get("mode", EXACT) == EXACT else complex(1)
        return cls.constant(caps, one, **kw)

    @classmethod
    def from_monomial(cls, caps, mono, value, *, lam: int = 0, **kw):
        if lam % 2 != 0:
            raise ValueError("lambda exponents must be even")
        mono = tuple(sorted(mono))
        for (level, _slot), _e in mono:
            if level > caps.level:
                raise LevelCapExceeded(f"level {level} > cap {caps.level}")
        kw.setdefault("lam_floor", min(-2, lam))
        s = cls(caps, **kw)
        if value and mono_degree(mono) <= caps.degree and lam <= caps.lam_ceiling:
            s.terms[mono] = {lam: value}
        return s

    def copy(self):
        return TruncatedSeries(
            self.caps, mode=self.mode, system=self.system,
            lam_floor=self.lam_floor, valid_degree=self.valid_degree,
            terms={m: dict(lc) for m, lc in self.terms.items()})

    def _zero_scalar(self):
        return Q(0) if self.mode == EXACT else complex(0)

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int:
        return min((mono_degree(m) for m in self.terms), default=0)

    # -- bookkeeping ----------------------------------------------------------

    def _check_compatible(self, other: "TruncatedSeries"):
        if self.mode != other.mode:
            raise ModeMismatch(f"{self.mode} vs {other.mode}")
        if self.caps != other.caps:
            raise CapMismatch(f"{self.caps} vs {other.caps}")

    def _set(self, mono, lam, value):
        if not value:
            return
        lc = self.terms.setdefault(mono, {})
        nv = lc.get(lam, self._zero_scalar()) + value
        if nv:
            lc[lam] = nv
        else:
            lc.pop(lam, None)
            if not lc:
                del self.terms[mono]

    def coefficient(self, mono, lam: int):
        mono = tuple(sorted(mono))
        return self.terms.get(mono, {}).get(lam, self._zero_scalar())

    def iter_terms(self):
        for mono, lc in self.terms.items():
            for lam, c in lc.items():
                yield mono, lam, c

    def support(self):
        return {(m, lam) for m, lam, _ in self.iter_terms()}

    # -- ring operations ------------------------------------------------------

    def add(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        out = self.copy()
        out.lam_floor = min(self.lam_floor, other.lam_floor)
        out.valid_degree = min(self.valid_degree, other.valid_degree)
        for mono, lam, c in other.iter_terms():
            out._set(mono, lam, c)
        return out

    def scale(self, value, *, lam_shift: int = 0) -> "TruncatedSeries":
        """Multiply by value * lambda^lam_shift; the window shifts along."""
        if lam_shift % 2 != 0:
            raise ValueError("lambda shift must be even")
        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=self.lam_floor + lam_shift,
                              valid_degree=self.valid_degree)
        if not value:
            return out
        ceiling = self.caps.lam_ceiling
        for mono, lc in self.terms.items():
            nw = {}
            for lam, c in lc.items():
                nl = lam + lam_shift
                if nl > ceiling:
                    continue
                nc = c * value
                if nc:
                    nw[nl] = nc
            if nw:
                out.terms[mono] = nw
        return out

    def multiply(self, other: "TruncatedSeries", *,
                 floor: Optional[int] = None,
                 max_degree: Optional[int] = None) -> "TruncatedSeries":
        """Truncated product.

        Monomials exceeding the degree cap are dropped; lambda exponents
        above the window are genus-truncated; exponents below the result
        floor raise GenusUnderflow.  ``floor`` overrides the default
        min(lam_floor) of the operands (used by the exponential);
        ``max_degree`` tightens the output degree below the cap.
        """
        self._check_compatible(other)
        if floor is None:
            floor = min(self.lam_floor, other.lam_floor)
        dcap = self.caps.degree if max_degree is None else min(
            max_degree, self.caps.degree)
        out = TruncatedSeries(
            self.caps, mode=self.mode, system=self.system, lam_floor=floor,
            valid_degree=min(self.valid_degree + other.min_degree(),
                             other.valid_degree + self.min_degree(),
                             dcap))
        if not self.terms or not other.terms:
            return out
        ceiling = self.caps.lam_ceiling
        small, big = ((self, other) if len(self.terms) <= len(other.terms)
                      else (other, self))
        big_by_degree = {}
        for mono, lc in big.terms.items():
            big_by_degree.setdefault(mono_degree(mono), []).append((mono, lc))
        for m1, lc1 in small.terms.items():
            d1 = mono_degree(m1)
            for d2, bucket in big_by_degree.items():
                if d1 + d2 > dcap:
                    continue
                for m2, lc2 in bucket:
                    mono = mono_mul(m1, m2)
                    for l1, c1 in lc1.items():
                        for l2, c2 in lc2.items():
                            lam = l1 + l2
                            if lam > ceiling:
                                continue
                            if lam < floor:
                                raise GenusUnderflow(
                                    f"lambda^{lam} below floor {floor}")
                            out._set(mono, lam, c1 * c2)
        return out

    def multiply_by_monomial(self, mono, value, *,
                             lam_shift: int = 0) -> "TruncatedSeries":
        """Single-pass multiply by value * lambda^shift * monomial."""
        mono = tuple(sorted(mono))
        deg = mono_degree(mono)
        out = TruncatedSeries(
            self.caps, mode=self.mode, system=self.system,
            lam_floor=self.lam_floor + lam_shift,
            valid_degree=min(self.valid_degree + deg, self.caps.degree))
        if not value:
            return out
        dcap = self.caps.degree
        ceiling = self.caps.lam_ceiling
        for m, lc in self.terms.items():
            if mono_degree(m) + deg > dcap:
                continue
            nm = mono_mul(m, mono)
            for lam, c in lc.items():
                nl = lam + lam_shift
                if nl > ceiling:
                    continue
                out._set(nm, nl, c * value)
        return out

    # -- calculus -------------------------------------------------------------

    def partial_derivative(self, var) -> "TruncatedSeries":
        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=self.lam_floor,
                              valid_degree=max(self.valid_degree - 1, -1))
        for mono, lc in self.terms.items():
            e = dict(mono).get(var, 0)
            if not e:
                continue
            reduced = tuple(sorted((v, k - 1) if v == var else (v, k)
                                   for v, k in mono if not (v == var and k == 1)))
            for lam, c in lc.items():
                out._set(reduced, lam, c * e)
        return out

    def second_partial(self, v1, v2) -> "TruncatedSeries":
        return self.partial_derivative(v1).partial_derivative(v2)

    def exponential(self, *, floor: Optional[int] = None) -> "TruncatedSeries":
        """exp of a series with zero constant term.

        Genus-zero terms must have degree >= 3 so that widening the floor
        to -2*ceil(D/3) (default) captures every product below the degree
        cap.  Computed degree-by-degree via d*Z_d = sum k*S_k*Z_{d-k}.
        """
        if () in self.terms:
            raise PreconditionViolated("exp needs zero constant term")
        for mono, lc in self.terms.items():
            if any(lam < 0 for lam in lc) and mono_degree(mono) < 3:
                raise PreconditionViolated(
                    "negative-lambda term of degree < 3")
        dcap = self.caps.degree
        if floor is None:
            floor = min(-2 * ((dcap + 2) // 3), self.lam_floor)
        one = Q(1) if self.mode == EXACT else complex(1)
        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=floor,
                              valid_degree=self.valid_degree)
        out.terms[()] = {0: one}

        s_by_deg = {}
        for mono, lc in self.terms.items():
            s_by_deg.setdefault(mono_degree(mono), {})[mono] = lc
        z_by_deg = {0: {(): {0: one}}}
        ceiling = self.caps.lam_ceiling
        for d in range(1, dcap + 1):
            level = {}
            for k, sk in s_by_deg.items():
                if k > d or (d - k) not in z_by_deg:
                    continue
                zk = z_by_deg[d - k]
                for m1, lc1 in sk.items():
                    for m2, lc2 in zk.items():
                        mono = mono_mul(m1, m2)
                        for l1, c1 in lc1.items():
                            for l2, c2 in lc2.items():
                                lam = l1 + l2
                                if lam > ceiling:
                                    continue
                                if lam < floor:
                                    raise GenusUnderflow(
                                        f"lambda^{lam} below exp floor {floor}")
                                prev = level.setdefault(mono, {})
                                prev[lam] = prev.get(lam, 0) + c1 * c2 * k
            cleaned = {}
            for mono, lc in level.items():
                nw = {lam: c / d for lam, c in lc.items() if c}
                if nw:
                    cleaned[mono] = nw
            if cleaned:
                z_by_deg[d] = cleaned
                for mono, lc in cleaned.items():
                    out.terms[mono] = dict(lc)
        return out

    # -- substitutions ----------------------------------------------------------

    def substitute_rescale(self, factor: Callable) -> "TruncatedSeries":
        """Replace each variable v by factor(v) * v (monomial-wise rescale)."""
        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=self.lam_floor,
                              valid_degree=self.valid_degree)
        for mono, lc in self.terms.items():
            scale = 1
            for v, e in mono:
                f = factor(v)
                if not f:
                    raise ValueError(f"zero rescale factor for {v}")
                scale = scale * f ** e
            for lam, c in lc.items():
                out._set(mono, lam, c * scale)
        return out

    def substitute_linear(self, matrix_for_level: Callable,
                          n_slots: int) -> "TruncatedSeries":
        """Replace t_a^m by sum_m' M(a)[m][m'] t_a^{m'}, degree-preserving.

        ``matrix_for_level(a)`` returns the r x r coefficient matrix used at
        level a (rows indexed by the old slot).
        """
        import numpy as np

        checked = {}

        def mat(a):
            if a not in checked:
                m = matrix_for_level(a)
                if abs(np.linalg.det(np.array(m, dtype=complex))) < 1e-12:
                    raise SingularMatrix(f"singular change of basis at level {a}")
                checked[a] = m
            return checked[a]

        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=self.lam_floor,
                              valid_degree=self.valid_degree)
        for mono, lc in self.terms.items():
            expansion = {(): 1}
            for (a, m), e in mono:
                row = mat(a)[m]
                var_pool = [((a, mp), row[mp]) for mp in range(n_slots)
                            if row[mp]]
                power = {}
                for combo in combinations_with_replacement(range(len(var_pool)), e):
                    coeff = 1
                    weight = _multiset_permutations_count(combo)
                    vars_used = []
                    for idx in combo:
                        v, cf = var_pool[idx]
                        coeff = coeff * cf
                        vars_used.append(v)
                    key = mono_from_vars(vars_used)
                    power[key] = power.get(key, 0) + coeff * weight
                new_expansion = {}
                for m1, c1 in expansion.items():
                    for m2, c2 in power.items():
                        key = mono_mul(m1, m2)
                        new_expansion[key] = new_expansion.get(key, 0) + c1 * c2
                expansion = new_expansion
            for lam, c in lc.items():
                for m2, c2 in expansion.items():
                    out._set(m2, lam, c * c2)
        return out

    def truncated_to_degree(self, degree: int) -> "TruncatedSeries":
        """Drop monomials above `degree` (watermark clipped to match)."""
        out = TruncatedSeries(self.caps, mode=self.mode, system=self.system,
                              lam_floor=self.lam_floor,
                              valid_degree=min(self.valid_degree, degree))
        for mono, lc in self.terms.items():
            if mono_degree(mono) <= degree:
                out.terms[mono] = dict(lc)
        return out

    def to_numeric(self) -> "TruncatedSeries":
        if self.mode == NUMERIC:
            return self.copy()
        out = TruncatedSeries(self.caps, mode=NUMERIC, system=self.system,
                              lam_floor=self.lam_floor,
                              valid_degree=self.valid_degree)
        for mono, lc in self.terms.items():
            out.terms[mono] = {lam: complex(c) for lam, c in lc.items()}
        return out

    # -- serialization ------------------------------------------------------------

    def to_json_list(self):
        from .util import float_str, rat_str
        rows = []
        for mono in sorted(self.terms):
            for lam in sorted(self.terms[mono]):
                c = self.terms[mono][lam]
                if self.mode == EXACT:
                    cval = rat_str(c)
                else:
                    cval = [float_str(c.real), float_str(c.imag)]
                rows.append({
                    "monomial": [[v[0], v[1], e] for v, e in mono],
                    "lambda": lam,
                    "coeff": cval,
                })
        return rows

    def __repr__(self):
        return (f"TruncatedSeries({len(self.terms)} monomials, caps={self.caps},"
                f" floor={self.lam_floor}, mode={self.mode})")


def _multiset_permutations_count(combo: tuple) -> int:
    """Multinomial weight of a sorted index combination."""
    from math import factorial

    total = factorial(len(combo))
    run = 1
    for i in range(1, len(combo)):
        if combo[i] == combo[i - 1]:
            run += 1
        else:
            total //= factorial(run)
            run = 1
    total //= factorial(run)
    return total


def max_abs_difference(s1: TruncatedSeries, s2: TruncatedSeries) -> float:
    """Largest |coefficient difference| over the union of supports."""
    keys = s1.support() | s2.support()
    worst = 0.0
    for mono, lam in keys:
        d = abs(complex(s1.coefficient(mono, lam))
                - complex(s2.coefficient(mono, lam)))
        worst = max(worst, d)
    return worst
