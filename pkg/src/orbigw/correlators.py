"""Descendant correlators of the group theory.

The numbers come in two independent halves:

* surface counts: normalized counts of tuples (a_1..a_g, b_1..b_g,
  s_1..s_n) with prod [a_i, b_i] = prod s_j and s_j in prescribed
  conjugacy classes, divided by |G|.  Computed both by literal
  enumeration (the oracle) and by the genus-reducing recursion backed by
  the Frobenius algebra.

* psi-class intersection numbers on the moduli of curves, computed by
  the string equation plus the descendant (Virasoro/KdV) recursion.

A stable descendant correlator is the product of the two, and the large
phase space potential collects them all with exponential-generating
symmetry factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from multiprocessing import get_context
from typing import Optional, Sequence

from .algebra import ClassAlgebra
from .groups import GroupTable, conjugacy_data, direct_product
from .series import EXACT, SeriesCaps, TruncatedSeries, mono_from_vars
from .util import Q, double_factorial

DEFAULT_WORK_CAP = 10 ** 9

CLASS_BASIS = "class"
CANONICAL_RESCALED = "canonical-rescaled"


class WorkCapExceeded(Exception):
    pass


class UnstableKey(Exception):
    pass


@dataclass(frozen=True)
class CorrelatorKey:
    genus: int
    insertions: tuple  # ((level, class index), ...)

    @property
    def stable(self) -> bool:
        return 2 * self.genus - 2 + len(self.insertions) > 0

    @property
    def levels(self) -> tuple:
        return tuple(a for a, _ in self.insertions)

    @property
    def classes(self) -> tuple:
        return tuple(m for _, m in self.insertions)


# -- psi-class intersection numbers ------------------------------------------

_PSI_CACHE: dict = {}


def psi_correlator(genus: int, levels: Sequence[int]) -> Fraction:
    """<tau_{a_1} ... tau_{a_n}>_g for the point.

    Zero unless sum a_i = 3g - 3 + n.  Unstable keys (2g - 2 + n <= 0)
    are rejected.  Values are produced by the string equation and the
    descendant recursion; the genus-0 closed form (n-3)!/prod(a_i!) is
    deliberately not used here so it can serve as an independent oracle.
    """
    levels = tuple(int(a) for a in levels)
    if any(a < 0 for a in levels):
        raise ValueError("descendant levels must be >= 0")
    if 2 * genus - 2 + len(levels) <= 0:
        raise UnstableKey(f"(g={genus}, n={len(levels)}) is unstable")
    return _psi(genus, tuple(sorted(levels)))


def _psi(g: int, levels: tuple) -> Fraction:
    """Internal: sorted levels, returns 0 for unstable or off-dimension keys."""
    n = len(levels)
    if 2 * g - 2 + n <= 0 or g < 0:
        return Q(0)
    if sum(levels) != 3 * g - 3 + n:
        return Q(0)
    key = (g, levels)
    cached = _PSI_CACHE.get(key)
    if cached is not None:
        return cached

    if levels and levels[0] == 0:
        value = _psi_string(g, levels)
    else:
        value = _psi_descendant(g, levels)
    _PSI_CACHE[key] = value
    return value


def _psi_string(g: int, levels: tuple) -> Fraction:
    """Remove one tau_0: <tau_0 X>_g = sum over insertions of X lowered."""
    rest = levels[1:]
    if g == 0 and rest == (0, 0):
        return Q(1)
    total = Q(0)
    for j in range(len(rest)):
        if rest[j] == 0:
            continue
        lowered = tuple(sorted(rest[:j] + (rest[j] - 1,) + rest[j + 1:]))
        total += _psi(g, lowered)
    return total


def _psi_descendant(g: int, levels: tuple) -> Fraction:
    """Solve the level-(k) constraint for <tau_k X>_g, k = max level >= 1.

    (2n+3)!! <tau_{n+1} X>_g =
        sum_j [(2a_j+2n+1)!!/(2a_j-1)!!] <tau_{a_j+n} X\\a_j>_g
      + 1/2 sum_{i=0}^{n-1} (2i+1)!!(2n-2i-1)!! [
            <tau_i tau_{n-1-i} X>_{g-1}
          + sum splits <tau_i X_I>_{g'} <tau_{n-1-i} X_J>_{g-g'} ]
      + delta_{n,0} delta_{X empty} delta_{g,1} / 8
    with n = k - 1.
    """
    k = levels[-1]
    n_op = k - 1
    rest = levels[:-1]

    rhs = Q(0)
    for j in range(len(rest)):
        if j > 0 and rest[j] == rest[j - 1]:
            continue  # identical insertions contribute identical terms
        mult = rest.count(rest[j])
        a = rest[j]
        shifted = tuple(sorted(rest[:j] + (a + n_op,) + rest[j + 1:]))
        coeff = Q(double_factorial(2 * a + 2 * n_op + 1),
                  double_factorial(2 * a - 1))
        rhs += mult * coeff * _psi(g, shifted)

    for i in range(n_op):
        b = Q(double_factorial(2 * i + 1)
              * double_factorial(2 * (n_op - 1 - i) + 1), 2)
        if g >= 1:
            joined = tuple(sorted(rest + (i, n_op - 1 - i)))
            rhs += b * _psi(g - 1, joined)
        for sub, weight in _submultisets(rest):
            comp = _multiset_difference(rest, sub)
            total_i = sum(sub) + i
            num = total_i - len(sub) + 2
            if num % 3 != 0:
                continue
            g1 = num // 3
            if g1 < 0 or g1 > g:
                continue
            left = _psi(g1, tuple(sorted(sub + (i,))))
            if not left:
                continue
            right = _psi(g - g1, tuple(sorted(comp + (n_op - 1 - i,))))
            if right:
                rhs += b * weight * left * right

    if n_op == 0 and not rest and g == 1:
        rhs += Q(1, 8)
    return rhs / double_factorial(2 * n_op + 3)


def _submultisets(items: tuple):
    """(submultiset, multiplicity weight) pairs of a sorted tuple.

    The weight is the number of position-subsets realizing the submultiset.
    """
    distinct = []
    i = 0
    while i < len(items):
        j = i
        while j < len(items) and items[j] == items[i]:
            j += 1
        distinct.append((items[i], j - i))
        i = j
    out = [((), 1)]
    for value, mult in distinct:
        grown = []
        for sub, weight in out:
            for take in range(mult + 1):
                grown.append((sub + (value,) * take,
                              weight * math.comb(mult, take)))
        out = grown
    return out


def _multiset_difference(items: tuple, sub: tuple) -> tuple:
    rem = list(items)
    for x in sub:
        rem.remove(x)
    return tuple(rem)


def genus0_closed_form(levels: Sequence[int]) -> Fraction:
    """(n-3)!/prod(a_i!) when sum a_i = n - 3, else 0.  Oracle use only."""
    n = len(levels)
    if n < 3 or sum(levels) != n - 3:
        return Q(0)
    denom = 1
    for a in levels:
        denom *= math.factorial(a)
    return Q(math.factorial(n - 3), denom)


# -- surface counts -----------------------------------------------------------

def _distribution_chunk(args):
    """Count commutator-tuple products for a slice of the outer loop."""
    mult, inv, genus, a1_range = args
    n = len(mult)
    counts = [0] * n
    if genus == 1:
        for a1 in a1_range:
            ia = inv[a1]
            row = mult[a1]
            for b1 in range(n):
                counts[mult[mult[row[b1]][ia]][inv[b1]]] += 1
        return counts
    comm = [[mult[mult[mult[a][b]][inv[a]]][inv[b]] for b in range(n)]
            for a in range(n)]
    flat = [c for arow in comm for c in arow]

    def rec(depth, prefix):
        if depth == genus:
            counts[prefix] += 1
            return
        row = mult[prefix]
        for c in flat:
            rec(depth + 1, row[c])

    for a1 in a1_range:
        crow = comm[a1]
        for b1 in range(n):
            rec(1, crow[b1])
    return counts


class OrbifoldTheory:
    """All correlator machinery for one finite group.

    Instances cache conjugacy data, structure constants, commutator
    distributions and surface counts; they are safe to share across
    threads once built (pure lookups after memoization).
    """

    def __init__(self, group: GroupTable, *,
                 work_cap: int = DEFAULT_WORK_CAP, jobs: int = 1):
        self.group = group
        self.cd = conjugacy_data(group)
        self.algebra = ClassAlgebra(group, self.cd)
        self.work_cap = work_cap
        self.jobs = jobs
        self._omega_memo: dict = {}
        self._distributions: dict = {}
        self._potential_cache: dict = {}
        self._enumerated_tuples = 0
        self._enumeration_seconds = 0.0

    @property
    def r(self) -> int:
        return self.cd.r

    # -- oracle side ---------------------------------------------------------

    def commutator_distribution(self, genus: int, jobs: Optional[int] = None):
        """counts[x] = #{(a_1..a_g, b_1..b_g) : prod [a_i, b_i] = x}.

        Literal enumeration of |G|^{2g} tuples; the outer (a_1, b_1) loop
        splits across worker processes.  genus 0 is the empty product.
        """
        if genus in self._distributions:
            return self._distributions[genus]
        n = self.group.order
        if genus == 0:
            counts = [0] * n
            counts[self.group.identity] = 1
            self._distributions[0] = counts
            return counts

        import time
        jobs = self.jobs if jobs is None else jobs
        started = time.perf_counter()
        mult = [list(row) for row in self.group.mult]
        inv = list(self.group.inv)
        if jobs <= 1 or n < 8:
            counts = _distribution_chunk((mult, inv, genus, range(n)))
        else:
            chunks = []
            step = max(1, (n + jobs - 1) // jobs)
            for lo in range(0, n, step):
                chunks.append((mult, inv, genus, range(lo, min(lo + step, n))))
            ctx = get_context("fork")
            with ctx.Pool(processes=min(jobs, len(chunks))) as pool:
                partials = pool.map(_distribution_chunk, chunks)
            counts = [sum(p[i] for p in partials) for i in range(n)]
        self._enumeration_seconds += time.perf_counter() - started
        self._enumerated_tuples += n ** (2 * genus)
        self._distributions[genus] = counts
        return counts

    def surface_count_brute(self, genus: int, classes: Sequence[int], *,
                            jobs: Optional[int] = None) -> Fraction:
        """Oracle count by enumeration, in the given argument order."""
        cd = self.cd
        work = self.group.order ** (2 * genus)
        for c in classes:
            work *= cd.class_size[c]
        if work > self.work_cap:
            raise WorkCapExceeded(f"{work} tuples exceed cap {self.work_cap}")
        counts = self.commutator_distribution(genus, jobs=jobs)
        mult = self.group.mult
        # The commutator product must equal prod sigma_j, so each literal
        # sigma-tuple contributes the tuple count at its product.
        total = 0
        classes = list(classes)

        def rec(depth, acc):
            nonlocal total
            if depth == len(classes):
                total += counts[acc]
                return
            for s in cd.classes[classes[depth]]:
                rec(depth + 1, mult[acc][s])

        rec(0, self.group.identity)
        return Q(total, self.group.order)

    # -- recursion side --------------------------------------------------------

    def surface_count(self, genus: int, classes: Sequence[int]) -> Fraction:
        """Genus reduced to zero by cutting loops; genus 0 via the algebra.

        Cutting loops: Omega_g(c) = sum over classes z of
        |C(z)| * Omega_{g-1}(c, z, z^{-1}).  Genus 0 with n >= 3 is
        eta(e_{c_1} * ... * e_{c_{n-1}}, e_{c_n}); n <= 2 is counted
        directly from the definition.
        """
        key = (genus, tuple(sorted(classes)))
        cached = self._omega_memo.get(key)
        if cached is not None:
            return cached
        value = self._surface_count_impl(genus, key[1])
        self._omega_memo[key] = value
        return value

    def _surface_count_impl(self, genus, classes) -> Fraction:
        cd = self.cd
        if genus > 0:
            total = Q(0)
            for z in range(cd.r):
                zc = cd.centralizer_of_class(z)
                total += zc * self.surface_count(
                    genus - 1, classes + (z, cd.inverse_class[z]))
            return total
        n = len(classes)
        if n == 0:
            return Q(1, self.group.order)
        if n == 1:
            return (Q(1, self.group.order) if classes[0] == 0 else Q(0))
        if n == 2:
            c1, c2 = classes
            if cd.inverse_class[c1] != c2:
                return Q(0)
            return Q(cd.class_size[c1], self.group.order)
        alg = self.algebra
        vec = alg.basis_vector(classes[0])
        for c in classes[1:-1]:
            vec = alg.quantum_product(vec, alg.basis_vector(c))
        return alg.eta(vec, alg.basis_vector(classes[-1]))

    # -- correlators -------------------------------------------------------------

    def orbifold_correlator(self, key: CorrelatorKey) -> Fraction:
        """psi intersection number times the surface count (zero when the
        dimension constraint fails); empty correlators vanish."""
        if not key.stable:
            raise UnstableKey(f"unstable key {key}")
        n = len(key.insertions)
        if n == 0:
            return Q(0)
        if sum(key.levels) != 3 * key.genus - 3 + n:
            return Q(0)
        psi = _psi(key.genus, tuple(sorted(key.levels)))
        if not psi:
            return Q(0)
        return psi * self.surface_count(key.genus, key.classes)

    def canonical_correlator(self, genus: int, nus: Sequence[Fraction],
                             insertions: Sequence) -> Fraction:
        """Correlator of idempotent-basis insertions ((level, index), ...).

        nu^{1-g} <tau>_g when every insertion carries the same index;
        mixed indices vanish.
        """
        insertions = tuple(insertions)
        if 2 * genus - 2 + len(insertions) <= 0:
            raise UnstableKey(f"(g={genus}, n={len(insertions)}) is unstable")
        indices = {alpha for _a, alpha in insertions}
        if len(indices) != 1:
            return Q(0)
        alpha = indices.pop()
        psi = _psi(genus, tuple(sorted(a for a, _ in insertions)))
        return Q(nus[alpha]) ** (1 - genus) * psi

    # -- the potential -------------------------------------------------------------

    def potential(self, caps: SeriesCaps, *, basis: str = CLASS_BASIS,
                  lam_floor: int = -2,
                  mutate=None) -> TruncatedSeries:
        """Large phase space potential as a truncated series.

        Class basis: variables (a, class index), exact rational, monomial
        coefficient <tau_{a_1}(e_{m_1})...>_g / aut.  Canonical-rescaled
        basis: variables (a, idempotent index), r disjoint copies of the
        point potential.  ``mutate`` is a debug hook ((monomial, lambda)
        pair) that doubles one stored coefficient.
        """
        cache_key = (caps, basis, lam_floor)
        cached = self._potential_cache.get(cache_key)
        if cached is None:
            if basis == CLASS_BASIS:
                cached = self._potential_class(caps, lam_floor)
            elif basis == CANONICAL_RESCALED:
                cached = self._potential_canonical(caps, lam_floor)
            else:
                raise ValueError(f"unknown basis {basis!r}")
            self._potential_cache[cache_key] = cached
        series = cached.copy()
        if mutate is not None:
            mono, lam = mutate
            mono = tuple(sorted(mono))
            lc = series.terms.get(mono)
            if lc is None or lam not in lc:
                raise KeyError(f"no stored coefficient at {mono} lambda^{lam}")
            lc[lam] = 2 * lc[lam]
        return series

    def _potential_class(self, caps, lam_floor):
        out = TruncatedSeries(caps, mode=EXACT, system=CLASS_BASIS,
                              lam_floor=lam_floor)
        r = self.r
        for genus, levels, psi in self._stable_level_keys(caps):
            lam = 2 * genus - 2
            if lam > caps.lam_ceiling or lam < lam_floor:
                continue
            blocks = _level_blocks(levels)
            for assignment in _class_assignments(blocks, r):
                classes = []
                variables = []
                aut = 1
                for (level, _mult), chosen in zip(blocks, assignment):
                    classes.extend(chosen)
                    variables.extend((level, cls) for cls in chosen)
                    aut *= _multiset_aut(chosen)
                omega = self.surface_count(genus, tuple(classes))
                if not omega:
                    continue
                out._set(mono_from_vars(variables), lam, psi * omega / aut)
        return out

    def _potential_canonical(self, caps, lam_floor):
        out = TruncatedSeries(caps, mode=EXACT, system=CANONICAL_RESCALED,
                              lam_floor=lam_floor)
        for genus, levels, psi in self._stable_level_keys(caps):
            lam = 2 * genus - 2
            if lam > caps.lam_ceiling or lam < lam_floor:
                continue
            aut = _multiset_aut(levels)
            for alpha in range(self.r):
                key = mono_from_vars((a, alpha) for a in levels)
                out._set(key, lam, psi / aut)
        return out

    def _stable_level_keys(self, caps):
        """(genus, sorted levels, psi value) for every contributing key."""
        for genus in range(caps.genus + 1):
            for n in range(1, caps.degree + 1):
                if 2 * genus - 2 + n <= 0:
                    continue
                target = 3 * genus - 3 + n
                if target < 0:
                    continue
                for levels in _bounded_partitions(target, n, caps.level):
                    psi = _psi(genus, levels)
                    if psi:
                        yield genus, levels, psi

    # -- tensor structure ---------------------------------------------------------

    def profile(self) -> dict:
        secs = max(self._enumeration_seconds, 1e-9)
        return {
            "enumerated_tuples": self._enumerated_tuples,
            "enumeration_seconds": self._enumeration_seconds,
            "tuples_per_second": self._enumerated_tuples / secs,
        }


def _bounded_partitions(total: int, parts: int, cap: int):
    """Sorted tuples of ``parts`` nonnegative ints <= cap summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total > parts * cap:
        return

    def rec(remaining, slots, low):
        if slots == 1:
            if low <= remaining <= cap:
                yield (remaining,)
            return
        for first in range(low, min(cap, remaining) + 1):
            for rest in rec(remaining - first, slots - 1, first):
                yield (first,) + rest

    yield from rec(total, parts, 0)


def _level_blocks(levels: tuple):
    """Run-length encode a sorted level tuple."""
    blocks = []
    i = 0
    while i < len(levels):
        j = i
        while j < len(levels) and levels[j] == levels[i]:
            j += 1
        blocks.append((levels[i], j - i))
        i = j
    return blocks


def _class_assignments(blocks, r):
    """Cartesian product of class multisets, one per equal-level block."""
    pools = [list(combinations_with_replacement(range(r), mult))
             for _level, mult in blocks]

    def rec(i):
        if i == len(pools):
            yield ()
            return
        for choice in pools[i]:
            for rest in rec(i + 1):
                yield (choice,) + rest

    yield from rec(0)


def _multiset_aut(items) -> int:
    """prod of factorials of multiplicities."""
    aut = 1
    run = 1
    seq = list(items)
    for i in range(1, len(seq)):
        if seq[i] == seq[i - 1]:
            run += 1
            aut *= run
        else:
            run = 1
    return aut


# -- product groups ------------------------------------------------------------

def product_class_map(g1: GroupTable, g2: GroupTable):
    """Map (class in G, class in H) -> class in G x H, plus the theories.

    Classes of a direct product are exactly pairs of classes, matched via
    representatives.
    """
    prod = direct_product(g1, g2)
    cd1, cd2, cdp = conjugacy_data(g1), conjugacy_data(g2), conjugacy_data(prod)
    mapping = {}
    for k1 in range(cd1.r):
        for k2 in range(cd2.r):
            x = cd1.representative[k1] * g2.order + cd2.representative[k2]
            mapping[(k1, k2)] = cdp.class_of[x]
    if len(set(mapping.values())) != cd1.r * cd2.r:
        raise AssertionError("product classes do not split as pairs")
    return prod, mapping


def tensor_omega_check(g1: GroupTable, g2: GroupTable, *, genus_max: int = 2,
                       n_max: int = 3,
                       work_cap: int = DEFAULT_WORK_CAP) -> dict:
    """Verify multiplicativity of surface counts over a direct product.

    Checks Omega^{GxH}_g((c_1, d_1), ...) = Omega^G_g(c) * Omega^H_g(d)
    exactly for every class tuple of size <= n_max and genus <= genus_max.
    """
    prod, mapping = product_class_map(g1, g2)
    t1 = OrbifoldTheory(g1, work_cap=work_cap)
    t2 = OrbifoldTheory(g2, work_cap=work_cap)
    tp = OrbifoldTheory(prod, work_cap=work_cap)
    checked = 0
    mismatches = []
    pair_list = sorted(mapping)
    for genus in range(genus_max + 1):
        for n in range(n_max + 1):
            for pairs in combinations_with_replacement(pair_list, n):
                lhs = tp.surface_count(genus, tuple(mapping[p] for p in pairs))
                rhs = t1.surface_count(genus, tuple(p[0] for p in pairs)) \
                    * t2.surface_count(genus, tuple(p[1] for p in pairs))
                checked += 1
                if lhs != rhs:
                    mismatches.append({
                        "genus": genus,
                        "pairs": [list(p) for p in pairs],
                        "product": str(lhs),
                        "factors": str(rhs),
                    })
    return {"checked": checked, "mismatches": mismatches,
            "passed": not mismatches}
