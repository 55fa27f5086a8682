"""Polynomial maps between finite abelian groups.

A map P: G -> A is polynomial of degree at most k when every (k+1)-fold
discrete derivative d_h P(x) = P(x+h) - P(x) vanishes.  Maps are stored as
exact value tables; the degree is certified by iterating derivatives along
the standard generators only, which suffices because

    d_{g+h} P(x) = d_g P(x+h) + d_h P(x),

so nilpotence of the generator derivatives is equivalent to nilpotence of
all derivatives (tested exhaustively in the suite).  Non-polynomial maps
are detected by cycle detection: the generator-derivative operator acts on
a finite state space, so the iteration either reaches the zero state or
revisits a previous one.

The module also builds the constructive polynomial cross-section of any
surjective homomorphism: representative lifts between cyclic p-groups
(degree at most (d-s)p^s + 1, via the divisibility of the p^s-th power of
the circulant forward-difference matrix), a Gaussian-elimination style
decomposition M = S (A, id) P T of a surjection of p-groups, and a
prime-by-prime recursion for the general case.  No floating point is used
anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

from .errors import CapExceeded, PostconditionError
from .groups import FinAbGroup, GroupElement, Homomorphism, _factorize, primary_decompose

__all__ = [
    "PolyMap",
    "BinomialPoly",
    "SurjectionDecomposition",
    "binom",
    "derivative",
    "degree",
    "cyclic_lift",
    "forward_difference_matrix",
    "forward_difference_power",
    "decompose_surjection",
    "polynomial_cross_section",
]


def binom(x: int, i: int) -> int:
    """Binomial coefficient C(x, i) for arbitrary integer x, exact."""
    if i < 0:
        raise ValueError("lower index must be nonnegative")
    num = 1
    for t in range(i):
        num *= x - t
    return num // factorial(i)


@dataclass(frozen=True)
class PolyMap:
    """Map between finite abelian groups stored as an exact value table.

    ``table[i]`` is the coordinate tuple of the image of the i-th domain
    element in row-major enumeration order.  ``degree`` is the certified
    degree (None when the map is not polynomial of any degree).
    """

    domain: FinAbGroup
    codomain: FinAbGroup
    table: tuple[tuple[int, ...], ...]

    def __init__(self, domain, codomain, table):
        table = tuple(
            tuple(int(c) % m for c, m in zip(row, codomain.orders, strict=True))
            for row in table
        )
        if len(table) != domain.order:
            raise ValueError("table must have one value per domain element")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "table", table)

    @classmethod
    def constant(cls, domain: FinAbGroup, value: GroupElement) -> "PolyMap":
        return cls(domain, value.group, (value.coords,) * domain.order)

    @classmethod
    def from_hom(cls, h: Homomorphism) -> "PolyMap":
        return cls(h.domain, h.codomain, tuple(h(x).coords for x in h.domain.elements()))

    @classmethod
    def from_function(cls, domain, codomain, fn) -> "PolyMap":
        return cls(domain, codomain, tuple(fn(x).coords for x in domain.elements()))

    def __call__(self, x: GroupElement) -> GroupElement:
        if x.group != self.domain:
            raise ValueError("element not in the domain")
        return GroupElement(self.codomain, self.table[self.domain.index_of(x.coords)])

    def compose(self, other: "PolyMap") -> "PolyMap":
        """self after other."""
        if other.codomain != self.domain:
            raise ValueError("composition mismatch")
        return PolyMap.from_function(other.domain, self.codomain, lambda x: self(other(x)))

    def translate_output(self, u: GroupElement) -> "PolyMap":
        """x -> self(x) + u."""
        if u.group != self.codomain:
            raise ValueError("translation lives in the wrong group")
        return PolyMap(
            self.domain,
            self.codomain,
            tuple((GroupElement(self.codomain, r) + u).coords for r in self.table),
        )

    def is_zero(self) -> bool:
        return all(all(c == 0 for c in row) for row in self.table)

    @cached_property
    def degree(self) -> int | None:
        return degree(self)

    def to_json(self) -> dict:
        return {
            "domain": list(self.domain.orders),
            "codomain": list(self.codomain.orders),
            "table": [list(r) for r in self.table],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolyMap":
        return cls(
            FinAbGroup(tuple(data["domain"])),
            FinAbGroup(tuple(data["codomain"])),
            tuple(tuple(r) for r in data["table"]),
        )


def derivative(P: PolyMap, h: GroupElement) -> PolyMap:
    """Discrete derivative x -> P(x + h) - P(x)."""
    if h.group != P.domain:
        raise ValueError("direction not in the domain of P")
    dom = P.domain
    out = []
    for x in dom.elements():
        a = P.table[dom.index_of((x + h).coords)]
        b = P.table[dom.index_of(x.coords)]
        out.append(tuple((u - v) % m for u, v, m in zip(a, b, P.codomain.orders)))
    return PolyMap(dom, P.codomain, tuple(out))


def _derivative_table(dom: FinAbGroup, cod: FinAbGroup, table, shift_idx) -> tuple:
    return tuple(
        tuple((u - v) % m for u, v, m in zip(table[j], table[i], cod.orders))
        for i, j in enumerate(shift_idx)
    )


def degree(P: PolyMap) -> int | None:
    """Certified degree of P, or None when P is not polynomial.

    Level i holds the set of all i-fold generator derivatives of P (the
    operators commute, deduplicated as tables).  The minimal d with the
    (d+1)-st level all zero is returned; if a level set repeats before the
    zero state is reached, no level can ever vanish and None is returned.
    """
    dom = P.domain
    gens = dom.generators()
    zero_row = (0,) * P.codomain.ncoords
    if not gens:
        return 0
    shift_idxs = []
    for g in gens:
        shift_idxs.append([dom.index_of((x + g).coords) for x in dom.elements()])
    cur = {P.table}
    level = 0
    seen: set[frozenset] = set()
    while True:
        if all(all(r == zero_row for r in t) for t in cur):
            return max(level - 1, 0)
        state = frozenset(cur)
        if state in seen:
            return None
        seen.add(state)
        cur = {
            _derivative_table(dom, P.codomain, t, idx) for t in cur for idx in shift_idxs
        }
        level += 1


# ---------------------------------------------------------------------------
# binomial polynomials on Z


@dataclass(frozen=True)
class BinomialPoly:
    """x -> a_0 + sum_i a_i * C(x, i) on the integers, valued in a group.

    Binomials are exact integers, reduced lazily into the codomain.  With k
    coefficients and codomain torsion m, the function is periodic with
    minimal period dividing m^(k+1).
    """

    codomain: FinAbGroup
    constant: GroupElement
    coefficients: tuple[GroupElement, ...]

    def __call__(self, x: int) -> GroupElement:
        acc = self.constant
        for i, a in enumerate(self.coefficients, start=1):
            acc = acc + binom(x, i) * a
        return acc

    def minimal_period(self) -> int:
        """Smallest P >= 1 with values repeating at distance P everywhere."""
        m = self.codomain.torsion
        k = len(self.coefficients)
        window = m ** (k + 1)
        vals = [self(x) for x in range(2 * window)]
        if any(vals[x + window] != vals[x] for x in range(window)):
            raise PostconditionError(f"m^(k+1) = {window} is not a period")
        for p in range(1, window + 1):
            if window % p:
                continue  # the minimal period divides any period
            if all(vals[x + p] == vals[x] for x in range(window)):
                return p
        raise PostconditionError("unreachable: the window length is a period")


# ---------------------------------------------------------------------------
# cyclic lifts and the forward-difference matrix


def cyclic_lift(p: int, s: int, d: int) -> PolyMap:
    """Representative lift Z_{p^s} -> Z_{p^d}, n mod p^s -> n mod p^d.

    A cross-section of the reduction map, polynomial of degree at most
    (d-s)p^s + 1.
    """
    if d < s or s < 1:
        raise ValueError("need d >= s >= 1")
    dom = FinAbGroup((p**s,))
    cod = FinAbGroup((p**d,))
    lift = PolyMap(dom, cod, tuple((n,) for n in range(p**s)))
    deg = lift.degree
    if deg is None or deg > (d - s) * p**s + 1:
        raise PostconditionError(
            f"lift degree {deg} violates the bound {(d - s) * p**s + 1}"
        )
    return lift


def forward_difference_matrix(n: int) -> list[list[int]]:
    """Circulant forward-difference matrix: -1 diagonal, 1 superdiagonal."""
    C = [[0] * n for _ in range(n)]
    for i in range(n):
        C[i][i] = -1
        C[i][(i + 1) % n] = 1
    return C


def _mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                row = out[i]
                for j in range(m):
                    row[j] += a * Bt[j]
    return out


def _mat_pow(A, e):
    n = len(A)
    R = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    B = [row[:] for row in A]
    while e:
        if e & 1:
            R = _mat_mul(R, B)
        e >>= 1
        if e:
            B = _mat_mul(B, B)
    return R


def forward_difference_power(p: int, s: int, *, cap: int = 256) -> list[list[int]]:
    """Exact integer power C_{p^s}^{p^s} of the forward-difference matrix.

    Every entry is a multiple of p (asserted), which is what makes each
    further block of p^s derivatives of a representative lift gain a factor
    of p.
    """
    n = p**s
    if n > cap:
        raise CapExceeded(f"p^s = {n} exceeds cap {cap}")
    M = _mat_pow(forward_difference_matrix(n), n)
    for row in M:
        for e in row:
            if e % p != 0:
                raise PostconditionError(f"entry {e} of C^{n} is not a multiple of {p}")
    return M


# ---------------------------------------------------------------------------
# decomposition of a surjection of p-groups


def _p_exponent(m: int, p: int) -> int:
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    if m != 1:
        raise ValueError("coordinate order is not a power of p")
    return e


@dataclass(frozen=True)
class SurjectionDecomposition:
    """M = codomain_iso o (core, id) o reduction o domain_iso, all exact.

    ``domain_iso`` (an automorphism of B) and ``codomain_iso`` (an
    automorphism of A) absorb the row and column operations; ``reduction``
    passes the ``passthrough`` domain coordinates (one per maximal-order
    codomain coordinate, count = ``m``) through unchanged and reduces the
    remaining maximal-order coordinates from Z_{p^n} to Z_{p^(n-1)};
    ``core`` is the induced surjection between groups of torsion p^(n-1)
    obtained by forgetting the passthrough coordinates and maximal rows.
    """

    source: Homomorphism
    codomain_iso: Homomorphism
    domain_iso: Homomorphism
    reduction: Homomorphism
    core: Homomorphism
    m: int
    passthrough: tuple[int, ...]  # pivot coordinates of reduction's codomain
    max_rows: tuple[int, ...]  # maximal-order codomain coordinates

    def middle(self) -> Homomorphism:
        """(core, id) as a map reduction.codomain -> source.codomain."""
        B2 = self.reduction.codomain
        A = self.source.codomain
        core_cols = [j for j in range(B2.ncoords) if j not in self.passthrough]
        core_rows = [i for i in range(A.ncoords) if i not in self.max_rows]
        mat = [[0] * B2.ncoords for _ in range(A.ncoords)]
        for i_local, i in enumerate(core_rows):
            for j_local, j in enumerate(core_cols):
                mat[i][j] = self.core.matrix[i_local][j_local]
        for i, j in zip(self.max_rows, self.passthrough):
            mat[i][j] = 1
        return Homomorphism(B2, A, mat)

    def verify(self) -> None:
        """Pointwise identity M = S o (core, id) o P o T on all of B."""
        composed = self.codomain_iso.compose(self.middle()).compose(self.reduction).compose(self.domain_iso)
        for x in self.source.domain.elements():
            if composed(x) != self.source(x):
                raise PostconditionError("decomposition does not reproduce M")


def decompose_surjection(M: Homomorphism) -> SurjectionDecomposition:
    """Split a surjection of p-groups along its maximal-order coordinates.

    Gaussian elimination in the category of abelian p-groups: every
    maximal-order codomain coordinate admits a unit pivot on a
    maximal-order domain coordinate (else M is not surjective); pivot rows
    and columns are cleared by shears that are automatically well-defined,
    the pivots pass through, and the remaining block is torsion p^(n-1).
    The pivot is the first usable coordinate in lexicographic order.
    """
    B, A = M.domain, M.codomain
    primes = {p for o in (*B.orders, *A.orders) if o > 1 for p in _factorize(o)}
    if len(primes) > 1:
        raise ValueError(f"mixed primes {sorted(primes)}: not a p-group surjection")
    if not M.is_surjective():
        raise ValueError("M is not surjective")
    if not primes:  # trivial groups
        p, n = 2, 0
    else:
        (p,) = primes
        n = max(_p_exponent(o, p) for o in B.orders if o > 1)
    a_exp = [_p_exponent(o, p) if o > 1 else 0 for o in B.orders]
    b_exp = [_p_exponent(o, p) if o > 1 else 0 for o in A.orders]
    if n and max(b_exp, default=0) > n:
        raise ValueError("codomain torsion exceeds domain torsion: not surjective")

    S = Homomorphism.identity(A)
    T = Homomorphism.identity(B)
    mid = M
    max_rows = tuple(i for i, e in enumerate(b_exp) if e == n and n > 0)
    pivots: list[int] = []
    for i in max_rows:
        pivot = None
        for j in range(B.ncoords):
            if a_exp[j] == n and j not in pivots and mid.matrix[i][j] % p != 0:
                pivot = j
                break
        if pivot is None:
            raise PostconditionError("no unit pivot for a maximal-order row")
        pivots.append(pivot)
        # scale the pivot column so the pivot entry becomes 1
        u = pow(mid.matrix[i][pivot], -1, p**n)
        F = _scale_auto(B, pivot, u)
        mid = mid.compose(F)
        T = F.inverse().compose(T)
        # clear the rest of the pivot row with column shears
        for j in range(B.ncoords):
            r = mid.matrix[i][j]
            if j != pivot and r:
                F = _shear_auto(B, pivot, j, -r)
                mid = mid.compose(F)
                T = F.inverse().compose(T)
        # clear the rest of the pivot column with row shears
        for i2 in range(A.ncoords):
            c = mid.matrix[i2][pivot]
            if i2 != i and c:
                E = _shear_auto(A, i2, i, -c)
                mid = E.compose(mid)
                S = S.compose(E.inverse())

    # reduction: pivots pass through, other maximal-order coordinates drop to p^(n-1)
    reduced_orders = []
    for j, o in enumerate(B.orders):
        if j in pivots or (a_exp[j] < n or n == 0):
            reduced_orders.append(o)
        else:
            reduced_orders.append(o // p)
    B2 = FinAbGroup(tuple(reduced_orders))
    P = Homomorphism(B, B2, [[1 if i == j else 0 for j in range(B.ncoords)] for i in range(B2.ncoords)])

    core_cols = [j for j in range(B.ncoords) if j not in pivots]
    core_rows = [i for i in range(A.ncoords) if i not in max_rows]
    core_dom = FinAbGroup(tuple(B2.orders[j] for j in core_cols))
    core_cod = FinAbGroup(tuple(A.orders[i] for i in core_rows))
    core = Homomorphism(
        core_dom, core_cod, [[mid.matrix[i][j] for j in core_cols] for i in core_rows]
    )
    if not core.is_surjective():
        raise PostconditionError("core of the decomposition is not surjective")
    dec = SurjectionDecomposition(
        source=M,
        codomain_iso=S,
        domain_iso=T,
        reduction=P,
        core=core,
        m=len(max_rows),
        passthrough=tuple(pivots),
        max_rows=max_rows,
    )
    dec.verify()
    return dec


def _scale_auto(G: FinAbGroup, j: int, u: int) -> Homomorphism:
    mat = [[1 if a == b else 0 for b in range(G.ncoords)] for a in range(G.ncoords)]
    mat[j][j] = u
    h = Homomorphism(G, G, mat)
    if not h.is_bijective():
        raise PostconditionError("scaling by a non-unit")
    return h


def _shear_auto(G: FinAbGroup, i: int, j: int, c: int) -> Homomorphism:
    """Automorphism adding c * coordinate j into coordinate i."""
    mat = [[1 if a == b else 0 for b in range(G.ncoords)] for a in range(G.ncoords)]
    mat[i][j] = c
    return Homomorphism(G, G, mat)


# ---------------------------------------------------------------------------
# polynomial cross-sections


def _section_of_reduction(dec: SurjectionDecomposition) -> PolyMap:
    """Coordinate-wise section of the reduction map by representative lifts."""
    B, B2 = dec.reduction.domain, dec.reduction.codomain
    lifts = []
    for j in range(B.ncoords):
        if B2.orders[j] == B.orders[j]:
            lifts.append(None)  # identity coordinate
        else:
            lifts.append(list(range(B2.orders[j])))  # representative lift

    def fn(y: GroupElement) -> GroupElement:
        coords = []
        for j, c in enumerate(y.coords):
            coords.append(c if lifts[j] is None else lifts[j][c])
        return GroupElement(B, tuple(coords))

    return PolyMap.from_function(B2, B, fn)


def _pgroup_cross_section(M: Homomorphism) -> PolyMap:
    """Polynomial cross-section of a surjection of p-groups, by recursion.

    Section of M = S (core, id) P T is T^{-1} o section(P) o (section(core), id)
    o S^{-1}; the recursion descends in the torsion exponent n and bottoms
    out at the trivial codomain.
    """
    B, A = M.domain, M.codomain
    if A.order == 1:
        return PolyMap.constant(A, B.zero)
    dec = decompose_surjection(M)
    core_section = _pgroup_cross_section(dec.core)
    red_section = _section_of_reduction(dec)
    B2 = dec.reduction.codomain
    core_cols = [j for j in range(B2.ncoords) if j not in dec.passthrough]
    core_rows = [i for i in range(A.ncoords) if i not in dec.max_rows]
    s_inv = dec.codomain_iso.inverse()
    t_inv = dec.domain_iso.inverse()

    def fn(y: GroupElement) -> GroupElement:
        w = s_inv(y)
        core_part = core_section(
            GroupElement(dec.core.codomain, tuple(w.coords[i] for i in core_rows))
        )
        coords = [0] * B2.ncoords
        for j_local, j in enumerate(core_cols):
            coords[j] = core_part.coords[j_local]
        for i, j in zip(dec.max_rows, dec.passthrough):
            coords[j] = w.coords[i]
        lifted = red_section(GroupElement(B2, tuple(coords)))
        return t_inv(lifted)

    sec = PolyMap.from_function(A, B, fn)
    for y in A.elements():
        if M(sec(y)) != y:
            raise PostconditionError("cross-section fails tau o iota = id")
    return sec


def polynomial_cross_section(tau: Homomorphism) -> PolyMap:
    """Polynomial cross-section iota of a surjection tau: B ->> A.

    Splits both sides into their primary components (a homomorphism between
    coprime components is zero, so the conjugated matrix is block
    diagonal), sections each p-group block by the decomposition recursion,
    and recombines.  tau o iota = id is checked on all of A and the
    certified degree is available as ``iota.degree``; the degree depends
    only on the torsions of A and B, not on their orders.
    """
    if not tau.is_surjective():
        raise ValueError("tau is not surjective")
    B, A = tau.domain, tau.codomain
    dec_b = primary_decompose(B)
    dec_a = primary_decompose(A)
    conj = dec_a.iso.compose(tau).compose(dec_b.iso_inv)
    sections = {}
    for p in dec_a.primes:
        Ap = dec_a.components[p]
        if p not in dec_b.components:
            raise ValueError("tau cannot be surjective: codomain prime missing upstream")
        Bp = dec_b.components[p]
        a0, a1 = dec_a.slices[p]
        b0, b1 = dec_b.slices[p]
        block = [[conj.matrix[i][j] for j in range(b0, b1)] for i in range(a0, a1)]
        tau_p = Homomorphism(Bp, Ap, block)
        sections[p] = _pgroup_cross_section(tau_p)

    def fn(y: GroupElement) -> GroupElement:
        parts = dec_a.split(y)
        coords = [0] * dec_b.product.ncoords
        for p in dec_a.primes:
            xp = sections[p](parts[p])
            s0, _ = dec_b.slices[p]
            for t, c in enumerate(xp.coords):
                coords[s0 + t] = c
        return dec_b.iso_inv(GroupElement(dec_b.product, tuple(coords)))

    iota = PolyMap.from_function(A, B, fn)
    for y in A.elements():
        if tau(iota(y)) != y:
            raise PostconditionError("cross-section fails tau o iota = id")
    if iota.degree is None:
        raise PostconditionError("constructed cross-section is not polynomial")
    return iota
