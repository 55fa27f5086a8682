"""Complex and exact-phase functions on finite abelian groups, and their norms.

Functions carry a dense complex table; unimodular functions built from
rational phases additionally carry the exact phases theta in Q/Z (meaning
e(theta)), which the exact-arithmetic paths use for golden-value checks:
sums of e(a/N) are tracked as integer count vectors indexed by a mod N and
only converted to floating point at the very end.

Norms:

  * ``gowers_norm``      - U^{k+1} by the standard recursion
                           ||f||_{U^{k+1}}^{2^{k+1}} = E_h ||D_h f||_{U^k}^{2^k}
                           with U^1 base |E f| and D_h f(x) = f(x+h) conj(f(x)),
  * ``gowers_norm_exact``- the same value via exact phase counting,
  * ``box_norm_4cycle``  - the 4-cycle (Gowers 2-box) norm on a designated
                           2-factor product,
  * ``cut_norm_lower``   - certified lower bounds for the (n,d)-cut norm by
                           alternating maximization over the witness family.

Projected phase polynomials phi_*tau(x) = E_{y in tau^{-1}(x)} e(phi(y)) are
computed with exact fiber enumeration; their obstruction inequality
|<f, phi_*tau>| <= ||f||_{U^{k+1}} and the expansion as an average of the
phase polynomials phi o iota_u over kernel translates iota_u = iota + u of a
polynomial cross-section are both implemented with exact verification.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as iproduct

import numpy as np

from .errors import CapExceeded, PostconditionError
from .groups import FinAbGroup, GroupElement, Homomorphism, kernel
from .polymaps import PolyMap

__all__ = [
    "GroupFunction",
    "ProjectedPhase",
    "ProjectedAverage",
    "ObstructionReport",
    "CutNormResult",
    "gowers_norm",
    "gowers_norm_exact",
    "correlation",
    "phase",
    "project_phase",
    "obstruction_check",
    "projected_as_average",
    "box_norm_4cycle",
    "cut_norm_lower",
    "fourier_coefficients",
]

_TOL = 1e-9

_add_tables: dict[tuple[int, ...], np.ndarray] = {}


def _add_table(G: FinAbGroup) -> np.ndarray:
    """Index table T[h, x] = index of h + x, in row-major element order."""
    if G.orders in _add_tables:
        return _add_tables[G.orders]
    n = G.order
    idx = np.arange(n)
    digits = []
    rem = idx.copy()
    for m in reversed(G.orders):
        digits.append(rem % m)
        rem //= m
    digits.reverse()
    out = np.zeros((n, n), dtype=np.int64)
    for dj, m in zip(digits, G.orders):
        out = out * m + (dj[:, None] + dj[None, :]) % m
    _add_tables[G.orders] = out
    return out


class GroupFunction:
    """Function on a finite abelian group: complex table, optional exact phases."""

    def __init__(self, group: FinAbGroup, values, phases=None):
        self.group = group
        self.values = np.asarray(values, dtype=np.complex128)
        if self.values.shape != (group.order,):
            raise ValueError("value table must have one entry per element")
        self.phases = tuple(phases) if phases is not None else None
        if self.phases is not None and len(self.phases) != group.order:
            raise ValueError("phase table must have one entry per element")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_phases(cls, group: FinAbGroup, phases) -> "GroupFunction":
        """Exactly unimodular function x -> e(theta_x), theta in Q/Z."""
        ph = tuple(Fraction(p) % 1 for p in phases)
        vals = [cmath.exp(2j * math.pi * float(p)) for p in ph]
        return cls(group, vals, ph)

    @classmethod
    def ones(cls, group: FinAbGroup) -> "GroupFunction":
        return cls.from_phases(group, [Fraction(0)] * group.order)

    @classmethod
    def character(cls, group: FinAbGroup, t) -> "GroupFunction":
        """chi_t(x) = e(sum_j t_j x_j / m_j)."""
        t = tuple(t)
        if len(t) != group.ncoords:
            raise ValueError("character index needs one entry per coordinate")
        ph = [
            sum(
                (Fraction(tj * xj, mj) for tj, xj, mj in zip(t, x.coords, group.orders)),
                start=Fraction(0),
            )
            for x in group.elements()
        ]
        return cls.from_phases(group, ph)

    # -- basic structure -----------------------------------------------------

    def is_exact(self) -> bool:
        return self.phases is not None

    def is_one_bounded(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values)) <= 1 + tol)

    def assert_one_bounded(self) -> None:
        if not self.is_one_bounded():
            raise ValueError("function is not 1-bounded")

    def phase_denominator(self) -> int:
        if self.phases is None:
            raise ValueError("no exact phases available")
        N = 1
        for p in self.phases:
            N = N * p.denominator // math.gcd(N, p.denominator)
        return N

    def phase_ints(self, N: int | None = None) -> np.ndarray:
        """Phases as integers a with theta = a/N."""
        if N is None:
            N = self.phase_denominator()
        return np.array(
            [(p.numerator * (N // p.denominator)) % N for p in self.phases], dtype=np.int64
        )

    # -- pointwise operations (exactness is preserved when possible) ---------

    def multiply(self, other: "GroupFunction") -> "GroupFunction":
        if other.group != self.group:
            raise ValueError("functions on different groups")
        if self.phases is not None and other.phases is not None:
            return GroupFunction.from_phases(
                self.group, [a + b for a, b in zip(self.phases, other.phases)]
            )
        return GroupFunction(self.group, self.values * other.values)

    def conjugate(self) -> "GroupFunction":
        if self.phases is not None:
            return GroupFunction.from_phases(self.group, [-p for p in self.phases])
        return GroupFunction(self.group, np.conj(self.values))

    def translate(self, a: GroupElement) -> "GroupFunction":
        """x -> f(x + a)."""
        if a.group != self.group:
            raise ValueError("translation by an element of a different group")
        row = _add_table(self.group)[self.group.index_of(a.coords)]
        ph = None
        if self.phases is not None:
            ph = [self.phases[i] for i in row]
        return GroupFunction(self.group, self.values[row], ph)

    def to_json(self) -> dict:
        out = {"group": list(self.group.orders)}
        if self.phases is not None:
            out["phases"] = [[p.numerator, p.denominator] for p in self.phases]
        else:
            out["values"] = [[float(v.real), float(v.imag)] for v in self.values]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GroupFunction":
        G = FinAbGroup(tuple(data["group"]))
        if "phases" in data:
            return cls.from_phases(G, [Fraction(n, d) for n, d in data["phases"]])
        return cls(G, [complex(re, im) for re, im in data["values"]])


# ---------------------------------------------------------------------------
# Gowers norms


def _power_norm(vals: np.ndarray, order: int, add: np.ndarray) -> float:
    """||vals||_{U^order}^{2^order} by the multiplicative-derivative recursion."""
    if order == 1:
        return abs(complex(vals.mean())) ** 2
    if order == 2:
        corr = (vals[add] * np.conj(vals)[None, :]).mean(axis=1)
        return float(np.mean(np.abs(corr) ** 2))
    cv = np.conj(vals)
    return float(
        np.mean([_power_norm(vals[row] * cv, order - 1, add) for row in add])
    )


def gowers_norm(f: GroupFunction, order: int, *, cap: int = 2**30) -> float:
    """Gowers uniformity norm ||f||_{U^order} (order = k+1 >= 1)."""
    if order < 1:
        raise ValueError("the norm order must be at least 1")
    G = f.group
    if G.order ** (order + 1) > cap:
        raise CapExceeded(
            f"|G|^(order+1) = {G.order}^{order + 1} exceeds cap {cap}"
        )
    p = _power_norm(f.values, order, _add_table(G))
    return max(p, 0.0) ** (1.0 / 2**order)


@dataclass(frozen=True)
class ExactNorm:
    """Exact value of a Gowers-norm power: (sum_a counts[a] e(a/N)) / scale."""

    modulus: int
    counts: tuple[int, ...]
    scale: int
    order: int

    @property
    def power_value(self) -> float:
        re = math.fsum(
            c * math.cos(2 * math.pi * a / self.modulus)
            for a, c in enumerate(self.counts)
            if c
        )
        im = math.fsum(
            c * math.sin(2 * math.pi * a / self.modulus)
            for a, c in enumerate(self.counts)
            if c
        )
        if abs(im) > 1e-6 * max(1.0, abs(re)):
            raise PostconditionError("norm power has a nonreal exact value")
        return re / self.scale

    @property
    def value(self) -> float:
        return max(self.power_value, 0.0) ** (1.0 / 2**self.order)


def gowers_norm_exact(f: GroupFunction, order: int, *, cap: int = 2**24) -> ExactNorm:
    """U^order norm of an exact-phase function by integer phase counting.

    Enumerates all derivative directions, so the cost is |G|^(order+1);
    every intermediate quantity is an integer.
    """
    if f.phases is None:
        raise ValueError("exact norm needs exact phases")
    if order < 1:
        raise ValueError("the norm order must be at least 1")
    G = f.group
    if G.order ** (order + 1) > cap:
        raise CapExceeded(f"|G|^(order+1) exceeds cap {cap}")
    N = f.phase_denominator()
    P = f.phase_ints(N)
    add = _add_table(G)
    counts = np.zeros(N, dtype=np.int64)

    def rec(D: np.ndarray, k: int) -> None:
        if k == 0:
            counts_local = np.bincount(D, minlength=N)
            counts[: len(counts_local)] += counts_local
            return
        for row in add:
            rec((D[row] - D) % N, k - 1)

    rec(P, order)
    return ExactNorm(N, tuple(int(c) for c in counts), G.order ** (order + 1), order)


def correlation(f: GroupFunction, g: GroupFunction) -> complex:
    """E_x f(x) conj(g(x))."""
    if f.group != g.group:
        raise ValueError("functions on different groups")
    return complex((f.values * np.conj(g.values)).mean())


def fourier_coefficients(f: GroupFunction) -> np.ndarray:
    """f_hat(t) = E_x f(x) e(-sum t_j x_j / m_j), flattened in element order."""
    if f.group.ncoords == 0:
        return f.values.copy()
    tensor = f.values.reshape(f.group.orders)
    return np.fft.fftn(tensor).reshape(-1) / f.group.order


# ---------------------------------------------------------------------------
# phase polynomials and projected phases


def phase(P: PolyMap) -> GroupFunction:
    """e(P(x)/N) for a polynomial map into a cyclic group Z_N."""
    if P.codomain.ncoords != 1:
        raise ValueError("phase polynomials take values in a single cyclic group")
    if P.degree is None:
        raise ValueError("map is not polynomial of any degree")
    N = P.codomain.orders[0]
    return GroupFunction.from_phases(P.domain, [Fraction(row[0], N) for row in P.table])


@dataclass(frozen=True)
class ProjectedPhase:
    """phi_*tau(x) = E_{y in tau^{-1}(x)} e(phi(y)), with exact fiber data.

    ``fiber_counts[x][a]`` counts the y in the fiber over x with phase
    a/modulus; ``function`` is the induced table on the codomain of tau.
    ``torsion`` is (codomain torsion, domain torsion) and
    ``rank_preserving`` records rk(domain) = rk(codomain).
    """

    phi: PolyMap
    tau: Homomorphism
    function: GroupFunction
    fiber_counts: tuple[tuple[int, ...], ...]
    fiber_size: int
    modulus: int
    degree: int
    torsion: tuple[int, int]
    rank_preserving: bool


def project_phase(phi: PolyMap, tau: Homomorphism) -> ProjectedPhase:
    """Fiberwise exact average of e(phi) along a surjection tau."""
    if phi.codomain.ncoords != 1:
        raise ValueError("phase polynomials take values in a single cyclic group")
    if phi.domain != tau.domain:
        raise ValueError("phi and tau must share their domain")
    if not tau.is_surjective():
        raise ValueError("tau is not surjective")
    deg = phi.degree
    if deg is None:
        raise ValueError("phi is not polynomial of any degree")
    B, A = tau.domain, tau.codomain
    N = phi.codomain.orders[0]
    counts = [[0] * N for _ in range(A.order)]
    for y in B.elements():
        xi = A.index_of(tau(y).coords)
        counts[xi][phi.table[B.index_of(y.coords)][0]] += 1
    fiber = B.order // A.order
    if any(sum(c) != fiber for c in counts):
        raise PostconditionError("fibers of a surjective homomorphism have equal size")
    roots = np.exp(2j * np.pi * np.arange(N) / N)
    values = np.array([np.dot(c, roots) / fiber for c in counts])
    fn = GroupFunction(A, values)
    if not fn.is_one_bounded():
        raise PostconditionError("a fiber average of unimodular values exceeded 1")
    return ProjectedPhase(
        phi=phi,
        tau=tau,
        function=fn,
        fiber_counts=tuple(tuple(c) for c in counts),
        fiber_size=fiber,
        modulus=N,
        degree=deg,
        torsion=(A.torsion, B.torsion),
        rank_preserving=(A.rank == B.rank),
    )


@dataclass(frozen=True)
class ObstructionReport:
    correlation: float
    norm: float
    order: int
    margin: float


def obstruction_check(
    f: GroupFunction, pp: ProjectedPhase, *, order: int | None = None, tol: float = _TOL
) -> ObstructionReport:
    """Check |<f, phi_*tau>| <= ||f||_{U^{k+1}} for a degree-k projected phase.

    The bound holds because a projected phase polynomial has U^{k+1}-dual
    norm at most 1, so a violation can only mean a bug: it raises.
    """
    f.assert_one_bounded()
    if order is None:
        order = pp.degree + 1
    if order < pp.degree + 1:
        raise ValueError("norm order must be at least degree + 1")
    c = abs(correlation(f, pp.function))
    n = gowers_norm(f, order)
    if c > n + tol:
        raise PostconditionError(
            f"obstruction inequality violated: |corr| = {c} > U^{order} = {n}"
        )
    return ObstructionReport(c, n, order, n + tol - c)


@dataclass(frozen=True)
class ProjectedAverage:
    """The family e(phi o iota_u), u in ker(tau), averaging to phi_*tau."""

    members: tuple[GroupFunction, ...]
    member_degrees: tuple[int, ...]
    kernel_elements: tuple[GroupElement, ...]


def projected_as_average(pp: ProjectedPhase, iota: PolyMap) -> ProjectedAverage:
    """Expand a projected phase as an exact average of phase polynomials.

    iota must be a polynomial cross-section of tau; then iota_u = iota + u
    for u in ker(tau) enumerates every fiber exactly once, so
    E_u e(phi(iota_u(x))) = phi_*tau(x) holds exactly (checked as a
    multiset identity on every x), and each phi o iota_u is polynomial of
    degree at most deg(iota) * deg(phi) (certified).
    """
    tau = pp.tau
    B, A = tau.domain, tau.codomain
    if iota.domain != A or iota.codomain != B:
        raise ValueError("iota must map the codomain of tau into its domain")
    for x in A.elements():
        if tau(iota(x)) != x:
            raise ValueError("iota is not a cross-section of tau")
    deg_iota = iota.degree
    if deg_iota is None:
        raise ValueError("iota is not polynomial of any degree")
    ker = sorted(kernel(tau).elements)
    N = pp.modulus
    bound = deg_iota * pp.degree
    members = []
    degrees = []
    member_tables = []
    for u in ker:
        member = pp.phi.compose(iota.translate_output(u))
        d = member.degree
        if d is None or d > max(bound, 0):
            raise PostconditionError(
                f"member degree {d} exceeds deg(iota)*deg(phi) = {bound}"
            )
        member_tables.append(member.table)
        degrees.append(d)
        members.append(phase(member))
    # exact average identity: per x, the multiset of member phases equals the fiber
    for xi in range(A.order):
        counts = [0] * N
        for table in member_tables:
            counts[table[xi][0]] += 1
        if tuple(counts) != pp.fiber_counts[xi]:
            raise PostconditionError("kernel translates do not reproduce the fiber")
    return ProjectedAverage(tuple(members), tuple(degrees), tuple(ker))


# ---------------------------------------------------------------------------
# box and cut norms


def box_norm_4cycle(f: GroupFunction, split: int) -> float:
    """4-cycle norm on the product of the first ``split`` coordinates and the rest.

    ||f||^4 = E_{a1,a2,b1,b2} f(a1,b1) conj f(a2,b1) conj f(a1,b2) f(a2,b2),
    computed through the Gram matrix of the rows.
    """
    G = f.group
    if not 1 <= split <= G.ncoords - 1:
        raise ValueError("a 2-factor split needs 1 <= split <= ncoords - 1")
    na = math.prod(G.orders[:split])
    nb = math.prod(G.orders[split:])
    F = f.values.reshape(na, nb)
    gram = (F @ np.conj(F.T)) / nb
    val4 = float(np.mean(np.abs(gram) ** 2))
    return max(val4, 0.0) ** 0.25


@dataclass(frozen=True)
class CutNormResult:
    value: float
    witnesses: dict
    restarts: int
    sweeps: int


def cut_norm_lower(
    f: GroupFunction,
    d: int,
    *,
    restarts: int = 8,
    iters: int = 25,
    seed: int = 0,
) -> CutNormResult:
    """Certified lower bound for the (n, d)-cut norm, with witnesses.

    Alternating maximization: with all other witnesses fixed, the optimal
    u_B takes the unit phase of the conditional sum, so the objective
    |E_a f(a) prod_B conj u_B(a_B)| is nondecreasing along every sweep.
    Deterministic all-ones initialization plus ``restarts`` seeded random
    unimodular restarts; the best value and its witness family are
    returned.  The value never exceeds the true cut norm and every witness
    is exactly 1-bounded.
    """
    G = f.group
    n = G.ncoords
    if not 1 <= d <= n - 1:
        raise ValueError("need 1 <= d <= n-1")
    tensor = f.values.reshape(G.orders)
    blocks = list(combinations(range(n), d))
    rng = np.random.default_rng(seed)

    def expand(u, block):
        shape = [1] * n
        for i, ax in enumerate(block):
            shape[ax] = u.shape[i]
        return u.reshape(shape)

    def objective(ws):
        t = tensor
        for blk in blocks:
            t = t * np.conj(expand(ws[blk], blk))
        return abs(complex(t.mean()))

    best_val = -1.0
    best_ws = None
    for r in range(restarts + 1):
        ws = {}
        for blk in blocks:
            shape = tuple(G.orders[i] for i in blk)
            if r == 0:
                ws[blk] = np.ones(shape, dtype=np.complex128)
            else:
                ws[blk] = np.exp(2j * np.pi * rng.random(shape))
        prev = -1.0
        sweeps_done = 0
        for _ in range(iters):
            for blk in blocks:
                t = tensor
                for other in blocks:
                    if other != blk:
                        t = t * np.conj(expand(ws[other], other))
                axes = tuple(i for i in range(n) if i not in blk)
                s = t.sum(axis=axes) if axes else t
                mag = np.abs(s)
                new_u = np.where(mag > 1e-15, s / np.where(mag > 1e-15, mag, 1.0), ws[blk])
                ws[blk] = new_u
            val = objective(ws)
            sweeps_done += 1
            if val - prev < 1e-13:
                prev = val
                break
            prev = val
        if prev > best_val:
            best_val = prev
            best_ws = {blk: ws[blk].copy() for blk in blocks}
    return CutNormResult(best_val, best_ws, restarts, iters)
