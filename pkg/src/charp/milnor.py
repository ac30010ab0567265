"""Milnor k_2 symbols and the constructive symbol-length pipeline.

The dlog map sends a formal sum of symbols {a, b} to a logarithmic 2-form.
Conversely, a member of nu(2) over a field of p-rank 2 or 3 is rewritten as
a sum of at most one resp. three logarithmic symbols by three reduction
steps, each of which trades the lexicographically largest remaining wedge
coordinate for one genuine symbol.

Every solver here is linear for p = 2, so the pipeline cannot fail on
inputs that pass the nu(2) membership test; for p in {3, 5, 7} the
super-zero search may give up, which surfaces as SolveFailed naming the
subproblem.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BudgetExhausted,
    DegenerateExtension,
    DimensionMismatch,
    HypothesisFails,
    NotInNu2,
    RankMismatch,
    SolveFailed,
    ZeroElement,
)
from .fields import FieldDesc, MultiPoly, RatFunc
from .pbasis import TowerDesc, p_independent, pth_root
from .forms import DiffForm, dlog, dlog_solve, gamma, is_boundary, wedge


def _zero(fdesc):
    return RatFunc(MultiPoly.zero(fdesc.p, fdesc.nvars))


def _one(fdesc):
    return RatFunc.from_int(fdesc.p, fdesc.nvars, 1)


class StepBudget:
    """Coarse cancellation token for long-running decompositions."""

    __slots__ = ("limit", "used")

    def __init__(self, limit=None):
        self.limit = limit
        self.used = 0

    def spend(self, units=1):
        self.used += units
        if self.limit is not None and self.used > self.limit:
            raise BudgetExhausted(f"step budget of {self.limit} exhausted")


# -- Milnor elements ------------------------------------------------------------


class MilnorElem:
    """Formal sum of symbols {a, b} with multiplicities mod p."""

    __slots__ = ("field", "symbols")

    def __init__(self, fdesc, symbols=()):
        self.field = fdesc
        p = fdesc.p
        clean = []
        for entry in symbols:
            a, b, mult = entry
            if a.is_zero() or b.is_zero():
                raise ZeroElement("symbol entries must be nonzero")
            mult %= p
            if mult:
                clean.append((a, b, mult))
        self.symbols = tuple(clean)

    @classmethod
    def symbol(cls, a, b, mult=1):
        fdesc = FieldDesc(a.p, a.nvars)
        return cls(fdesc, [(a, b, mult)])

    @classmethod
    def zero(cls, fdesc):
        return cls(fdesc, [])

    def __add__(self, other):
        if self.field != other.field:
            raise DimensionMismatch("symbols live over different fields")
        return MilnorElem(self.field, self.symbols + other.symbols)

    def __neg__(self):
        p = self.field.p
        return MilnorElem(self.field, [(a, b, p - m) for a, b, m in self.symbols])

    def is_zero_presentation(self):
        return not self.symbols

    def __eq__(self, other):
        if not isinstance(other, MilnorElem):
            return NotImplemented
        return self.field == other.field and self.symbols == other.symbols

    def __str__(self):
        if not self.symbols:
            return "0"
        parts = []
        for a, b, m in self.symbols:
            body = f"{{{a}, {b}}}"
            parts.append(body if m == 1 else f"{m}*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MilnorElem({self})"


def dlog_map(m, tower=None):
    """The map {x, y} -> dlog(x) ^ dlog(y) into 2-forms."""
    if tower is None:
        tower = TowerDesc.full_coordinates(m.field)
    total = DiffForm.zero(tower, 2)
    for a, b, mult in m.symbols:
        total = total + wedge(dlog(a, tower), dlog(b, tower)).scale(mult)
    return total


# -- the super-zero solver ---------------------------------------------------------


@dataclass
class LinearFunctional:
    """A base-field-linear map on E = k0(b), stored by its values on powers
    of the generator.  k0 is the base field of ``tower``; the generator is
    ``tower.pbasis.elems[gen]``."""

    tower: TowerDesc
    gen: int
    values: tuple

    def __post_init__(self):
        if self.gen in self.tower.adjoined:
            raise DegenerateExtension("generator already lies in the base field")
        if len(self.values) != self.tower.field.p:
            raise DimensionMismatch("need one value per generator power")

    @property
    def generator(self):
        return self.tower.pbasis.elems[self.gen]

    def coefficients_of(self, u):
        """Write u = sum u_m b^m with base-field coefficients."""
        comps = self.tower.components(u)
        gen_pos = self.tower.free.index(self.gen)
        out = [None] * self.tower.field.p
        for nu, f in comps.items():
            if any(e for i, e in enumerate(nu) if i != gen_pos):
                raise DegenerateExtension("element does not lie in E = k0(b)")
            out[nu[gen_pos]] = f
        zero = _zero(self.tower.field)
        return [zero if v is None else v for v in out]

    def __call__(self, u):
        coeffs = self.coefficients_of(u)
        total = _zero(self.tower.field)
        for c, v in zip(coeffs, self.values):
            if not c.is_zero() and not v.is_zero():
                total = total + c * v
        return total

    def is_zero_map(self):
        return all(v.is_zero() for v in self.values)


def super_zero(g):
    """An element c of E* with g(c^i) = 0 for 1 <= i <= p-1, and c outside
    the base field whenever g(1) != 0.

    For p = 2 this is one linear condition on a 2-dimensional space and a
    solution always exists.  For larger p the conditions beyond i = 1 are
    polynomial; a small structured candidate set is tried and None is
    returned when none survives."""
    fdesc = g.tower.field
    p = fdesc.p
    one = _one(fdesc)
    if g.is_zero_map():
        return one
    b = g.generator
    c = g.values[1] * one - g.values[0] * b
    if p == 2:
        # c is nonzero here: values are not all zero
        return c
    candidates = []
    if not c.is_zero():
        candidates.append(c)
    for t in range(2, p):
        if not g.values[t].is_zero() or not g.values[0].is_zero():
            candidates.append(g.values[t] * one - g.values[0] * b ** t)
    if g.values[0].is_zero():
        candidates.append(one)
        candidates.append(b)
    g1_nonzero = not g.values[0].is_zero()
    for cand in candidates:
        if cand.is_zero():
            continue
        try:
            ok = all(g(cand ** i).is_zero() for i in range(1, p))
        except DegenerateExtension:
            continue
        if not ok:
            continue
        if g1_nonzero:
            coeffs = g.coefficients_of(cand)
            if all(coeffs[i].is_zero() for i in range(1, p)):
                continue
        return cand
    return None


# -- lemma-level solvers ---------------------------------------------------------


def lemma_decomp_split(a, tower, b1_index, hypothesis_wedge):
    """Split a = e0 + e1 with e0 in the base field and e1 free of pure
    b1-powers, given that b1^i * a * hypothesis_wedge is a boundary for
    1 <= i <= p-1.

    The wedge is a form over any tower of the same field; the split itself
    is relative to ``tower`` with ``b1_index`` playing the lemma's b_1."""
    fdesc = tower.field
    p = fdesc.p
    b1 = tower.pbasis.elems[b1_index]
    for i in range(1, p):
        probe = hypothesis_wedge.scale(b1 ** i * a)
        ok, _ = is_boundary(probe)
        if not ok:
            raise HypothesisFails(f"b1^{i} * a * w is not a boundary")
    if b1_index in tower.adjoined:
        raise DimensionMismatch("b1 must be a free direction of the tower")
    pos = tower.free.index(b1_index)
    e0 = _zero(fdesc)
    e1 = _zero(fdesc)
    bpow = {}
    for nu, f in tower.components(a).items():
        if not any(nu):
            e0 = e0 + f
            continue
        if nu[pos] and not any(e for i, e in enumerate(nu) if i != pos):
            raise SolveFailed("pure b1-power component survived the hypothesis")
        piece = f
        for q, idx in enumerate(tower.free):
            if nu[q]:
                key = (idx, nu[q])
                if key not in bpow:
                    bpow[key] = tower.pbasis.elems[idx] ** nu[q]
                piece = piece * bpow[key]
        e1 = e1 + piece
    if e0 + e1 != a:
        raise SolveFailed("decomposition did not reconstruct the input")
    return e0, e1


def lemma_symbol_solve(a, tower, b1_index, b2_index, budget=None):
    """Produce y outside k0(b1) with a * dlog b1 ^ dlog b2 = dlog b1 ^ dlog y
    relative to the tower, via a constructive logarithm in the b2 direction."""
    fdesc = tower.field
    p = fdesc.p
    if budget is not None:
        budget.spend()
    defect = a.pth_power() - a
    probe = DiffForm(tower, 2, {tuple(sorted((b1_index, b2_index))): defect})
    ok, _ = is_boundary(probe)
    if not ok:
        raise HypothesisFails("(a^p - a) * dlog b1 ^ dlog b2 is not a boundary")
    rank1 = tower.adjoin(i for i in tower.free if i != b2_index)
    target = DiffForm(rank1, 1, {(b2_index,): a})
    y = dlog_solve(target, rank1)
    if y is None:
        raise SolveFailed("constructive logarithm has no solution (p > 2 input)")
    # y must involve b2: otherwise the wedge below would vanish
    comps = rank1.components(y)
    if all(not any(nu) for nu in comps):
        raise SolveFailed("logarithm solution degenerated into the base field")
    check = wedge(dlog(tower.pbasis.elems[b1_index], tower), dlog(y, tower))
    want = DiffForm(tower, 2, {tuple(sorted((b1_index, b2_index))): a if b1_index < b2_index else -a})
    if check != want:
        raise SolveFailed("logarithm verification failed")
    return y


def _zc_functional(a, zc_tower, base_tower, gen):
    """Projection functional g(t) = zero component of t*a, for t in the
    powers of the generator; values land in the base field of base_tower."""
    fdesc = zc_tower.field
    p = fdesc.p
    b = zc_tower.pbasis.elems[gen]
    values = []
    for t in range(p):
        v = zc_tower.zero_coefficient(b ** t * a)
        values.append(v)
    return LinearFunctional(base_tower, gen, tuple(values))


def _check_nu_relative(w):
    """(gamma - 1)(w) must be a boundary over w's own tower."""
    defect = gamma(w) - w
    ok, _ = is_boundary(defect)
    return ok


def _residual_coefficients(w, symbol_form, allowed):
    residual = w - symbol_form
    extra = set(residual.terms) - set(allowed)
    if extra:
        raise SolveFailed(f"residual has unexpected wedge coordinates {sorted(extra)}")
    return residual


def lemma_one_step(w, budget=None):
    """Single-coordinate step: w = a * dlog b_i ^ dlog b_j in nu(2) over a
    rank-2 tower becomes one symbol dlog z1 ^ dlog z2 with z1 in F(b_i) - F
    and z2 in F(b_i, b_j) - F(b_i)."""
    tower = w.tower
    if tower.rank != 2:
        raise RankMismatch("lemma-one needs relative p-rank 2")
    if len(w.terms) != 1:
        raise DimensionMismatch("lemma-one input must be a single wedge term")
    if budget is not None:
        budget.spend()
    (i, j), a = next(iter(w.terms.items()))
    if not _check_nu_relative(w):
        raise NotInNu2("input fails the nu(2) membership test")
    if tower.zero_coefficient(a) != a.pth_power():
        raise NotInNu2("zero component of the coefficient is not its p-th power")
    base_tower = TowerDesc(tower.pbasis, frozenset())
    g = _zc_functional(a, tower, base_tower, i)
    for v in g.values:
        if pth_root(v) is None:
            raise SolveFailed("projection functional left the base field")
    z1 = super_zero(g)
    if z1 is None:
        raise SolveFailed("super-zero search failed (p > 2 input)")
    dz1 = dlog(z1, tower)
    if set(dz1.terms) != {(i,)}:
        raise SolveFailed("z1 does not generate the b_i direction")
    u = dz1.coefficient((i,))
    a2 = a / u
    ntower = TowerDesc(tower.pbasis.replace(i, z1), tower.adjoined)
    context = DiffForm(tower, 2, {(i, j): u})
    lemma_decomp_split(a2, ntower, i, context)
    z2 = lemma_symbol_solve(a2, ntower, i, j, budget=budget)
    if wedge(dlog(z1, tower), dlog(z2, tower)) != w:
        raise SolveFailed("symbol recomposition mismatch")
    return z1, z2


def lemma_two_step(w, budget=None):
    """Two-coordinate step over a rank-3 tower: w = a1 w_(i,j) + a2 w_(i,l)
    with a2 != 0 becomes a1' w_(i,j) + dlog z1 ^ dlog z2."""
    tower = w.tower
    if tower.rank != 3:
        raise RankMismatch("lemma-two needs relative p-rank 3")
    if budget is not None:
        budget.spend()
    i, j, l = tower.free
    allowed = {(i, j), (i, l)}
    if not set(w.terms) <= allowed:
        raise DimensionMismatch("lemma-two input must use coordinates (i,j) and (i,l)")
    a2 = w.coefficient((i, l))
    if a2.is_zero():
        raise DimensionMismatch("lemma-two requires a nonzero (i,l) coefficient")
    if not _check_nu_relative(w):
        raise NotInNu2("input fails the nu(2) membership test")
    if tower.zero_coefficient(a2) != a2.pth_power():
        raise NotInNu2("zero component of a2 is not its p-th power")
    g = _zc_functional(a2, tower, tower, i)
    z1 = super_zero(g)
    if z1 is None:
        raise SolveFailed("super-zero search failed (p > 2 input)")
    dz1 = dlog(z1, tower)
    if set(dz1.terms) != {(i,)}:
        raise SolveFailed("z1 does not generate the b_i direction")
    u = dz1.coefficient((i,))
    a2p = a2 / u
    ntower = TowerDesc(tower.pbasis.replace(i, z1), tower.adjoined)
    context = DiffForm(tower, 3, {(i, j, l): u})
    lemma_decomp_split(a2p, ntower, i, context)
    z2 = lemma_symbol_solve(a2p, ntower, i, l, budget=budget)
    symbol_form = wedge(dlog(z1, tower), dlog(z2, tower))
    residual = _residual_coefficients(w, symbol_form, {(i, j)})
    return residual.coefficient((i, j)), z1, z2


def lemma_three_step(w, budget=None):
    """Three-coordinate step over a rank-3 tower: w with a3 != 0 in front of
    w_(j,l) becomes a1' w_(i,j) + a2' w_(i,l) + dlog z1 ^ dlog z2."""
    tower = w.tower
    if tower.rank != 3:
        raise RankMismatch("lemma-three needs relative p-rank 3")
    if budget is not None:
        budget.spend()
    i, j, l = tower.free
    a3 = w.coefficient((j, l))
    if a3.is_zero():
        raise DimensionMismatch("lemma-three requires a nonzero (j,l) coefficient")
    if not _check_nu_relative(w):
        raise NotInNu2("input fails the nu(2) membership test")
    rel = tower.adjoin({i})
    if rel.zero_coefficient(a3) != a3.pth_power():
        raise NotInNu2("relative zero component of a3 is not its p-th power")
    g = _zc_functional(a3, rel, rel, j)
    z1 = super_zero(g)
    if z1 is None:
        raise SolveFailed("super-zero search failed (p > 2 input)")
    dz1_rel = dlog(z1, rel)
    if set(dz1_rel.terms) != {(j,)}:
        raise SolveFailed("z1 does not generate the b_j direction relative to k0")
    u = dz1_rel.coefficient((j,))
    a3p = a3 / u
    ntower_rel = TowerDesc(rel.pbasis.replace(j, z1), rel.adjoined)
    context = DiffForm(rel, 2, {(j, l): u})
    lemma_decomp_split(a3p, ntower_rel, j, context)
    z2 = lemma_symbol_solve(a3p, ntower_rel, j, l, budget=budget)
    symbol_form = wedge(dlog(z1, tower), dlog(z2, tower))
    residual = _residual_coefficients(w, symbol_form, {(i, j), (i, l)})
    return residual.coefficient((i, j)), residual.coefficient((i, l)), z1, z2


# -- decompositions -------------------------------------------------------------


@dataclass(frozen=True)
class SymbolPair:
    """A symbol slot; a designated zero pair keeps one element for the
    p-basis certificate and contributes no form."""

    left: object
    right: object

    @property
    def is_zero_pair(self):
        return self.left is None or self.right is None

    @property
    def kept(self):
        return self.left if self.right is None else (self.right if self.left is None else None)

    def form(self, tower):
        if self.is_zero_pair:
            return DiffForm.zero(tower, 2)
        return wedge(dlog(self.left, tower), dlog(self.right, tower))

    def __str__(self):
        if self.is_zero_pair:
            kept = self.kept
            if self.left is None:
                return f"(0, {kept})"
            return f"({kept}, 0)"
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class MembershipClaim:
    element: object
    inside: tuple
    outside: tuple
    verified: bool

    def describe(self, basis):
        inside = ", ".join(str(basis.elems[i]) for i in self.inside)
        if self.outside:
            outside = ", ".join(str(basis.elems[i]) for i in self.outside)
            return f"{self.element} in k^p({inside}) \\ k^p({outside})"
        return f"{self.element} in k^p({inside}) \\ k^p"


@dataclass
class SymbolDecomposition:
    """Output of the rank-3 pipeline: at most three symbols recomposing the
    input exactly, a p-basis certificate for the designated triple and the
    verified subfield membership claims."""

    tower: TowerDesc
    pairs: tuple
    pbasis_certificate: object
    certificate_form: object
    memberships: tuple

    def recompose(self):
        total = DiffForm.zero(self.tower, 2)
        for pair in self.pairs:
            total = total + pair.form(self.tower)
        return total

    def symbol_count(self):
        return sum(0 if pair.is_zero_pair else 1 for pair in self.pairs)

    def certificate_triple(self):
        x_pair, y_pair, z_pair = self.pairs
        return (x_pair.left, y_pair.right, z_pair.left)


def _membership(pbasis, elem, inside, outside):
    ok_in = pbasis.in_span(elem, inside)
    ok_out = not pbasis.in_span(elem, outside) if outside is not None else True
    if outside is None:
        comps = pbasis.components(elem)
        ok_out = any(any(mu) for mu in comps)
        outside = ()
    return MembershipClaim(elem, tuple(inside), tuple(outside), ok_in and ok_out)


def theorem_rep(w, budget=None):
    """Rank-3 symbol-length decomposition: any member of nu(2) is a sum of
    at most three logarithmic symbols, with {x1, y2, z1} a p-basis."""
    tower = w.tower
    if tower.rank != 3 or tower.adjoined:
        raise RankMismatch("rank-3 decomposition needs a full tower of p-rank 3")
    if w.terms and w.degree != 2:
        raise DimensionMismatch("input must be a 2-form")
    if budget is None:
        budget = StepBudget()
    if not _check_nu_relative(w):
        raise NotInNu2("input fails the nu(2) membership test")
    i, j, l = tower.free
    basis = tower.pbasis

    theta = w
    a3 = theta.coefficient((j, l))
    if not a3.is_zero():
        a1p, a2p, z1, z2 = lemma_three_step(theta, budget=budget)
        z_pair = SymbolPair(z1, z2)
    else:
        z_pair = SymbolPair(basis.elems[j], None)
    theta = theta - z_pair.form(tower)

    a2p = theta.coefficient((i, l))
    if not a2p.is_zero():
        a1pp, y1, y2 = lemma_two_step(theta, budget=budget)
        y_pair = SymbolPair(y1, y2)
    else:
        y_pair = SymbolPair(None, basis.elems[l])
    theta = theta - y_pair.form(tower)

    a1pp = theta.coefficient((i, j))
    if not a1pp.is_zero():
        from .forms import relative_project

        sub = tower.adjoin({l})
        x1, x2 = lemma_one_step(relative_project(theta, sub), budget=budget)
        x_pair = SymbolPair(x1, x2)
    else:
        x_pair = SymbolPair(basis.elems[i], None)
    theta = theta - x_pair.form(tower)

    if not theta.is_zero():
        raise SolveFailed("pipeline left a nonzero residual")

    pairs = (x_pair, y_pair, z_pair)
    triple = (x_pair.left, y_pair.right, z_pair.left)
    ok, cert_form = p_independent(list(triple), tower)
    if not ok:
        raise SolveFailed("certificate triple is not p-independent")
    from .pbasis import PBasis

    cert_basis = PBasis(tower.field, triple) if len(triple) == tower.field.nvars else None

    memberships = []
    if not x_pair.is_zero_pair:
        memberships.append(_membership(basis, x_pair.left, (i,), None))
        memberships.append(_membership(basis, x_pair.right, (i, j), (i,)))
    if not y_pair.is_zero_pair:
        memberships.append(_membership(basis, y_pair.left, (i,), None))
        memberships.append(_membership(basis, y_pair.right, (i, j, l), (i, j)))
    if not z_pair.is_zero_pair:
        memberships.append(_membership(basis, z_pair.left, (i, j), (i,)))
        memberships.append(_membership(basis, z_pair.right, (i, j, l), (i, j)))
    if any(not m.verified for m in memberships):
        raise SolveFailed("a membership certificate failed to verify")

    result = SymbolDecomposition(
        tower=tower,
        pairs=pairs,
        pbasis_certificate=cert_basis,
        certificate_form=cert_form,
        memberships=tuple(memberships),
    )
    if result.recompose() != w:
        raise SolveFailed("decomposition does not recompose to the input")
    return result


@dataclass
class Rank2Decomposition:
    z1: object
    z2: object
    pbasis_certificate: object
    certificate_form: object

    def pair(self):
        return SymbolPair(self.z1, self.z2)


def decompose_rank2(w, budget=None):
    """Rank-2 decomposition: a nonzero member of nu(2) is a single symbol
    dlog z1 ^ dlog z2 with {z1, z2} a p-basis.  Returns None for w = 0."""
    tower = w.tower
    if tower.rank != 2 or tower.adjoined:
        raise RankMismatch("rank-2 decomposition needs a full tower of p-rank 2")
    if budget is None:
        budget = StepBudget()
    if not _check_nu_relative(w):
        raise NotInNu2("input fails the nu(2) membership test")
    if w.is_zero():
        return None
    z1, z2 = lemma_one_step(w, budget=budget)
    ok, cert_form = p_independent([z1, z2], tower)
    if not ok:
        raise SolveFailed("output pair is not a p-basis")
    from .pbasis import PBasis

    cert_basis = PBasis(tower.field, (z1, z2))
    return Rank2Decomposition(z1, z2, cert_basis, cert_form)
