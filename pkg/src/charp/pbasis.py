"""p-bases, p-independence and Frobenius monomial decompositions.

Every element of k = F_p(x1..xn) decomposes uniquely as a sum
c = sum_mu c_mu^p b^mu over a p-basis {b_1..b_n}, with mu ranging over
exponent vectors with entries 0..p-1.  The coordinate basis admits a direct
decomposition; a basis differing from the coordinates in one slot reduces to
a p x p linear solve in that direction; a fully general basis needs one
p^n x p^n solve over k.

Towers (a p-basis together with a subset adjoined to the base field) carry
the relative decompositions used by the differential-form machinery.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from .errors import (
    DimensionMismatch,
    NotIndependent,
    RankMismatch,
    ZeroElement,
)
from .fields import FieldDesc, MultiPoly, RatFunc, linsolve


def _zero(fdesc):
    return RatFunc(MultiPoly.zero(fdesc.p, fdesc.nvars))


def _all_mu(p, n):
    return list(itertools.product(range(p), repeat=n))


def coordinate_components(c):
    """Decomposition of c over the coordinate p-basis: {mu: c_mu} with
    c = sum c_mu^p x^mu.  Zero components are omitted."""
    p = c.p
    nvars = c.nvars
    if c.is_zero():
        return {}
    num = c.num * c.den ** (p - 1)
    den = c.den
    groups = {}
    for e, coeff in num.terms.items():
        mu = tuple(v % p for v in e)
        root = tuple(v // p for v in e)
        groups.setdefault(mu, {})[root] = coeff
    out = {}
    for mu, terms in groups.items():
        poly = MultiPoly(p, nvars, terms, _checked=True)
        out[mu] = RatFunc(poly, den)
    return out


def split_in_variable(c, var):
    """Write c = sum_j f_j x_var^j with f_j in k^p(x_i : i != var).

    Returns {j: f_j} for 0 <= j < p, zero entries omitted."""
    p = c.p
    if c.is_zero():
        return {}
    num = c.num * c.den ** (p - 1)
    den_p = c.den.frobenius()
    groups = {}
    for e, coeff in num.terms.items():
        j = e[var] % p
        ne = e[:var] + (e[var] - j,) + e[var + 1:]
        groups.setdefault(j, {})[ne] = coeff
    out = {}
    for j, terms in groups.items():
        poly = MultiPoly(p, c.nvars, terms, _checked=True)
        out[j] = RatFunc(poly, den_p)
    return out


def pth_root(c):
    """The p-th root of c when it exists in the same field, else None."""
    if c.is_zero():
        return c
    rn = c.num.frobenius_root()
    rd = c.den.frobenius_root()
    if rn is not None and rd is not None:
        return RatFunc(rn, rd)
    comps = coordinate_components(c)
    zero_mu = (0,) * c.nvars
    if set(comps) <= {zero_mu}:
        return comps.get(zero_mu, _zero(FieldDesc(c.p, c.nvars)))
    return None


class PBasis:
    """An ordered p-independent family, usually a full p-basis of k over k^p."""

    __slots__ = ("field", "elems", "_replaced", "_dual_rows", "_cert")

    def __init__(self, fdesc, elems, _certify=True):
        self.field = fdesc
        elems = tuple(elems)
        for e in elems:
            if e.is_zero():
                raise ZeroElement("p-basis elements must be nonzero")
            if e.p != fdesc.p or e.nvars != fdesc.nvars:
                raise DimensionMismatch("basis element lives in a different field")
        self.elems = elems
        self._replaced = None
        self._dual_rows = None
        self._cert = None
        if _certify and len(elems) == fdesc.nvars:
            if not self.is_full_basis():
                raise NotIndependent("elements are not p-independent")

    def __len__(self):
        return len(self.elems)

    def __eq__(self, other):
        return isinstance(other, PBasis) and self.field == other.field and self.elems == other.elems

    def __hash__(self):
        return hash((self.field, self.elems))

    def __repr__(self):
        return f"PBasis({', '.join(str(e) for e in self.elems)})"

    def replaced_slots(self):
        """Indices where the basis differs from the coordinate basis."""
        if self._replaced is None:
            gens = self.field.gens()
            self._replaced = tuple(
                i for i, e in enumerate(self.elems) if i >= len(gens) or e != gens[i]
            )
        return self._replaced

    def is_coordinate(self):
        return len(self.elems) == self.field.nvars and not self.replaced_slots()

    def replace(self, index, elem):
        elems = list(self.elems)
        elems[index] = elem
        return PBasis(self.field, elems)

    # -- dlog expansion ----------------------------------------------------

    def gradient_rows(self):
        """Row l = coefficients of dlog(b_l) over the coordinate dlog basis."""
        if self._dual_rows is None:
            gens = self.field.gens()
            rows = []
            for b in self.elems:
                rows.append(tuple(gens[j] * b.derivative(j) / b for j in range(self.field.nvars)))
            self._dual_rows = rows
        return self._dual_rows

    def dlog_coordinates(self, f):
        """Coefficients of df/f in the basis dlog(b_1)..dlog(b_n).

        For the coordinate basis this is the logarithmic gradient; a basis
        with replaced slots triggers an n x n solve (closed form when only
        one slot differs)."""
        if f.is_zero():
            raise ZeroElement("dlog of zero")
        fdesc = self.field
        gens = fdesc.gens()
        grad = [gens[j] * f.derivative(j) / f for j in range(fdesc.nvars)]
        replaced = self.replaced_slots()
        if not replaced:
            return grad
        rows = self.gradient_rows()
        if len(replaced) == 1:
            l = replaced[0]
            mll = rows[l][l]
            if mll.is_zero():
                raise NotIndependent("replaced basis element is degenerate in its own slot")
            c_l = grad[l] / mll
            out = []
            for j in range(fdesc.nvars):
                if j == l:
                    out.append(c_l)
                else:
                    out.append(grad[j] - c_l * rows[l][j])
            return out
        matrix = [[rows[l][j] for l in range(len(rows))] for j in range(fdesc.nvars)]
        sol, _ = linsolve(matrix, grad)
        if sol is None:
            raise NotIndependent("dlog expansion failed; basis is p-dependent")
        return sol

    def is_full_basis(self):
        from .forms import dlog, wedge

        if len(self.elems) != self.field.nvars:
            return False
        if not self.replaced_slots():
            return True
        tower = TowerDesc.full_coordinates(self.field)
        form = None
        for b in self.elems:
            w = dlog(b, tower)
            form = w if form is None else wedge(form, w)
            if form.is_zero():
                return False
        return not form.is_zero()

    def certificate(self):
        """The n-form dlog b_1 ^ .. ^ dlog b_n over the coordinate tower."""
        if self._cert is None:
            from .forms import dlog, wedge

            tower = TowerDesc.full_coordinates(self.field)
            form = None
            for b in self.elems:
                w = dlog(b, tower)
                form = w if form is None else wedge(form, w)
            self._cert = form
        return self._cert

    # -- decompositions -------------------------------------------------------

    def components(self, c):
        """Full decomposition {mu: c_mu} with c = sum c_mu^p b^mu."""
        replaced = self.replaced_slots()
        if len(self.elems) != self.field.nvars:
            raise RankMismatch("decomposition needs a full p-basis")
        if not replaced:
            return coordinate_components(c)
        if len(replaced) == 1:
            return self._components_one_replaced(c, replaced[0])
        return self._components_general(c)

    def _components_one_replaced(self, c, l):
        p = self.field.p
        z = self.elems[l]
        if c.is_zero():
            return {}
        g = split_in_variable(c, l)
        zero = _zero(self.field)
        zsplit = split_in_variable(z, l)
        if set(zsplit) <= {0, 1} and 1 in zsplit:
            # z = alpha + beta*x_l: substitute x_l = (z - alpha)/beta directly
            alpha = zsplit.get(0, zero)
            beta = zsplit[1]
            beta_inv = beta.inverse()
            sol = [zero] * p
            for j, gj in g.items():
                # x_l^j = (beta^-1 z - beta^-1 alpha)^j expanded binomially
                for i in range(j + 1):
                    factor = comb(j, i) % p
                    if not factor:
                        continue
                    term = gj * (beta_inv ** j) * ((-alpha) ** (j - i)) * factor
                    sol[i] = sol[i] + term
        else:
            zmat = [split_in_variable(z ** i, l) for i in range(p)]
            matrix = [[zmat[i].get(j, zero) for i in range(p)] for j in range(p)]
            rhs = [g.get(j, zero) for j in range(p)]
            sol, _ = linsolve(matrix, rhs)
            if sol is None:
                raise NotIndependent("basis element is p-dependent on the coordinates")
        out = {}
        for i, f_i in enumerate(sol):
            if f_i.is_zero():
                continue
            for nu, root in coordinate_components(f_i).items():
                if nu[l] != 0:
                    raise NotIndependent("solve left residue in the replaced direction")
                mu = nu[:l] + (i,) + nu[l + 1:]
                out[mu] = root
        return out

    def _components_general(self, c):
        # one p^n x p^n solve over k: coordinate-decompose every b^mu, then
        # match coordinate components (valid since sums of p-th powers are
        # p-th powers of sums in characteristic p)
        p = self.field.p
        n = self.field.nvars
        mus = _all_mu(p, n)
        zero = _zero(self.field)
        bmat = {}
        for mu in mus:
            bmu = self.field.one()
            for i, e in enumerate(mu):
                if e:
                    bmu = bmu * self.elems[i] ** e
            bmat[mu] = coordinate_components(bmu)
        target = coordinate_components(c)
        nus = sorted(set().union(*bmat.values(), target))
        matrix = [[bmat[mu].get(nu, zero) for mu in mus] for nu in nus]
        rhs = [target.get(nu, zero) for nu in nus]
        sol, _ = linsolve(matrix, rhs)
        if sol is None:
            raise NotIndependent("elements do not form a p-basis")
        return {mu: v for mu, v in zip(mus, sol) if not v.is_zero()}

    # -- memberships ------------------------------------------------------------

    def support(self, c):
        return frozenset(self.components(c))

    def in_span(self, c, indices):
        """True when c lies in k^p(b_i : i in indices)."""
        allowed = set(indices)
        return all(
            all(mu[i] == 0 for i in range(len(mu)) if i not in allowed)
            for mu in self.components(c)
        )


@dataclass(frozen=True)
class TowerDesc:
    """A full p-basis together with the subset adjoined to the base field.

    The base is F = k^p(b_i : i in adjoined); the relative p-rank is the
    number of free indices."""

    pbasis: PBasis
    adjoined: frozenset = field(default_factory=frozenset)

    @classmethod
    def full_coordinates(cls, fdesc):
        return cls(coordinate_pbasis(fdesc), frozenset())

    @classmethod
    def coordinates_over(cls, fdesc, adjoined):
        return cls(coordinate_pbasis(fdesc), frozenset(adjoined))

    @property
    def field(self):
        return self.pbasis.field

    @property
    def free(self):
        return tuple(i for i in range(len(self.pbasis)) if i not in self.adjoined)

    @property
    def rank(self):
        return len(self.free)

    def adjoin(self, extra):
        return TowerDesc(self.pbasis, self.adjoined | frozenset(extra))

    def same_module(self, other):
        return self.pbasis == other.pbasis and self.adjoined == other.adjoined

    def components(self, c):
        """Relative decomposition {nu: f_nu} over the free indices, with
        f_nu in the base field F, so that c = sum f_nu b^nu."""
        full = self.pbasis.components(c)
        free = self.free
        out = {}
        for mu, root in full.items():
            nu = tuple(mu[i] for i in free)
            piece = root.pth_power()
            for i in self.adjoined:
                if mu[i]:
                    piece = piece * self.pbasis.elems[i] ** mu[i]
            if nu in out:
                out[nu] = out[nu] + piece
            else:
                out[nu] = piece
        return {nu: v for nu, v in out.items() if not v.is_zero()}

    def zero_coefficient(self, c):
        """The component of c lying in the base field F."""
        free = self.free
        total = None
        for mu, root in self.pbasis.components(c).items():
            if any(mu[i] for i in free):
                continue
            piece = root.pth_power()
            for i in self.adjoined:
                if mu[i]:
                    piece = piece * self.pbasis.elems[i] ** mu[i]
            total = piece if total is None else total + piece
        return total if total is not None else _zero(self.field)

    def in_base(self, c):
        return all(not any(mu[i] for i in self.free) for mu in self.pbasis.components(c))

    def describe(self):
        if not self.adjoined:
            return "k^p"
        names = ", ".join(str(self.pbasis.elems[i]) for i in sorted(self.adjoined))
        return f"k^p({names})"


def coordinate_pbasis(fdesc):
    return PBasis(fdesc, fdesc.gens(), _certify=False)


@dataclass
class MonomialDecomp:
    """Result of monomial_decompose.

    For a full PBasis the components are the p-th roots c_mu, reconstructing
    as sum c_mu^p b^mu.  For a TowerDesc they are the base-field coefficients
    f_nu over the free indices, reconstructing as sum f_nu b^nu.
    """

    basis: object
    components: dict
    pth_power_coeffs: bool

    def reconstruct(self):
        if isinstance(self.basis, TowerDesc):
            elems = self.basis.pbasis.elems
            indices = self.basis.free
        else:
            elems = self.basis.elems
            indices = range(len(elems))
        fdesc = self.basis.field if isinstance(self.basis, PBasis) else self.basis.pbasis.field
        total = _zero(fdesc)
        for mu, coeff in self.components.items():
            piece = coeff.pth_power() if self.pth_power_coeffs else coeff
            for pos, i in enumerate(indices):
                if mu[pos]:
                    piece = piece * elems[i] ** mu[pos]
            total = total + piece
        return total

    def support(self):
        return frozenset(self.components)


def monomial_decompose(c, basis):
    """The unique decomposition of c relative to a p-basis or tower."""
    if isinstance(basis, TowerDesc):
        return MonomialDecomp(basis, basis.components(c), pth_power_coeffs=False)
    return MonomialDecomp(basis, basis.components(c), pth_power_coeffs=True)


def p_independent(elems, tower):
    """Wedge criterion: dlog e_1 ^ .. ^ dlog e_r != 0 in the tower's module.

    Returns (verdict, certificate form)."""
    from .forms import DiffForm, dlog, wedge

    for e in elems:
        if e.is_zero():
            raise ZeroElement("zero element in p-independence test")
    if not elems:
        raise ZeroElement("empty family")
    form = None
    for e in elems:
        w = dlog(e, tower)
        form = w if form is None else wedge(form, w)
    return (not form.is_zero(), form)


def complete_pbasis(elems, fdesc=None):
    """Extend a p-independent family to a full p-basis by greedily appending
    coordinate variables in index order."""
    elems = list(elems)
    if not elems:
        raise ZeroElement("cannot complete an empty family")
    if fdesc is None:
        fdesc = FieldDesc(elems[0].p, elems[0].nvars)
    tower = TowerDesc.full_coordinates(fdesc)
    ok, cert = p_independent(elems, tower)
    if not ok:
        raise NotIndependent("input family is p-dependent")
    from .forms import dlog, wedge

    form = cert
    for i in range(fdesc.nvars):
        if len(elems) == fdesc.nvars:
            break
        candidate = wedge(form, dlog(fdesc.var(i), tower))
        if not candidate.is_zero():
            elems.append(fdesc.var(i))
            form = candidate
    if len(elems) != fdesc.nvars:
        raise NotIndependent("family cannot be completed to a p-basis")
    return PBasis(fdesc, elems)


def ppower_by_criterion(c, pb):
    """Lemma-style p-th power test on a p-rank-2 field: c is a p-th power
    iff neither {a, c} nor {b, c} is a p-basis, for a p-basis {a, b}."""
    fdesc = pb.field
    if fdesc.nvars != 2:
        raise RankMismatch("criterion requires a field of p-rank 2")
    if len(pb) != 2:
        raise RankMismatch("criterion requires a p-basis of two elements")
    if not pb.is_full_basis():
        raise NotIndependent("given pair is not a p-basis")
    if c.is_zero():
        return True
    tower = TowerDesc.full_coordinates(fdesc)
    a, b = pb.elems
    ind_a, _ = p_independent([a, c], tower)
    ind_b, _ = p_independent([b, c], tower)
    return not ind_a and not ind_b


def sab_test(c, a, b):
    """Membership of c in S_{a,b}: the residue classes avoiding both the
    p-th powers and the span sum_{i+j>0} a^i b^j kappa^p.

    Returns (verdict, support) where support is the decomposition support of
    c over a completion of {a, b} to a p-basis."""
    fdesc = FieldDesc(a.p, a.nvars)
    tower = TowerDesc.full_coordinates(fdesc)
    ok, _ = p_independent([a, b], tower)
    if not ok:
        raise NotIndependent("a and b must be p-independent")
    basis = complete_pbasis([a, b], fdesc)
    if c.is_zero():
        return False, frozenset()
    support = basis.support(c)
    zero_mu = (0,) * fdesc.nvars
    in_pth_powers = support <= {zero_mu}
    in_span = all(
        (mu[0] + mu[1] > 0) and not any(mu[2:]) for mu in support
    )
    return (not in_pth_powers) and (not in_span), support
