"""Relative differential forms with the Cartier operator and nu(q) tests.

A form lives over a tower: coefficients sit in front of the dlog basis
w_s = dlog b_{s(1)} ^ .. ^ dlog b_{s(q)} indexed by strictly increasing
tuples of free indices.  The monomial decomposition of the coefficients
induces the mu-grading; a cycle is a boundary exactly when its zero
component vanishes, and in that case a contracting homotopy produces an
antiderivative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    NotACycle,
    RankNotOne,
    RootFailure,
    TowerMismatch,
    ZeroElement,
)
from .fields import MultiPoly, RatFunc, linsolve
from .pbasis import TowerDesc, pth_root


def _zero_elem(fdesc):
    return RatFunc(MultiPoly.zero(fdesc.p, fdesc.nvars))


def _merge_sign(s, t):
    """Sign of sorting the concatenation of two increasing tuples, or None
    when they overlap."""
    if set(s) & set(t):
        return None, None
    inversions = 0
    for a in s:
        for b in t:
            if a > b:
                inversions += 1
    merged = tuple(sorted(s + t))
    return merged, -1 if inversions % 2 else 1


class DiffForm:
    """Sparse differential form of fixed degree over a tower."""

    __slots__ = ("tower", "degree", "terms")

    def __init__(self, tower, degree, terms=None, _checked=False):
        self.tower = tower
        self.degree = degree
        if terms is None:
            self.terms = {}
            return
        if _checked:
            self.terms = terms
            return
        free = set(tower.free)
        clean = {}
        for s, coeff in terms.items():
            s = tuple(s)
            if len(s) != degree:
                raise DimensionMismatch(f"index tuple {s} does not match degree {degree}")
            if any(a >= b for a, b in zip(s, s[1:])):
                raise DimensionMismatch(f"index tuple {s} is not strictly increasing")
            if not set(s) <= free:
                raise TowerMismatch(f"index tuple {s} uses adjoined directions")
            if coeff.is_zero():
                continue
            if s in clean:
                total = clean[s] + coeff
                if total.is_zero():
                    del clean[s]
                else:
                    clean[s] = total
            else:
                clean[s] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, tower, degree):
        return cls(tower, degree, {}, _checked=True)

    @classmethod
    def from_scalar(cls, tower, value):
        if value.is_zero():
            return cls.zero(tower, 0)
        return cls(tower, 0, {(): value}, _checked=True)

    # -- views -------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def coefficient(self, s):
        got = self.terms.get(tuple(s))
        if got is None:
            return _zero_elem(self.tower.field)
        return got

    def _compat(self, other):
        if not self.tower.same_module(other.tower):
            raise TowerMismatch("forms live over different towers")
        if self.degree != other.degree and self.terms and other.terms:
            raise DimensionMismatch("forms have different degrees")

    # -- linear structure ----------------------------------------------------

    def __add__(self, other):
        self._compat(other)
        degree = self.degree if self.terms or not other.terms else other.degree
        terms = dict(self.terms)
        for s, c in other.terms.items():
            if s in terms:
                total = terms[s] + c
                if total.is_zero():
                    del terms[s]
                else:
                    terms[s] = total
            else:
                terms[s] = c
        return DiffForm(self.tower, degree, terms, _checked=True)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return DiffForm(self.tower, self.degree, {s: -c for s, c in self.terms.items()}, _checked=True)

    def scale(self, factor):
        if isinstance(factor, int):
            factor = RatFunc.from_int(self.tower.field.p, self.tower.field.nvars, factor)
        if factor.is_zero():
            return DiffForm.zero(self.tower, self.degree)
        return DiffForm(
            self.tower, self.degree, {s: c * factor for s, c in self.terms.items()}, _checked=True
        )

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if not self.tower.same_module(other.tower):
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.degree, frozenset(self.terms.items())))

    def below(self, s):
        """Terms with index tuple lexicographically smaller than s."""
        s = tuple(s)
        kept = {t: c for t, c in self.terms.items() if t < s}
        return DiffForm(self.tower, self.degree, kept, _checked=True)

    def __str__(self):
        return format_form(self)

    def __repr__(self):
        return f"DiffForm({format_form(self)})"


def format_form(w):
    if w.is_zero():
        return "0"
    parts = []
    basis = w.tower.pbasis.elems
    for s in sorted(w.terms):
        coeff = w.terms[s]
        dl = " ^ ".join(f"dlog({basis[i]})" for i in s)
        if not s:
            parts.append(str(coeff))
        elif coeff.is_one():
            parts.append(dl)
        else:
            c = str(coeff)
            if "+" in c or "-" in c[1:]:
                c = f"({c})"
            parts.append(f"{c} * {dl}")
    return " + ".join(parts)


def wedge(w1, w2):
    """Graded-commutative exterior product."""
    if not w1.tower.same_module(w2.tower):
        raise TowerMismatch("forms live over different towers")
    degree = w1.degree + w2.degree
    if degree > w1.tower.rank:
        return DiffForm.zero(w1.tower, degree)
    out = {}
    for s, a in w1.terms.items():
        for t, b in w2.terms.items():
            merged, sign = _merge_sign(s, t)
            if merged is None:
                continue
            c = a * b
            if sign < 0:
                c = -c
            if merged in out:
                total = out[merged] + c
                if total.is_zero():
                    del out[merged]
                else:
                    out[merged] = total
            else:
                if not c.is_zero():
                    out[merged] = c
    return DiffForm(w1.tower, degree, out, _checked=True)


def dlog(f, tower):
    """The logarithmic differential df/f as a 1-form over the tower."""
    if f.is_zero():
        raise ZeroElement("dlog of zero")
    coords = tower.pbasis.dlog_coordinates(f)
    terms = {}
    for j in tower.free:
        if not coords[j].is_zero():
            terms[(j,)] = coords[j]
    return DiffForm(tower, 1, terms, _checked=True)


def _d_coordinates(a, tower):
    """Coefficients of d(a) in the tower's dlog basis (full vector)."""
    fdesc = tower.field
    if a.is_zero():
        return [_zero_elem(fdesc)] * fdesc.nvars
    coords = tower.pbasis.dlog_coordinates(a)
    return [c * a for c in coords]


def differential(w):
    """The exterior derivative; satisfies d(d(w)) = 0."""
    tower = w.tower
    out = {}
    free = tower.free
    for s, a in w.terms.items():
        coords = _d_coordinates(a, tower)
        s_set = set(s)
        for j in free:
            if j in s_set:
                continue
            c = coords[j]
            if c.is_zero():
                continue
            below = sum(1 for i in s if i < j)
            merged = tuple(sorted(s + (j,)))
            if below % 2:
                c = -c
            if merged in out:
                total = out[merged] + c
                if total.is_zero():
                    del out[merged]
                else:
                    out[merged] = total
            else:
                out[merged] = c
    return DiffForm(tower, w.degree + 1, out, _checked=True)


def relative_project(w, coarser):
    """Image of w in the module over a coarser tower (larger base field)."""
    if w.tower.pbasis != coarser.pbasis:
        raise TowerMismatch("towers use different p-bases")
    if not w.tower.adjoined <= coarser.adjoined:
        raise TowerMismatch("target tower must adjoin a superset")
    dropped = coarser.adjoined
    kept = {s: c for s, c in w.terms.items() if not set(s) & dropped}
    return DiffForm(coarser, w.degree, kept, _checked=True)


@dataclass
class FormMuDecomp:
    """Coefficient-wise monomial decomposition of a form."""

    form: DiffForm
    components: dict  # mu (tuple over free indices) -> DiffForm

    def total(self):
        acc = DiffForm.zero(self.form.tower, self.form.degree)
        for comp in self.components.values():
            acc = acc + comp
        return acc

    def zero_part(self):
        tower = self.form.tower
        mu0 = (0,) * tower.rank
        return self.components.get(mu0, DiffForm.zero(tower, self.form.degree))


def mu_decompose(w):
    tower = w.tower
    free = tower.free
    components = {}
    bpow_cache = {}
    for s, a in w.terms.items():
        for nu, f in tower.components(a).items():
            if nu not in bpow_cache:
                bmu = None
                for pos, i in enumerate(free):
                    if nu[pos]:
                        piece = tower.pbasis.elems[i] ** nu[pos]
                        bmu = piece if bmu is None else bmu * piece
                bpow_cache[nu] = bmu
            bmu = bpow_cache[nu]
            coeff = f if bmu is None else f * bmu
            comp = components.get(nu)
            if comp is None:
                components[nu] = {s: coeff}
            else:
                comp[s] = coeff
    built = {
        nu: DiffForm(tower, w.degree, terms, _checked=True) for nu, terms in components.items()
    }
    return FormMuDecomp(w, built)


def zero_component(w):
    """The mu = 0 part; base-field coefficients in front of each w_s."""
    tower = w.tower
    out = {}
    for s, a in w.terms.items():
        f0 = tower.zero_coefficient(a)
        if not f0.is_zero():
            out[s] = f0
    return DiffForm(tower, w.degree, out, _checked=True)


def _interior(w, direction):
    """Interior product against the dlog direction of a basis index."""
    out = {}
    for s, c in w.terms.items():
        if direction not in s:
            continue
        pos = s.index(direction)
        ns = s[:pos] + s[pos + 1:]
        nc = -c if pos % 2 else c
        out[ns] = nc
    return DiffForm(w.tower, w.degree - 1, out, _checked=True)


def is_cycle(w):
    return differential(w).is_zero()


def is_boundary(w):
    """(verdict, antiderivative): a cycle is a boundary iff its zero
    component vanishes; the antiderivative comes from the per-mu contracting
    homotopy (smallest index with mu != 0 mod p)."""
    if not is_cycle(w):
        return False, None
    tower = w.tower
    p = tower.field.p
    decomp = mu_decompose(w)
    mu0 = (0,) * tower.rank
    if mu0 in decomp.components and not decomp.components[mu0].is_zero():
        return False, None
    eta = DiffForm.zero(tower, w.degree - 1 if w.degree else 0)
    for nu, comp in decomp.components.items():
        if nu == mu0:
            continue
        pos = next(i for i, e in enumerate(nu) if e)
        direction = tower.free[pos]
        inv = pow(nu[pos], p - 2, p)
        eta = eta + _interior(comp, direction).scale(inv)
    return True, eta


def gamma(w):
    """Coefficient-wise p-th power in the fixed dlog basis; represents the
    inverse-Cartier map into cycles mod boundaries."""
    return DiffForm(
        w.tower, w.degree, {s: c.pth_power() for s, c in w.terms.items()}, _checked=True
    )


def cartier(w):
    """The Cartier operator on cycles: p-th root of the zero component.

    Over the full tower (base k^p) the root always exists; over a proper
    relative tower a zero component need not be a p-th power in k, in which
    case RootFailure is raised."""
    if not is_cycle(w):
        raise NotACycle("the Cartier operator is only defined on cycles")
    tower = w.tower
    out = {}
    for s, a in w.terms.items():
        f0 = tower.zero_coefficient(a)
        if f0.is_zero():
            continue
        root = pth_root(f0)
        if root is None:
            raise RootFailure("zero component is not a p-th power in k")
        out[s] = root
    return DiffForm(tower, w.degree, out, _checked=True)


def nu_member(w, q=None):
    """Membership in nu(q) = kernel of (gamma - id) mod boundaries.

    Returns (verdict, witness).  On success the witness is an antiderivative
    of gamma(w) - w; on failure it is the obstruction: the zero component of
    gamma(w) - w when that difference is a cycle, the difference itself
    otherwise."""
    if q is not None and q != w.degree:
        raise DimensionMismatch(f"form has degree {w.degree}, not {q}")
    defect = gamma(w) - w
    if defect.is_zero():
        return True, defect
    if not is_cycle(defect):
        return False, defect
    zc = zero_component(defect)
    if not zc.is_zero():
        return False, zc
    ok, eta = is_boundary(defect)
    assert ok
    return True, eta


def dlog_solve(w, tower=None):
    """Constructive logarithm over a tower of relative p-rank 1.

    Writes y = sum y_i b^i with base-field coefficients and solves the
    linear p x p system d(y) = y * w.  Returns y with dlog(y) = w, or None
    exactly when w is not logarithmic over the tower."""
    if tower is None:
        tower = w.tower
    elif not w.tower.same_module(tower):
        raise TowerMismatch("form does not live over the given tower")
    if tower.rank != 1:
        raise RankNotOne("dlog extraction needs relative p-rank 1")
    if w.degree != 1 and w.terms:
        raise DimensionMismatch("dlog extraction needs a 1-form")
    fdesc = tower.field
    p = fdesc.p
    j = tower.free[0]
    b = tower.pbasis.elems[j]
    a = w.coefficient((j,))
    zero = _zero_elem(fdesc)

    def rel_components(c):
        return tower.components(c)

    # A[i][m]: coefficient of b^m in a * b^i
    amat = []
    for i in range(p):
        comps = rel_components(a * b ** i) if not a.is_zero() else {}
        amat.append([comps.get((m,), zero) for m in range(p)])
    one = RatFunc.from_int(fdesc.p, fdesc.nvars, 1)
    const = [RatFunc.from_int(fdesc.p, fdesc.nvars, m) for m in range(p)]
    matrix = []
    for m in range(p):
        row = []
        for i in range(p):
            entry = amat[i][m]
            if i == m:
                entry = entry - const[m]
            row.append(entry)
        matrix.append(row)
    _, kernel = linsolve(matrix)
    for vec in kernel:
        y = zero
        for i in range(p):
            if not vec[i].is_zero():
                y = y + vec[i] * b ** i
        if y.is_zero():
            continue
        if dlog(y, tower) == w:
            return y
    return None
