"""Exact arithmetic over F_p and the rational function field F_p(x1..xn).

Polynomials are sparse: a map from exponent vectors (tuples of length nvars)
to nonzero residues mod p.  Rational functions are kept in a canonical form,
gcd(num, den) = 1 with den monic under graded-lexicographic order, so that
mathematical equality is representation equality.

The supported primes are 2, 3, 5 and 7; p enters the complexity of the
decomposition algorithms as p^n, and the guaranteed pipelines target p = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    DivisionByZero,
    ExponentOverflow,
    UnsupportedPrime,
    ZeroDenominator,
    ZeroInput,
)

SUPPORTED_PRIMES = (2, 3, 5, 7)

#: Exponents above this bound raise ExponentOverflow instead of silently growing.
EXPONENT_CAP = 1 << 16


def _inv_mod(a, p):
    return pow(a, p - 2, p)


def _grlex_key(exps):
    return (sum(exps), exps)


class MultiPoly:
    """Sparse multivariate polynomial over F_p.

    ``terms`` maps exponent tuples to coefficients in 1..p-1; zero
    coefficients are never stored.  Instances are immutable by convention.
    """

    __slots__ = ("p", "nvars", "terms")

    def __init__(self, p, nvars, terms=None, _checked=False):
        if p not in SUPPORTED_PRIMES:
            raise UnsupportedPrime(f"prime {p} not supported (use one of {SUPPORTED_PRIMES})")
        self.p = p
        self.nvars = nvars
        if terms is None:
            self.terms = {}
        elif _checked:
            self.terms = terms
        else:
            clean = {}
            for exps, coeff in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars:
                    raise DimensionMismatch(f"exponent vector {exps} has wrong length (expected {nvars})")
                if any(e < 0 for e in exps):
                    raise ExponentOverflow(f"negative exponent in {exps}")
                if any(e > EXPONENT_CAP for e in exps):
                    raise ExponentOverflow(f"exponent above cap {EXPONENT_CAP}")
                s = (clean.get(exps, 0) + coeff) % p
                if s:
                    clean[exps] = s
                else:
                    clean.pop(exps, None)
            self.terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, p, nvars):
        return cls(p, nvars, {}, _checked=True)

    @classmethod
    def const(cls, p, nvars, value):
        value %= p
        if not value:
            return cls.zero(p, nvars)
        return cls(p, nvars, {(0,) * nvars: value}, _checked=True)

    @classmethod
    def one(cls, p, nvars):
        return cls.const(p, nvars, 1)

    @classmethod
    def variable(cls, p, nvars, index):
        if not 0 <= index < nvars:
            raise DimensionMismatch(f"variable index {index} out of range for {nvars} variables")
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(p, nvars, {exps: 1}, _checked=True)

    # -- predicates and views -------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_one(self):
        return self.terms == {(0,) * self.nvars: 1}

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * self.nvars, 0)

    def is_monomial(self):
        return len(self.terms) == 1

    def total_degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var):
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def ord_in(self, var):
        """Order of vanishing in x_var (min exponent); raises on zero."""
        if not self.terms:
            raise ZeroInput("order of the zero polynomial is undefined")
        return min(e[var] for e in self.terms)

    def lead_term(self):
        """(exponents, coeff) of the graded-lex leading term."""
        if not self.terms:
            raise ZeroInput("zero polynomial has no leading term")
        exps = max(self.terms, key=_grlex_key)
        return exps, self.terms[exps]

    def variables_present(self):
        present = set()
        for e in self.terms:
            for i, v in enumerate(e):
                if v:
                    present.add(i)
        return present

    # -- arithmetic ------------------------------------------------------

    def _check_compat(self, other):
        if self.p != other.p or self.nvars != other.nvars:
            raise DimensionMismatch("polynomials live in different rings")

    def __add__(self, other):
        self._check_compat(other)
        p = self.p
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = (terms.get(e, 0) + c) % p
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return MultiPoly(p, self.nvars, terms, _checked=True)

    def __sub__(self, other):
        self._check_compat(other)
        p = self.p
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = (terms.get(e, 0) - c) % p
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return MultiPoly(p, self.nvars, terms, _checked=True)

    def __neg__(self):
        p = self.p
        return MultiPoly(p, self.nvars, {e: (-c) % p for e, c in self.terms.items()}, _checked=True)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check_compat(other)
        p = self.p
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out = {}
        cap = EXPONENT_CAP
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = (out.get(e, 0) + c1 * c2) % p
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        for e in out:
            if any(v > cap for v in e):
                raise ExponentOverflow(f"exponent above cap {cap} in product")
        return MultiPoly(p, self.nvars, out, _checked=True)

    __rmul__ = __mul__

    def scale(self, c):
        c %= self.p
        if not c:
            return MultiPoly.zero(self.p, self.nvars)
        if c == 1:
            return self
        p = self.p
        return MultiPoly(p, self.nvars, {e: (k * c) % p for e, k in self.terms.items()}, _checked=True)

    def __pow__(self, n):
        if n < 0:
            raise DivisionByZero("negative power of a polynomial")
        result = MultiPoly.one(self.p, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def mul_monomial(self, exps, coeff=1):
        p = self.p
        coeff %= p
        if not coeff:
            return MultiPoly.zero(p, self.nvars)
        out = {}
        for e, c in self.terms.items():
            ne = tuple(x + y for x, y in zip(e, exps))
            if any(v > EXPONENT_CAP for v in ne):
                raise ExponentOverflow("exponent above cap in monomial product")
            out[ne] = (c * coeff) % p
        return MultiPoly(p, self.nvars, out, _checked=True)

    def frobenius(self):
        """Termwise p-th power; exact since coefficients are F_p fixed points."""
        p = self.p
        return MultiPoly(p, self.nvars, {tuple(p * v for v in e): c for e, c in self.terms.items()}, _checked=True)

    def frobenius_root(self):
        """Inverse of frobenius when every exponent is divisible by p, else None."""
        p = self.p
        out = {}
        for e, c in self.terms.items():
            if any(v % p for v in e):
                return None
            out[tuple(v // p for v in e)] = c
        return MultiPoly(p, self.nvars, out, _checked=True)

    def derivative(self, var):
        p = self.p
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k % p == 0:
                continue
            ne = e[:var] + (k - 1,) + e[var + 1:]
            s = (out.get(ne, 0) + c * k) % p
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return MultiPoly(p, self.nvars, out, _checked=True)

    def subst_zero(self, var):
        """Substitute x_var = 0."""
        out = {e: c for e, c in self.terms.items() if e[var] == 0}
        return MultiPoly(self.p, self.nvars, out, _checked=True)

    def shift_down(self, var, k):
        """Divide by x_var^k; every term must have exponent >= k there."""
        out = {}
        for e, c in self.terms.items():
            if e[var] < k:
                raise DivisionByZero(f"term {e} not divisible by variable {var}^{k}")
            out[e[:var] + (e[var] - k,) + e[var + 1:]] = c
        return MultiPoly(self.p, self.nvars, out, _checked=True)

    def subst_power(self, var, k):
        """Substitute x_var -> x_var^k (monomial substitution)."""
        out = {}
        for e, c in self.terms.items():
            ne = e[:var] + (e[var] * k,) + e[var + 1:]
            if ne[var] > EXPONENT_CAP:
                raise ExponentOverflow("exponent above cap in substitution")
            out[ne] = c
        return MultiPoly(self.p, self.nvars, out, _checked=True)

    def extend_vars(self, nvars):
        """View in a larger polynomial ring, new variables appended."""
        if nvars < self.nvars:
            raise DimensionMismatch("cannot shrink variable count")
        pad = (0,) * (nvars - self.nvars)
        return MultiPoly(self.p, nvars, {e + pad: c for e, c in self.terms.items()}, _checked=True)

    # -- division --------------------------------------------------------

    def exact_div(self, other):
        """Exact division; other must divide self in F_p[x1..xn]."""
        self._check_compat(other)
        if other.is_zero():
            raise DivisionByZero("division by the zero polynomial")
        if other.is_one():
            return self
        if other.is_constant():
            return self.scale(_inv_mod(other.constant_value(), self.p))
        p = self.p
        rem = dict(self.terms)
        lt_e, lt_c = other.lead_term()
        lt_c_inv = _inv_mod(lt_c, p)
        quot = {}
        oterms = other.terms
        while rem:
            e = max(rem, key=_grlex_key)
            c = rem[e]
            qe = tuple(a - b for a, b in zip(e, lt_e))
            if any(v < 0 for v in qe):
                raise DivisionByZero("inexact polynomial division")
            qc = (c * lt_c_inv) % p
            quot[qe] = qc
            for oe, oc in oterms.items():
                ne = tuple(a + b for a, b in zip(qe, oe))
                s = (rem.get(ne, 0) - qc * oc) % p
                if s:
                    rem[ne] = s
                else:
                    rem.pop(ne, None)
        return MultiPoly(p, self.nvars, quot, _checked=True)

    def monic(self):
        """Scale so the graded-lex leading coefficient is 1."""
        if not self.terms:
            return self
        _, c = self.lead_term()
        if c == 1:
            return self
        return self.scale(_inv_mod(c, self.p))

    # -- comparisons and hashing ------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.p == other.p and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.p, self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- printing ----------------------------------------------------------

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MultiPoly(GF({self.p}), {format_poly(self)})"


def var_name(index, nvars):
    return f"x{index + 1}"


def format_monomial(exps, coeff, nvars):
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(var_name(i, nvars))
        elif e > 1:
            parts.append(f"{var_name(i, nvars)}^{e}")
    if not parts:
        return str(coeff)
    body = "*".join(parts)
    if coeff != 1:
        return f"{coeff}*{body}"
    return body


def format_poly(poly):
    if poly.is_zero():
        return "0"
    items = sorted(poly.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)
    return " + ".join(format_monomial(e, c, poly.nvars) for e, c in items)


# -- gcd machinery ---------------------------------------------------------


def _coeffs_in(poly, var):
    """Split into coefficient polynomials keyed by the main-variable degree."""
    out = {}
    zero_slot = None
    for e, c in poly.terms.items():
        d = e[var]
        ne = e[:var] + (0,) + e[var + 1:]
        slot = out.get(d)
        if slot is None:
            slot = out[d] = {}
        slot[ne] = c
    return {d: MultiPoly(poly.p, poly.nvars, t, _checked=True) for d, t in out.items()}


def _from_coeffs(coeffs, var, p, nvars):
    terms = {}
    for d, poly in coeffs.items():
        for e, c in poly.terms.items():
            terms[e[:var] + (d,) + e[var + 1:]] = c
    return MultiPoly(p, nvars, terms, _checked=True)


def _monomial_gcd(f, g):
    """Common monomial factor of all terms of f and g (coefficient 1)."""
    mins = None
    for poly in (f, g):
        for e in poly.terms:
            if mins is None:
                mins = list(e)
            else:
                mins = [min(a, b) for a, b in zip(mins, e)]
    return tuple(mins)


def _univar_gcd(f, g, var):
    """Euclid in F_p[x_var]; f, g must only involve x_var."""
    p = f.p

    def to_list(poly):
        d = poly.degree_in(var)
        out = [0] * (d + 1)
        for e, c in poly.terms.items():
            out[e[var]] = c
        return out

    a, b = to_list(f), to_list(g)

    def trim(v):
        while v and v[-1] == 0:
            v.pop()
        return v

    a, b = trim(a), trim(b)
    while b:
        inv = _inv_mod(b[-1], p)
        while len(a) >= len(b):
            factor = (a[-1] * inv) % p
            shift = len(a) - len(b)
            for i, c in enumerate(b):
                a[i + shift] = (a[i + shift] - factor * c) % p
            trim(a)
            if not a:
                break
        a, b = b, a
    inv = _inv_mod(a[-1], p)
    terms = {}
    for i, c in enumerate(a):
        if c:
            e = [0] * f.nvars
            e[var] = i
            terms[tuple(e)] = (c * inv) % p
    return MultiPoly(p, f.nvars, terms, _checked=True)


def _content(poly, var):
    """gcd of the main-variable coefficients (a polynomial without x_var)."""
    coeffs = list(_coeffs_in(poly, var).values())
    acc = coeffs[0]
    for c in coeffs[1:]:
        if acc.is_constant():
            break
        acc = poly_gcd(acc, c)
    return acc.monic()


def _pseudo_rem(f, g, var):
    """Pseudo remainder of f by g in the main variable."""
    df, dg = f.degree_in(var), g.degree_in(var)
    gc = _coeffs_in(g, var)
    lg = gc[dg]
    while not f.is_zero() and f.degree_in(var) >= dg:
        d = f.degree_in(var)
        fc = _coeffs_in(f, var)
        lf = fc[d]
        # f <- lg*f - lf*x^(d-dg)*g keeps coefficients polynomial
        shift = [0] * f.nvars
        shift[var] = d - dg
        f = lg * f - g.mul_monomial(tuple(shift)) * lf
    return f


def _try_exact_div(f, g):
    try:
        return f.exact_div(g)
    except DivisionByZero:
        return None


def poly_gcd(f, g):
    """gcd in F_p[x1..xn], monic under graded-lex.

    Recursive primitive PRS with content extraction, after stripping the
    common monomial factor, pruning variables present in only one operand
    and trying mutual trial division (the common case in a fraction
    pipeline is a literal nested factor)."""
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if f.is_constant() or g.is_constant():
        return MultiPoly.one(f.p, f.nvars)
    if f.terms == g.terms:
        return f.monic()
    mono = _monomial_gcd(f, g)
    if any(mono):
        f = _shift_down_all(f, mono)
        g = _shift_down_all(g, mono)
    core = _gcd_core(f, g)
    if any(mono):
        core = core.mul_monomial(tuple(mono))
    return core.monic()


def _gcd_core(f, g):
    if f.is_constant() or g.is_constant():
        return MultiPoly.one(f.p, f.nvars)
    if f.terms == g.terms:
        return f
    vars_f = f.variables_present()
    vars_g = g.variables_present()
    # variables on one side only cannot appear in the gcd
    for v in vars_f - vars_g:
        f = _content(f, v)
        if f.is_constant():
            return MultiPoly.one(f.p, f.nvars)
    for v in vars_g - vars_f:
        g = _content(g, v)
        if g.is_constant():
            return MultiPoly.one(f.p, f.nvars)
    common = f.variables_present() & g.variables_present()
    if not common:
        return MultiPoly.one(f.p, f.nvars)
    # trial division settles literal nested factors cheaply
    if len(f.terms) >= len(g.terms):
        if _try_exact_div(f, g) is not None:
            return g
    else:
        if _try_exact_div(g, f) is not None:
            return f
    if len(common) == 1 and len(vars_f | vars_g) == 1:
        return _univar_gcd(f, g, next(iter(common)))
    # main variable: smallest worst-case degree keeps the PRS short
    var = min(common, key=lambda v: max(f.degree_in(v), g.degree_in(v)))
    cf = _content(f, var)
    cg = _content(g, var)
    fp = f if cf.is_one() else f.exact_div(cf)
    gp = g if cg.is_one() else g.exact_div(cg)
    if fp.degree_in(var) < gp.degree_in(var):
        fp, gp = gp, fp
    while not gp.is_zero():
        r = _pseudo_rem(fp, gp, var)
        if r.is_zero():
            fp = gp
            break
        if not r.degree_in(var):
            fp = MultiPoly.one(f.p, f.nvars)
            break
        fp, gp = gp, r.exact_div(_content(r, var))
    if fp.degree_in(var) > 0:
        fp = fp.exact_div(_content(fp, var))
    cont = poly_gcd(cf, cg)
    if fp.is_one():
        return cont
    if cont.is_one():
        return fp
    return cont * fp


def _shift_down_all(poly, mono):
    out = {}
    for e, c in poly.terms.items():
        out[tuple(a - b for a, b in zip(e, mono))] = c
    return MultiPoly(poly.p, poly.nvars, out, _checked=True)


# -- rational functions ------------------------------------------------------


class RatFunc:
    """Element of F_p(x1..xn) as a canonical fraction.

    Invariants: den != 0, gcd(num, den) = 1, den monic under graded-lex.
    Equal values therefore have identical representations.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = MultiPoly.one(num.p, num.nvars)
        if _canonical:
            self.num = num
            self.den = den
            return
        if den.is_zero():
            raise ZeroDenominator("denominator is zero")
        num._check_compat(den)
        if num.is_zero():
            self.num = num
            self.den = MultiPoly.one(num.p, num.nvars)
            return
        g = poly_gcd(num, den)
        if not g.is_one():
            num = num.exact_div(g)
            den = den.exact_div(g)
        _, lc = den.lead_term()
        if lc != 1:
            inv = _inv_mod(lc, den.p)
            num = num.scale(inv)
            den = den.scale(inv)
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, p, nvars, value):
        return cls(MultiPoly.const(p, nvars, value))

    @property
    def p(self):
        return self.num.p

    @property
    def nvars(self):
        return self.num.nvars

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, int):
            return RatFunc.from_int(self.p, self.nvars, other)
        return None

    # -- predicates ----------------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def is_one(self):
        return self.num.is_one() and self.den.is_one()

    def is_polynomial(self):
        return self.den.is_one()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_one()

    def __bool__(self):
        return not self.num.is_zero()

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return -other
        if self.den == other.den:
            return RatFunc(self.num - other.num, self.den)
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self):
        return RatFunc(-self.num, self.den, _canonical=True)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RatFunc(MultiPoly.zero(self.p, self.nvars))
        # cross-cancel before multiplying to keep gcd inputs small
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_one() else self.num.exact_div(g1)
        d2 = other.den if g1.is_one() else other.den.exact_div(g1)
        n2 = other.num if g2.is_one() else other.num.exact_div(g2)
        d1 = self.den if g2.is_one() else self.den.exact_div(g2)
        return RatFunc(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        num, den = self.den, self.num
        _, lc = den.lead_term()
        if lc != 1:
            inv = _inv_mod(lc, den.p)
            num = num.scale(inv)
            den = den.scale(inv)
        return RatFunc(num, den, _canonical=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZero("division by zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n):
        if n == 0:
            return RatFunc.from_int(self.p, self.nvars, 1)
        if n < 0:
            return self.inverse() ** (-n)
        if n % self.p == 0:
            # freshman's dream: p-th powers are termwise
            half = self.pth_power()
            return half ** (n // self.p)
        return RatFunc(self.num ** n, self.den ** n)

    def pth_power(self):
        return RatFunc(self.num.frobenius(), self.den.frobenius(), _canonical=True)

    def derivative(self, var):
        """Partial derivative with respect to x_var, as a rational function."""
        dn = self.num.derivative(var)
        dd = self.den.derivative(var)
        if dd.is_zero():
            return RatFunc(dn, self.den)
        return RatFunc(dn * self.den - self.num * dd, self.den * self.den)

    def subst_power(self, var, k):
        return RatFunc(self.num.subst_power(var, k), self.den.subst_power(var, k))

    def extend_vars(self, nvars):
        return RatFunc(self.num.extend_vars(nvars), self.den.extend_vars(nvars), _canonical=True)

    # -- comparisons -------------------------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self):
        return format_ratfunc(self)

    def __repr__(self):
        return f"RatFunc(GF({self.p}), {format_ratfunc(self)})"

    def complexity(self):
        """Rough size measure used for pivot selection."""
        return len(self.num.terms) + len(self.den.terms)


def format_ratfunc(f):
    num = format_poly(f.num)
    if f.den.is_one():
        return num
    den = format_poly(f.den)
    if len(f.num.terms) > 1:
        num = f"({num})"
    if len(f.den.terms) > 1 or not f.den.is_monomial():
        den = f"({den})"
    return f"{num}/{den}"


def normalize(num, den):
    """Canonical representative of num/den; idempotent."""
    return RatFunc(num, den)


def arith(op, f, g):
    """Exact field arithmetic: op in {'add', 'sub', 'mul', 'div'}."""
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    raise ValueError(f"unknown operation {op!r}")


# -- field descriptor ----------------------------------------------------------


@dataclass(frozen=True)
class FieldDesc:
    """The rational function field k = F_p(x1..x_nvars)."""

    p: int
    nvars: int

    def __post_init__(self):
        if self.p not in SUPPORTED_PRIMES:
            raise UnsupportedPrime(f"prime {self.p} not supported")
        if self.nvars < 0:
            raise DimensionMismatch("negative variable count")

    def zero(self):
        return RatFunc(MultiPoly.zero(self.p, self.nvars))

    def one(self):
        return RatFunc(MultiPoly.one(self.p, self.nvars))

    def const(self, value):
        return RatFunc(MultiPoly.const(self.p, self.nvars, value))

    def var(self, index):
        return RatFunc(MultiPoly.variable(self.p, self.nvars, index))

    def gens(self):
        return tuple(self.var(i) for i in range(self.nvars))

    def poly(self, terms):
        """Polynomial from {exponent tuple: coefficient}."""
        return RatFunc(MultiPoly(self.p, self.nvars, terms))


# -- valuations ------------------------------------------------------------------


@dataclass(frozen=True)
class DVal:
    """The x_i-adic place of F_p(x1..xn).

    The residue field is F_p(x1..x^_i..xn), represented with the same
    variable count but no occurrence of x_i.
    """

    field: FieldDesc
    var: int

    def __post_init__(self):
        if not 0 <= self.var < self.field.nvars:
            raise DimensionMismatch("valuation variable out of range")

    def residue_is_finite(self):
        return self.field.nvars == 1


def valuation(f, place):
    """(order, residue): residue only present when the order is zero."""
    if f.is_zero():
        raise ZeroInput("valuation of zero is undefined")
    var = place.var
    a = f.num.ord_in(var)
    b = f.den.ord_in(var)
    order = a - b
    if order != 0:
        return order, None
    n0 = f.num.shift_down(var, a).subst_zero(var)
    d0 = f.den.shift_down(var, b).subst_zero(var)
    return 0, RatFunc(n0, d0)


# -- linear algebra ---------------------------------------------------------------


def _zero_like(field_elem):
    return RatFunc(MultiPoly.zero(field_elem.p, field_elem.nvars))


def linsolve(matrix, rhs=None):
    """Exact Gaussian elimination over F_p(x1..xn).

    Returns (solution, kernel_basis).  solution is None when the system is
    inconsistent; kernel_basis spans the null space of the matrix.  With
    rhs None the homogeneous system is solved.
    """
    if not matrix:
        raise DimensionMismatch("empty matrix")
    ncols = len(matrix[0])
    if any(len(row) != ncols for row in matrix):
        raise DimensionMismatch("matrix is not rectangular")
    sample = None
    for row in matrix:
        for x in row:
            sample = x
            break
        if sample is not None:
            break
    if rhs is not None and len(rhs) != len(matrix):
        raise DimensionMismatch("rhs length does not match row count")
    zero = _zero_like(sample)
    one = RatFunc.from_int(sample.p, sample.nvars, 1)
    rows = [list(row) for row in matrix]
    b = list(rhs) if rhs is not None else [zero] * len(rows)

    pivots = []
    r = 0
    for col in range(ncols):
        # pick the structurally simplest nonzero pivot to limit blowup
        best = None
        for i in range(r, len(rows)):
            if not rows[i][col].is_zero():
                size = rows[i][col].complexity()
                if best is None or size < best[1]:
                    best = (i, size)
        if best is None:
            continue
        i = best[0]
        rows[r], rows[i] = rows[i], rows[r]
        b[r], b[i] = b[i], b[r]
        inv = rows[r][col].inverse()
        rows[r] = [x * inv for x in rows[r]]
        b[r] = b[r] * inv
        for i in range(len(rows)):
            if i != r and not rows[i][col].is_zero():
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
                b[i] = b[i] - factor * b[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    solution = None
    consistent = all(b[i].is_zero() for i in range(r, len(rows)))
    if consistent:
        solution = [zero] * ncols
        for k, col in enumerate(pivots):
            solution[col] = b[k]
    pivot_set = set(pivots)
    kernel = []
    for col in range(ncols):
        if col in pivot_set:
            continue
        vec = [zero] * ncols
        vec[col] = one
        for k, pcol in enumerate(pivots):
            vec[pcol] = -rows[k][col]
        kernel.append(vec)
    return solution, kernel


def det(matrix):
    """Determinant over F_p(x1..xn) by fraction-full Gaussian elimination."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise DimensionMismatch("determinant needs a square matrix")
    rows = [list(row) for row in matrix]
    sample = rows[0][0]
    acc = RatFunc.from_int(sample.p, sample.nvars, 1)
    sign = 1
    for col in range(n):
        piv = None
        for i in range(col, n):
            if not rows[i][col].is_zero():
                piv = i
                break
        if piv is None:
            return _zero_like(sample)
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            sign = -sign
        pivot = rows[col][col]
        acc = acc * pivot
        inv = pivot.inverse()
        for i in range(col + 1, n):
            if rows[i][col].is_zero():
                continue
            factor = rows[i][col] * inv
            rows[i] = [x - factor * y for x, y in zip(rows[i], rows[col])]
    if sign < 0:
        acc = -acc
    return acc
