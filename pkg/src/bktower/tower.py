"""The tower of rings 𝔖_n ⊂ S_n and the maps between them.

Two element types live here.

``SeriesElement``
    an element of 𝔖_n = Z_p[[u_n]] stored as an integer polynomial modulo
    p^prec, optionally known only modulo u_n^uprec (power-series results).
``PDElement``
    an element of S_n stored in divided-power coordinates
    ``p^-den * sum_j a_j(u_n) * gamma_j(E)`` with deg a_j < e p^n and
    integral a_j.  Only the slots j < J are kept; the element is known
    modulo ``p^prec S_n + Fil^J``.

The divided-power coordinates are exact and integral, multiplication is
triangular in the slot index, and Frobenius sends Fil^J into p^{J - v(J!)},
so both truncations are honest ideals of the ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from . import _poly
from .errors import (DenominatorOverflow, DepthExceeded, NotInFil, NotInS,
                     PrecisionExhausted)
from .precision import (PadicCoeff, PrecisionContext, contraction_bound,
                        legendre_valuation, phi_precision_window, vp)

__all__ = [
    "SeriesElement",
    "PDElement",
    "PDForm",
    "WeierstrassResult",
    "arithmetic",
    "include_up",
    "frobenius",
    "frobenius_inverse_frakS",
    "z_element",
    "c0",
    "lambda_unit",
    "pd_canonical_form",
    "fil_degree",
    "weierstrass_divide",
    "decompose_keyA",
    "decompose_frakS_fil",
]


def _unit_part(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


@lru_cache(maxsize=None)
def _E_power(E_coeffs: tuple, q: int, m: int, mod: int) -> tuple:
    base = _poly.inflate(list(E_coeffs), q)
    return tuple(_poly.power(base, m, mod))


def _sparse_tail(poly: Sequence[int]) -> list[tuple[int, int]]:
    return [(k, c) for k, c in enumerate(poly[:-1]) if c]


# ---------------------------------------------------------------------------
# 𝔖_n
# ---------------------------------------------------------------------------


class SeriesElement:
    """Element of 𝔖_n = Z_p[[u_n]] modulo p^prec (and u_n^uprec if set)."""

    __slots__ = ("ctx", "level", "coeffs", "prec", "uprec")
    tag = "frakS"

    def __init__(self, ctx: PrecisionContext, coeffs: Sequence[int], level: int = 0,
                 prec: int | None = None, uprec: int | None = None):
        prec = ctx.N if prec is None else min(prec, ctx.N)
        if prec < 1:
            raise PrecisionExhausted("series carries no p-adic digits")
        mod = ctx.p ** prec
        cs = [int(c) % mod for c in coeffs]
        if uprec is not None:
            del cs[uprec:]
        self.ctx = ctx
        self.level = level
        self.coeffs = tuple(_poly.trim(cs))
        self.prec = prec
        self.uprec = uprec

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, ctx, level=0):
        return cls(ctx, [], level)

    @classmethod
    def one(cls, ctx, level=0):
        return cls(ctx, [1], level)

    @classmethod
    def const(cls, ctx, c: int, level=0):
        return cls(ctx, [c], level)

    @classmethod
    def gen(cls, ctx, level=0):
        """The variable u_n."""
        return cls(ctx, [0, 1], level)

    @classmethod
    def E(cls, ctx, level=0):
        """E = E(u_0) written in the level-n variable, E(u_n^{p^n})."""
        return cls(ctx, _poly.inflate(list(ctx.E_coeffs), ctx.p ** level), level)

    # basic protocol ----------------------------------------------------
    @property
    def mod(self) -> int:
        return self.ctx.p ** self.prec

    def _new(self, coeffs, level=None, prec=None, uprec="same"):
        return SeriesElement(self.ctx, coeffs, self.level if level is None else level,
                             self.prec if prec is None else prec,
                             self.uprec if uprec == "same" else uprec)

    def _coerce(self, other) -> "SeriesElement":
        if isinstance(other, SeriesElement):
            if other.level != self.level:
                raise ValueError(f"level mismatch {self.level} vs {other.level}; use include_up")
            return other
        if isinstance(other, int):
            return SeriesElement(self.ctx, [other], self.level, self.prec)
        return NotImplemented

    @staticmethod
    def _join_uprec(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        return self._new(_poly.add(self.coeffs, other.coeffs, self.ctx.p ** prec), prec=prec,
                         uprec=self._join_uprec(self.uprec, other.uprec))

    __radd__ = __add__

    def __neg__(self):
        return self._new([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PDElement):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        return self._new(_poly.mul(self.coeffs, other.coeffs, self.ctx.p ** prec), prec=prec,
                         uprec=self._join_uprec(self.uprec, other.uprec))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = SeriesElement.one(self.ctx, self.level)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, (int, SeriesElement)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        win = "" if self.uprec is None else f", +O(u^{self.uprec})"
        return f"SeriesElement(level={self.level}, {list(self.coeffs)}{win}, mod p^{self.prec})"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def valuation(self) -> int | float:
        return min((vp(c, self.ctx.p) for c in self.coeffs), default=math.inf)

    def constant_term(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    # tower maps ---------------------------------------------------------
    def frobenius(self) -> "SeriesElement":
        """φ: u_n -> u_n^p = u_{n-1}; at level 0 substitutes u -> u^p."""
        if self.level >= 1:
            return self._new(self.coeffs, level=self.level - 1)
        uprec = None if self.uprec is None else self.uprec * self.ctx.p
        return self._new(_poly.inflate(self.coeffs, self.ctx.p), uprec=uprec)

    def frobenius_inverse(self) -> "SeriesElement":
        if self.level >= self.ctx.depth:
            raise DepthExceeded(f"level {self.level + 1} exceeds depth {self.ctx.depth}")
        return self._new(self.coeffs, level=self.level + 1)

    def include_up(self) -> "SeriesElement":
        if self.level >= self.ctx.depth:
            raise DepthExceeded(f"level {self.level + 1} exceeds depth {self.ctx.depth}")
        uprec = None if self.uprec is None else self.uprec * self.ctx.p
        return self._new(_poly.inflate(self.coeffs, self.ctx.p), level=self.level + 1,
                         uprec=uprec)

    # division -----------------------------------------------------------
    def divmod_E(self, m: int) -> tuple["SeriesElement", "SeriesElement"]:
        """Weierstrass division by E^m (E is distinguished, so this is
        polynomial long division)."""
        if m == 0:
            return self, SeriesElement.zero(self.ctx, self.level)
        ctx = self.ctx
        Em = _E_power(ctx.E_coeffs, ctx.p ** self.level, m, self.mod)
        q, r = _poly.divmod_monic(self.coeffs, len(Em) - 1, _sparse_tail(Em), self.mod)
        uq = None if self.uprec is None else self.uprec - (len(Em) - 1)
        if uq is not None and uq <= 0:
            raise PrecisionExhausted("u-adic window too small for the division")
        return self._new(q, uprec=uq), self._new(r)

    def div_p(self, k: int = 1) -> "SeriesElement":
        p = self.ctx.p
        if any(c % p ** k for c in self.coeffs):
            raise ValueError("series is not divisible by p^%d" % k)
        return SeriesElement(self.ctx, [c // p ** k for c in self.coeffs], self.level,
                             self.prec - k, self.uprec)

    def inverse(self, uprec: int | None = None) -> "SeriesElement":
        """Inverse of a unit of 𝔖_n truncated at u^uprec."""
        if self.constant_term() % self.ctx.p == 0:
            raise ZeroDivisionError("not a unit of 𝔖")
        L = uprec or self.uprec or self.ctx.u_cutoff(self.level)
        inv = _poly.series_inverse(self.coeffs, L, self.mod)
        if len(self.coeffs) == 1:
            return self._new(inv, uprec=self.uprec)
        return self._new(inv, uprec=L if self.uprec is None else min(L, self.uprec))

    def to_pd(self, J: int | None = None) -> "PDElement":
        return PDElement.from_series(self, J)

    def to_fractions(self) -> list[Fraction]:
        return [Fraction(c) for c in self.coeffs]

    def padic_coeffs(self) -> list[tuple[int, PadicCoeff]]:
        p = self.ctx.p
        out = []
        for d, c in enumerate(self.coeffs):
            if c:
                v = vp(c, p)
                out.append((d, PadicCoeff(p, v, c // p ** v, self.prec - v)))
        return out


# ---------------------------------------------------------------------------
# S_n in divided-power coordinates
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _padic_int(x: Fraction, mod: int) -> int:
    """Reduce a p-integral rational modulo ``mod``."""
    return x.numerator * pow(x.denominator, -1, mod) % mod


class PDElement:
    """Element of S_n (or S_n[1/p]) as ``p^-den * sum_{j<J} a_j gamma_j(E)``.

    ``prec`` is the absolute p-adic precision, ``tail`` a lower bound on the
    valuation of the unknown part living in Fil^J.
    """

    __slots__ = ("ctx", "level", "slots", "den", "prec", "tail")

    def __init__(self, ctx: PrecisionContext, slots: Sequence[Sequence[int]], level: int = 0,
                 den: int = 0, prec: int | None = None, tail: int = 0):
        prec = ctx.N if prec is None else min(prec, ctx.N)
        p = ctx.p
        if prec < 1:
            raise PrecisionExhausted(f"element carries {prec} p-adic digits")
        iprec = prec + den
        mod = p ** iprec
        L = ctx.slot_length(level)
        norm = []
        for a in slots:
            a = [c % mod for c in a]
            if len(a) > L and any(a[L:]):
                raise ValueError("slot polynomial exceeds degree bound; normalize first")
            norm.append(_poly.trim(a[:L]))
        # strip common powers of p from the scale
        while den > 0:
            if any(c % p for a in norm for c in a):
                break
            norm = [[c // p for c in a] for a in norm]
            den -= 1
        mod = p ** (prec + den)
        self.ctx = ctx
        self.level = level
        self.slots = tuple(tuple(c % mod for c in a) for a in norm)
        self.den = den
        self.prec = prec
        self.tail = min(tail, 0) if den == 0 else tail

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, ctx, level=0, J=None):
        J = ctx.fil_window_at(level) if J is None else J
        return cls(ctx, [()] * J, level)

    @classmethod
    def one(cls, ctx, level=0, J=None):
        return cls.const(ctx, 1, level, J)

    @classmethod
    def const(cls, ctx, c: int, level=0, J=None):
        J = ctx.fil_window_at(level) if J is None else J
        return cls(ctx, [(c,)] + [()] * (J - 1), level)

    @classmethod
    def gamma(cls, ctx, j: int, level=0, J=None, coeff=(1,)):
        """coeff(u_n) * gamma_j(E) = coeff * E^j / j!."""
        J = ctx.fil_window_at(level) if J is None else J
        J = max(J, j + 1) if J <= j else J
        slots = [()] * J
        out = cls(ctx, slots, level)
        return out._add_poly_gamma(list(coeff), j)

    @classmethod
    def from_series(cls, s: SeriesElement, J: int | None = None) -> "PDElement":
        """Image of 𝔖_n -> S_n via the Weierstrass expansion in powers of E."""
        ctx, level = s.ctx, s.level
        J = ctx.fil_window_at(level) if J is None else J
        L = ctx.slot_length(level)
        prec = s.prec
        if s.uprec is not None:
            # u^{m e p^n} lies in sum_k p^{m-k} Fil^k
            m = s.uprec // L
            prec = min(prec, m - J + 1)
        slots = _expand_in_E(ctx, level, list(s.coeffs), J, s.mod, factorial_weights=True)
        return cls(ctx, slots, level, 0, prec)

    @classmethod
    def from_rationals(cls, ctx, coeffs: Sequence, level=0, J=None, prec=None) -> "PDElement":
        """Element of S_n[1/p] from a u_n-polynomial with p-power denominators."""
        J = ctx.fil_window_at(level) if J is None else J
        prec = ctx.N if prec is None else prec
        p = ctx.p
        fr = [Fraction(c) for c in coeffs]
        den = 0
        for c in fr:
            if c:
                den = max(den, vp(c.denominator, p))
        mod = p ** (prec + den)
        ints = [_padic_int(c * p ** den, mod) for c in fr]
        slots = _expand_in_E(ctx, level, ints, J, mod, factorial_weights=True)
        return cls(ctx, slots, level, den, prec)

    # properties -------------------------------------------------------
    @property
    def J(self) -> int:
        return len(self.slots)

    @property
    def iprec(self) -> int:
        return self.prec + self.den

    @property
    def tag(self) -> str:
        return "S" if self.den == 0 else "fractionS"

    @property
    def window(self) -> tuple[int, int]:
        """(absolute p-adic digits, divided-power slots) guaranteed."""
        return self.prec, self.J

    def __repr__(self):
        nz = {j: list(a) for j, a in enumerate(self.slots) if a}
        scale = f"p^-{self.den} * " if self.den else ""
        return (f"PDElement(level={self.level}, {scale}{nz}, "
                f"mod p^{self.prec} + Fil^{self.J})")

    def is_zero(self) -> bool:
        return not any(self.slots)

    def valuation(self) -> int | float:
        p = self.ctx.p
        v = min((vp(c, p) for a in self.slots for c in a if c), default=math.inf)
        return v - self.den

    def _int_valuation(self) -> int:
        v = self.valuation()
        return self.iprec if v is math.inf else v + self.den

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "PDElement":
        if isinstance(other, PDElement):
            if other.level != self.level:
                raise ValueError(f"level mismatch {self.level} vs {other.level}; use include_up")
            return other
        if isinstance(other, SeriesElement):
            if other.level != self.level:
                raise ValueError(f"level mismatch {self.level} vs {other.level}; use include_up")
            return PDElement.from_series(other, self.J)
        if isinstance(other, int):
            return PDElement.const(self.ctx, other, self.level, self.J)
        return NotImplemented

    def _aligned(self, other: "PDElement"):
        """Integral slot lists of self and other over a common scale."""
        p = self.ctx.p
        den = max(self.den, other.den)
        J = min(self.J, other.J)
        prec = min(self.prec, other.prec)
        mod = p ** (prec + den)

        def lift(x):
            f = p ** (den - x.den)
            return [[c * f for c in a] for a in x.slots[:J]]

        return lift(self), lift(other), den, prec, J, mod

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, den, prec, J, mod = self._aligned(other)
        slots = [_poly.add(x, y, mod) for x, y in zip(a, b)]
        return PDElement(self.ctx, slots, self.level, den, prec, min(self.tail, other.tail))

    __radd__ = __add__

    def __neg__(self):
        return PDElement(self.ctx, [[-c for c in a] for a in self.slots], self.level,
                         self.den, self.prec, self.tail)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ctx, p = self.ctx, self.ctx.p
        J = min(self.J, other.J)
        den = self.den + other.den
        vx, vy = self._int_valuation(), other._int_valuation()
        iprec = min(self.iprec + vy, other.iprec + vx)
        prec = min(iprec - den, ctx.N)
        if prec < 1:
            raise PrecisionExhausted("product carries no p-adic digits")
        if den > _den_budget(ctx, J):
            raise DenominatorOverflow(f"denominator p^{den} exceeds budget")
        mod = p ** (prec + den)
        raw = [[] for _ in range(J)]
        for i, a in enumerate(self.slots[:J]):
            if not a:
                continue
            for j, b in enumerate(other.slots[:J - i]):
                if not b:
                    continue
                prod = _poly.mul(a, b, mod)
                c = math.comb(i + j, i)
                if c != 1:
                    prod = [x * c for x in prod]
                raw[i + j] = _poly.add(raw[i + j], prod, mod)
        slots = _carry(ctx, self.level, raw, mod)
        vxa, vya = vx - self.den, vy - other.den
        tail = min(self.tail + vya, other.tail + vxa, vxa + vya)
        return PDElement(ctx, slots, self.level, den, prec, tail)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PDElement.one(self.ctx, self.level, self.J)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def scale_p(self, k: int) -> "PDElement":
        """Multiply by p^k (k may be negative)."""
        if k >= 0:
            p = self.ctx.p
            f = p ** k
            return PDElement(self.ctx, [[c * f for c in a] for a in self.slots], self.level,
                             self.den, self.prec + k, self.tail + k)
        return PDElement(self.ctx, self.slots, self.level, self.den - k, self.prec + k,
                         self.tail + k)

    def with_window(self, J: int) -> "PDElement":
        """Forget slots >= J (J may not exceed the current window)."""
        if J > self.J:
            raise PrecisionExhausted(f"cannot widen window {self.J} to {J}")
        return PDElement(self.ctx, self.slots[:J], self.level, self.den, self.prec,
                         min(self.tail, -self.den))

    def agrees(self, other) -> bool:
        other = self._coerce(other)
        return (self - other).is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, SeriesElement, PDElement)):
            return self.agrees(other)
        return NotImplemented

    __hash__ = None

    def _add_poly_gamma(self, poly: list[int], m: int) -> "PDElement":
        """self + poly(u_n) * gamma_m(E), poly of arbitrary degree, integral."""
        ctx = self.ctx
        mod = ctx.p ** self.iprec
        J = self.J
        if m >= J:
            return self
        pieces = _expand_in_E(ctx, self.level, poly, J - m, mod, factorial_weights=False)
        slots = [list(a) for a in self.slots]
        for l, b in enumerate(pieces):
            if b and m + l < J:
                c = _fact(m + l) // _fact(m)
                slots[m + l] = _poly.add(slots[m + l], [x * c * ctx.p ** self.den for x in b],
                                         mod)
        return PDElement(ctx, slots, self.level, self.den, self.prec, self.tail)

    # filtration -------------------------------------------------------
    def fil_degree(self) -> int | float:
        for j, a in enumerate(self.slots):
            if a:
                return j
        return math.inf

    def in_frakS_plus_fil(self, I: int) -> bool:
        """Is the element in 𝔖_n + Fil^I S_n (within the window)?"""
        p = self.ctx.p
        for k, a in enumerate(self.slots[:I]):
            need = min(legendre_valuation(k, p) + self.den, self.iprec)
            if any(c % p ** need for c in a):
                return False
        return True

    def divide_E_power(self, r: int) -> "PDElement":
        """x / E^r in S_n[1/p]; requires x ∈ Fil^r."""
        if r == 0:
            return self
        if self.fil_degree() < r:
            raise NotInFil(f"element has filtration degree {self.fil_degree()} < {r}")
        p = self.ctx.p
        J = self.J - r
        ratios = [_unit_part(_fact(k + r) // _fact(k), p) for k in range(J)]
        vmax = max(v for v, _ in ratios)
        mod = p ** (self.iprec + vmax)
        slots = []
        for k in range(J):
            v, u = ratios[k]
            f = pow(u, -1, mod) * p ** (vmax - v)
            slots.append([c * f for c in self.slots[k + r]])
        tail_loss = max(_unit_part(_fact(k + r) // _fact(k), p)[0]
                        for k in range(J, J + p * p + r))
        return PDElement(self.ctx, slots, self.level, self.den + vmax, self.prec - vmax,
                         min(self.tail - tail_loss, -self.den - vmax))

    def frakS_part(self, split: int | None = None):
        """(w, y) with self = w + y, w ∈ 𝔖_n and y ∈ Fil^split (default p)."""
        ctx, p = self.ctx, self.ctx.p
        split = p if split is None else split
        if self.den:
            raise NotInS("element has a denominator")
        if not self.in_frakS_plus_fil(split):
            raise NotInS(f"element is not in 𝔖 + Fil^{split}")
        mod = p ** self.prec
        L = ctx.slot_length(self.level)
        Epow = [1]
        E = _poly.inflate(list(ctx.E_coeffs), p ** self.level)
        w = []
        for k, a in enumerate(self.slots[:split]):
            if a:
                v, u = _unit_part(_fact(k), p)
                b = [(c // p ** v) * pow(u, -1, mod) for c in a]
                w = _poly.add(w, _poly.mul(b, Epow, mod), mod)
            Epow = _poly.mul(Epow, E, mod)
        y_slots = [()] * min(split, self.J) + list(self.slots[split:])
        ws = SeriesElement(ctx, w, self.level, self.prec)
        y = PDElement(ctx, y_slots, self.level, 0, self.prec, self.tail)
        return ws, y

    # tower maps -------------------------------------------------------
    def include_up(self) -> "PDElement":
        if self.level >= self.ctx.depth:
            raise DepthExceeded(f"level {self.level + 1} exceeds depth {self.ctx.depth}")
        p = self.ctx.p
        return PDElement(self.ctx, [_poly.inflate(a, p) for a in self.slots], self.level + 1,
                         self.den, self.prec, self.tail)

    def frobenius(self, J_out: int | None = None) -> "PDElement":
        """φ: S_n -> S_{n-1} (S_0 -> S_0 at the bottom)."""
        ctx, p = self.ctx, self.ctx.p
        t = max(self.level - 1, 0)
        J_out = ctx.fil_window_at(t) if J_out is None else J_out
        iprec = min(self.iprec, self.tail + self.den + phi_precision_window(self.J, p))
        if iprec - self.den < 1:
            raise PrecisionExhausted("Frobenius image carries no p-adic digits")
        mod = p ** iprec
        ctx_prec = iprec  # integral-form precision during the computation
        c = c0(ctx, t, J_out, prec=min(ctx_prec, ctx.N + self.den))
        out = None
        # Horner in c0: sum_k f_k * phi(a_k) * c0^k
        for k in range(self.J - 1, -1, -1):
            if out is not None:
                out = out * c
            a = self.slots[k]
            if a:
                v, u = _unit_part(_fact(k), p)
                f = p ** (k - v) * pow(u, -1, mod)
                img = _frob_poly(ctx, self.level, a)
                term = _series_to_pd_int(ctx, t, [x * f for x in img], J_out, iprec)
                out = term if out is None else out + term
        if out is None:
            return PDElement(ctx, [()] * J_out, t, self.den, iprec - self.den,
                             min(self.tail, -self.den))
        out = PDElement(ctx, out.slots, t, self.den, min(iprec, out.prec) - self.den,
                        min(self.tail, -self.den))
        return out

    # conversions ------------------------------------------------------
    def to_fraction_poly(self) -> list[Fraction]:
        """The element as an exact rational polynomial in u_n (for oracles and display)."""
        ctx, p = self.ctx, self.ctx.p
        E = _poly.inflate(list(ctx.E_coeffs), p ** self.level)
        out: list[Fraction] = []
        Epow = [1]
        for k, a in enumerate(self.slots):
            if a:
                term = _exact_mul(a, Epow)
                scale = Fraction(1, _fact(k) * p ** self.den)
                if len(out) < len(term):
                    out.extend([Fraction(0)] * (len(term) - len(out)))
                for i, c in enumerate(term):
                    out[i] += c * scale
            Epow = _exact_mul(Epow, E)
        while out and out[-1] == 0:
            out.pop()
        return out


def _den_budget(ctx: PrecisionContext, J: int) -> int:
    return 4 * (legendre_valuation(max(J, 1), ctx.p) + ctx.N)


def _exact_mul(a, b) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _frob_poly(ctx: PrecisionContext, level: int, a) -> list[int]:
    """Coefficients of φ(a(u_n)) as a polynomial in the target-level variable."""
    if level >= 1:
        return list(a)
    return _poly.inflate(list(a), ctx.p)


def _expand_in_E(ctx, level, f, J, mod, factorial_weights):
    """Write f = sum_k b_k E^k (deg b_k < e p^n); return slots k! b_k or b_k."""
    L = ctx.slot_length(level)
    tail = ctx.E_sparse(level)
    slots = []
    rest = [c % mod for c in f]
    for k in range(J):
        if not rest:
            slots.append([])
            continue
        q, r = _poly.divmod_monic(rest, L, tail, mod)
        if factorial_weights and r:
            w = _fact(k) % mod
            r = _poly.reduce([c * w for c in r], mod)
        slots.append(r)
        rest = q
    return slots


def _carry(ctx, level, raw, mod):
    """Normalize slot polynomials of degree < 2L into the canonical form."""
    L = ctx.slot_length(level)
    tail = ctx.E_sparse(level)
    J = len(raw)
    out = []
    carry: list[int] = []
    for k in range(J):
        cur = _poly.add(raw[k], carry, mod) if carry else raw[k]
        if len(cur) > L:
            q, r = _poly.divmod_monic(cur, L, tail, mod)
            carry = [x * (k + 1) for x in q]
        else:
            r, carry = cur, []
        out.append(r)
    return out


def _series_to_pd_int(ctx, level, f, J, iprec) -> PDElement:
    mod = ctx.p ** iprec
    slots = _expand_in_E(ctx, level, f, J, mod, factorial_weights=True)
    # store with the integral precision; callers rescale
    return PDElement(ctx.with_(N=max(ctx.N, iprec)), slots, level, 0, iprec)


# ---------------------------------------------------------------------------
# Functional interface
# ---------------------------------------------------------------------------


def arithmetic(x, y, op: str):
    """Add, subtract or multiply two tower elements of the same level."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def include_up(x):
    return x.include_up()


def frobenius(x, J_out: int | None = None):
    if isinstance(x, PDElement):
        return x.frobenius(J_out)
    return x.frobenius()


def frobenius_inverse_frakS(g: SeriesElement) -> SeriesElement:
    return g.frobenius_inverse()


def z_element(ctx: PrecisionContext, n: int) -> SeriesElement:
    """z_n = E(u_0) E(u_1) ... E(u_{n-1}) written in u_n; z_0 = 1."""
    if n > ctx.depth:
        raise DepthExceeded(f"level {n} exceeds depth {ctx.depth}")
    out = SeriesElement.one(ctx, n)
    for k in range(n):
        out = out * SeriesElement(ctx, _poly.inflate(list(ctx.E_coeffs), ctx.p ** (n - k)), n)
    return out


def phi_E(ctx: PrecisionContext, level: int = 0) -> SeriesElement:
    """φ(E) = E(u_0^p) written in the level-n variable."""
    return SeriesElement(ctx, _poly.inflate(list(ctx.E_coeffs), ctx.p ** (level + 1)), level)


@lru_cache(maxsize=256)
def _c0_cached(ctx_key, level, J, prec):
    ctx = ctx_key
    p = ctx.p
    iprec = prec + 1
    mod = p ** iprec
    f = _poly.inflate(list(ctx.E_coeffs), p ** (level + 1))
    slots = _expand_in_E(ctx, level, f, J, mod, factorial_weights=True)
    if any(c % p for a in slots for c in a):
        raise AssertionError("φ(E) is not divisible by p in S")
    slots = [[c // p for c in a] for a in slots]
    return PDElement(ctx.with_(N=max(ctx.N, prec)), slots, level, 0, prec)


def c0(ctx: PrecisionContext, level: int = 0, J: int | None = None, prec: int | None = None):
    """c_0 = φ(E)/p, a unit of S, at the given level."""
    J = ctx.fil_window_at(level) if J is None else J
    prec = ctx.N if prec is None else prec
    out = _c0_cached(ctx, level, J, prec)
    if out.ctx is not ctx and prec <= ctx.N:
        out = PDElement(ctx, out.slots, level, 0, prec)
    return out


def lambda_unit(ctx: PrecisionContext, J: int | None = None, max_terms: int | None = None):
    """λ = ∏_{n≥0} φ^n(c_0) in S_0, truncated once φ^n(c_0) ≡ 1 in the window.

    Returns ``(lam, terms)`` with the number of factors actually used.
    """
    J = ctx.fil_window_at(0) if J is None else J
    factor = c0(ctx, 0, J)
    lam = PDElement.one(ctx, 0, J)
    terms = 0
    limit = max_terms if max_terms is not None else 64
    while terms < limit:
        if (factor - 1).is_zero():
            break
        lam = lam * factor
        terms += 1
        factor = factor.frobenius(J)
    return lam, terms


@dataclass(frozen=True)
class PDForm:
    """Divided-power canonical form: x = p^-den * sum_j a_j gamma_j(E)."""

    level: int
    coeffs: tuple[tuple[int, tuple[int, ...]], ...]
    den: int
    prec: int
    J: int

    def to_element(self, ctx: PrecisionContext) -> PDElement:
        slots = [()] * self.J
        for j, a in self.coeffs:
            slots[j] = a
        return PDElement(ctx, slots, self.level, self.den, self.prec)


def pd_canonical_form(x, claim: str | None = None) -> PDForm:
    """Divided-power coordinates of an element of S_n (or 𝔖_n, or S_n[1/p]).

    With ``claim="S"`` a denominator raises :class:`NotInS`.
    """
    if isinstance(x, SeriesElement):
        x = x.to_pd()
    if claim == "S" and x.den:
        raise NotInS(f"element has denominator p^{x.den}")
    coeffs = tuple((j, tuple(a)) for j, a in enumerate(x.slots) if a)
    return PDForm(x.level, coeffs, x.den, x.prec, x.J)


def fil_degree(x) -> int | float:
    """Largest i with x ∈ Fil^i S_n within the window (inf if zero there)."""
    if isinstance(x, SeriesElement):
        x = x.to_pd()
    if x.den:
        raise NotInS("filtration degree is defined for elements of S_n")
    return x.fil_degree()


class WeierstrassResult(NamedTuple):
    ok: bool
    quotient: SeriesElement
    remainder: SeriesElement


def weierstrass_divide(x: SeriesElement, m: int) -> WeierstrassResult:
    """Decide E^m | x in 𝔖_n; on success ``quotient * E^m == x``."""
    q, r = x.divmod_E(m)
    return WeierstrassResult(r.is_zero(), q, r)


class KeyADecomposition(NamedTuple):
    w: SeriesElement
    y: PDElement
    bound: int


def decompose_keyA(x: PDElement, i: int, J_out: int | None = None) -> KeyADecomposition:
    """Split φ(x) = w + y with w ∈ 𝔖_{n-1} and y ∈ Fil^{p b(i)} S_{n-1}.

    Each divided power E^j/j! maps to (E^p + p v)^j / j!; binomial terms with
    k >= j/(p-1) are integral polynomials and go to w, the rest are
    multiples of gamma_{p(j-k)} with j-k >= b(j) and go to y.
    """
    ctx, p = x.ctx, x.ctx.p
    if x.den:
        raise NotInS("decompose_keyA needs an element of S_n")
    if x.fil_degree() < i:
        raise NotInFil(f"element has filtration degree {x.fil_degree()} < {i}")
    t = max(x.level - 1, 0)
    bound = p * contraction_bound(i, p)
    J_out = max(ctx.fil_window_at(t), bound + 1) if J_out is None else J_out
    iprec = min(x.prec, x.tail + phi_precision_window(x.J, p))
    if iprec < 1:
        raise PrecisionExhausted("Frobenius image carries no p-adic digits")
    mod = p ** iprec
    sub_ctx = ctx if iprec <= ctx.N else ctx.with_(N=iprec)
    E_t = _poly.inflate(list(ctx.E_coeffs), p ** t)
    phiE = _poly.inflate(list(ctx.E_coeffs), p ** (t + 1))
    Ep = _poly.power(E_t, p, p ** (iprec + 1))
    v_poly = [(a - b) // p for a, b in zip(_pad(phiE, len(Ep)), _pad(Ep, len(phiE)))]
    v_poly = _poly.reduce(v_poly, mod)
    w: list[int] = []
    y = PDElement(sub_ctx, [()] * J_out, t, 0, iprec)
    v_pows = [[1]]
    Ep_pows = [[1]]
    for j, a in enumerate(x.slots):
        if not a:
            continue
        img = _frob_poly(ctx, x.level, a)
        while len(v_pows) <= j:
            v_pows.append(_poly.mul(v_pows[-1], v_poly, mod))
            Ep_pows.append(_poly.mul(Ep_pows[-1], Ep, mod))
        for k in range(j + 1):
            m = j - k
            if k * (p - 1) >= j:
                c = _padic_int(Fraction(p ** k, _fact(m) * _fact(k)), mod)
                term = _poly.mul(_poly.mul(img, v_pows[k], mod), Ep_pows[m], mod)
                w = _poly.add(w, [c * z for z in term], mod)
            elif p * m < J_out:
                c = _padic_int(Fraction(p ** k * _fact(p * m), _fact(m) * _fact(k)), mod)
                poly = _poly.mul(img, v_pows[k], mod)
                y = y._add_poly_gamma([c * z for z in poly], p * m)
    ws = SeriesElement(sub_ctx, w, t, iprec)
    if sub_ctx is not ctx:
        ws = SeriesElement(ctx, ws.coeffs, t, min(iprec, ctx.N))
        y = PDElement(ctx, y.slots, t, 0, min(iprec, ctx.N))
    return KeyADecomposition(ws, y, bound)


def _pad(a, n):
    return list(a) + [0] * (n - len(a))


def decompose_frakS_fil(x: PDElement):
    """x = w + y with w ∈ 𝔖_n and fil_degree(y) >= p."""
    return x.frakS_part(x.ctx.p)
