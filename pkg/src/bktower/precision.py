"""Integer valuations, Legendre-type bounds and the precision context.

Everything here is exact integer arithmetic.  The contraction sequences
computed at the bottom of the module drive every filtration bound used by
the descent algorithms in :mod:`bktower.limit`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, NamedTuple, Sequence

from .errors import ConfigInvalid, HeightTooLarge

__all__ = [
    "vp",
    "digit_sum",
    "legendre_valuation",
    "contraction_bound",
    "contraction_sequence",
    "pd_term_valuation",
    "phi_precision_window",
    "PadicCoeff",
    "PrecisionContext",
]


def vp(n: int, p: int) -> int | float:
    """p-adic valuation of an integer; ``math.inf`` for zero."""
    if n == 0:
        return math.inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def digit_sum(n: int, p: int) -> int:
    s = 0
    while n:
        n, d = divmod(n, p)
        s += d
    return s


def legendre_valuation(n: int, p: int) -> int:
    """v_p(n!) = (n - s_p(n)) / (p - 1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (n - digit_sum(n, p)) // (p - 1)


def contraction_bound(i: int, p: int) -> int:
    """ceil(i (p-2) / (p-1)) in integer arithmetic."""
    if i < 0:
        raise ValueError("i must be nonnegative")
    return -((-i * (p - 2)) // (p - 1))


def contraction_sequence(kind: str, p: int, r: int = 0, n_max: int = 5) -> list[int]:
    """Filtration bounds along the tower.

    ``frobcomp`` returns ``i_0, ..., i_{n_max}`` with ``i_0 = p`` and
    ``i_n = p*b(i_{n-1})``.  ``keyb`` returns ``j_1, ..., j_{n_max}`` with
    ``j_1 = p`` and ``j_n = p*b(j_{n-1}) - r``.
    """
    if kind == "frobcomp":
        seq = [p]
        for _ in range(n_max):
            seq.append(p * contraction_bound(seq[-1], p))
        return seq
    if kind == "keyb":
        if not 0 <= r < p - 1:
            raise HeightTooLarge(f"height r={r} must satisfy 0 <= r < p-1 = {p - 1}")
        if n_max < 1:
            return []
        seq = [p]
        for _ in range(n_max - 1):
            seq.append(p * contraction_bound(seq[-1], p) - r)
        return seq
    raise ValueError(f"unknown contraction sequence {kind!r}")


class TermValuation(NamedTuple):
    valuation: int
    in_frakS: bool


def pd_term_valuation(j: int, k: int, p: int) -> TermValuation:
    """Valuation of p^k / ((j-k)! k!) and whether the term is sorted into
    the integral part of the Frobenius split (``k*(p-1) >= j``)."""
    if not 0 <= k <= j:
        raise ValueError("need 0 <= k <= j")
    v = k - legendre_valuation(j - k, p) - legendre_valuation(k, p)
    return TermValuation(v, k * (p - 1) >= j)


@lru_cache(maxsize=None)
def phi_precision_window(J: int, p: int) -> int:
    """min_{j >= J} (j - v_p(j!)): the p-adic valuation guaranteed for the
    Frobenius image of anything in Fil^J."""
    # j - v_p(j!) >= (j(p-2)+1)/(p-1) grows, so a finite scan suffices.
    best = J - legendre_valuation(J, p)
    j = J
    while (j * (p - 2) + 1) / (p - 1) < best:
        j += 1
        best = min(best, j - legendre_valuation(j, p))
    return best


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class PrecisionContext:
    """Global parameters: prime, Eisenstein polynomial, precisions, depth.

    ``E_coeffs`` lists the coefficients of E from the constant term up, so
    ``E = u + 3`` is ``(3, 1)``.  ``N`` is the absolute p-adic precision in
    digits, ``M`` the base u-adic cutoff (``M * p**n`` at level n) used for
    power-series truncation in the Kisin rings, and ``fil_window`` the number
    of divided-power slots kept for elements of S_n.
    """

    p: int
    E_coeffs: tuple[int, ...]
    N: int = 8
    M: int = 27
    depth: int = 3
    fil_window: int | None = None
    fil_windows: Mapping[int, int] = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "E_coeffs", tuple(int(c) for c in self.E_coeffs))
        p, E = self.p, self.E_coeffs
        if p < 3 or not _is_prime(p):
            raise ConfigInvalid(f"p={p} must be an odd prime")
        if len(E) < 2 or E[-1] != 1:
            raise ConfigInvalid("E must be monic of degree >= 1")
        if E[0] != p:
            raise ConfigInvalid(f"E must have constant term exactly p={p}, got {E[0]}")
        if any(c % p for c in E[1:-1]):
            raise ConfigInvalid("non-leading coefficients of E must be divisible by p")
        if self.N < 2:
            raise ConfigInvalid("N must be at least 2")
        if self.M < 1:
            raise ConfigInvalid("M must be positive")
        if self.depth < 0:
            raise ConfigInvalid("depth must be nonnegative")
        if self.fil_window is not None and self.fil_window < 2:
            raise ConfigInvalid("fil_window must be at least 2")
        object.__setattr__(self, "fil_windows", dict(self.fil_windows))

    @classmethod
    def from_string(cls, p: int, E: str, **kw) -> "PrecisionContext":
        """Build a context from ``E`` written like ``"u^2+5"`` or ``"u + 3"``."""
        return cls(p, parse_polynomial(E), **kw)

    @property
    def e(self) -> int:
        return len(self.E_coeffs) - 1

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def slot_length(self, n: int) -> int:
        """Degree bound e*p^n of divided-power coefficients at level n."""
        return self.e * self.p ** n

    def u_cutoff(self, n: int) -> int:
        return self.M * self.p ** n

    @property
    def j_crit(self) -> int:
        """Smallest window J for which Frobenius keeps all N digits."""
        J = 1
        while phi_precision_window(J, self.p) < self.N:
            J += 1
        return J

    def fil_window_at(self, n: int) -> int:
        if n in self.fil_windows:
            return self.fil_windows[n]
        if self.fil_window is not None:
            return self.fil_window
        return max(self.j_crit, 2 * self.p + 1)

    def E_sparse(self, n: int) -> list[tuple[int, int]]:
        """Nonzero terms (degree, coefficient) of E(u_n^{p^n}), excluding the leading one."""
        q = self.p ** n
        return [(i * q, c) for i, c in enumerate(self.E_coeffs[:-1]) if c]

    def check_height(self, r: int) -> None:
        if not 0 <= r < self.p - 1:
            raise HeightTooLarge(f"height r={r} must satisfy 0 <= r < p-1 = {self.p - 1}")

    def with_(self, **kw) -> "PrecisionContext":
        data = dict(p=self.p, E_coeffs=self.E_coeffs, N=self.N, M=self.M, depth=self.depth,
                    fil_window=self.fil_window, fil_windows=dict(self.fil_windows))
        data.update(kw)
        return PrecisionContext(**data)

    def as_dict(self) -> dict:
        return {"p": self.p, "e": self.e, "E": list(self.E_coeffs), "N": self.N,
                "M": self.M, "depth": self.depth}


def parse_polynomial(text: str, var: str = "u") -> tuple[int, ...]:
    """Parse an integer polynomial such as ``"u^2 + 5"`` into low-to-high coefficients."""
    s = text.replace(" ", "").replace("**", "^").replace("-", "+-")
    coeffs: dict[int, int] = {}
    for term in filter(None, s.split("+")):
        if var in term:
            c, _, power = term.partition(var)
            c = c.rstrip("*")
            c = 1 if c in ("", "+") else (-1 if c == "-" else int(c))
            power = power.lstrip("^")
            deg = int(power) if power else 1
        else:
            c, deg = int(term), 0
        coeffs[deg] = coeffs.get(deg, 0) + c
    if not coeffs:
        raise ConfigInvalid(f"cannot parse polynomial {text!r}")
    top = max(coeffs)
    return tuple(coeffs.get(i, 0) for i in range(top + 1))


@dataclass(frozen=True)
class PadicCoeff:
    """Element of Q_p as p^val * unit with ``prec`` relative digits.

    ``val is None`` encodes zero (valuation +infinity).  For nonzero values
    the unit is invertible mod p, so the valuation is exact.
    """

    p: int
    val: int | None
    unit: int
    prec: int

    def __post_init__(self):
        if self.val is None:
            object.__setattr__(self, "unit", 0)
        elif self.unit % self.p == 0:
            raise ValueError("unit part must be prime to p")
        else:
            object.__setattr__(self, "unit", self.unit % self.p ** self.prec)

    @classmethod
    def from_rational(cls, x, p: int, prec: int) -> "PadicCoeff":
        x = Fraction(x)
        if x == 0:
            return cls(p, None, 0, prec)
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p ** prec
        return cls(p, v, num * pow(den, -1, mod) % mod, prec)

    @classmethod
    def zero(cls, p: int, prec: int) -> "PadicCoeff":
        return cls(p, None, 0, prec)

    @property
    def valuation(self) -> int | float:
        return math.inf if self.val is None else self.val

    def is_zero(self) -> bool:
        return self.val is None

    def to_fraction(self) -> Fraction:
        if self.val is None:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def _absolute(self) -> int | float:
        return math.inf if self.val is None else self.val + self.prec

    def _combine(self, value: Fraction, abs_prec) -> "PadicCoeff":
        if value == 0:
            return PadicCoeff.zero(self.p, self.prec)
        out = PadicCoeff.from_rational(value, self.p, self.prec)
        if abs_prec is math.inf:
            return out
        rel = abs_prec - out.val
        if rel <= 0:
            return PadicCoeff.zero(self.p, self.prec)
        return PadicCoeff.from_rational(value, self.p, min(rel, self.prec))

    def __add__(self, other: "PadicCoeff") -> "PadicCoeff":
        if self.val is None:
            return other
        if other.val is None:
            return self
        return self._combine(self.to_fraction() + other.to_fraction(),
                             min(self._absolute(), other._absolute()))

    def __neg__(self) -> "PadicCoeff":
        if self.val is None:
            return self
        return PadicCoeff(self.p, self.val, -self.unit, self.prec)

    def __sub__(self, other: "PadicCoeff") -> "PadicCoeff":
        return self + (-other)

    def __mul__(self, other: "PadicCoeff") -> "PadicCoeff":
        if self.val is None or other.val is None:
            return PadicCoeff.zero(self.p, min(self.prec, other.prec))
        prec = min(self.prec, other.prec)
        return PadicCoeff(self.p, self.val + other.val, self.unit * other.unit, prec)

    def __truediv__(self, other: "PadicCoeff") -> "PadicCoeff":
        if other.val is None:
            raise ZeroDivisionError("division by p-adic zero")
        if self.val is None:
            return self
        prec = min(self.prec, other.prec)
        mod = self.p ** prec
        return PadicCoeff(self.p, self.val - other.val, self.unit * pow(other.unit, -1, mod), prec)

    def agrees_with(self, x) -> bool:
        """True when the rational ``x`` lies in this coefficient's precision ball."""
        diff = Fraction(x) - self.to_fraction()
        if diff == 0:
            return True
        return vp(diff.numerator, self.p) - vp(diff.denominator, self.p) >= self._absolute()
