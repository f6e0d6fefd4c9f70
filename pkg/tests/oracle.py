"""Naive rational oracle for the tower rings.

A rational polynomial is a pair ``(coeffs, den)`` of integer coefficients and a
positive integer denominator.  Nothing here reuses the library's kernels:
E-adic expansions come from plain long division by the monic E, factorials
from math.factorial.
"""

from __future__ import annotations

import math


def vp(n: int, p: int) -> float:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def const(c: int):
    return trim([c]), 1


def poly(coeffs, den=1):
    return trim(coeffs), den


def _add_int(a, b):
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _mul_int(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def add(f, g):
    (a, da), (b, db) = f, g
    d = da * db // math.gcd(da, db)
    return _add_int([x * (d // da) for x in a], [x * (d // db) for x in b]), d


def neg(f):
    return [-x for x in f[0]], f[1]


def sub(f, g):
    return add(f, neg(g))


def mul(f, g):
    return trim(_mul_int(f[0], g[0])), f[1] * g[1]


def power(f, k):
    out = ([1], 1)
    for _ in range(k):
        out = mul(out, f)
    return out


def substitute_power(f, k):
    """u -> u^k."""
    a, d = f
    if not a:
        return [], d
    out = [0] * ((len(a) - 1) * k + 1)
    for i, x in enumerate(a):
        out[i * k] = x
    return out, d


def E_at(E_coeffs, p, level):
    """Integer coefficients of E(u^(p^level))."""
    return substitute_power((list(E_coeffs), 1), p ** level)[0]


def divmod_int(a, g):
    """Long division of an integer polynomial by a monic integer g."""
    a = list(a)
    dg = len(g) - 1
    if len(a) <= dg:
        return [], trim(a)
    q = [0] * (len(a) - dg)
    for i in range(len(a) - 1, dg - 1, -1):
        c = a[i]
        if c:
            q[i - dg] = c
            for k in range(dg + 1):
                a[i - dg + k] -= c * g[k]
    return trim(q), trim(a[:dg])


def divmod_poly(f, g):
    q, r = divmod_int(f[0], g)
    return (q, f[1]), (r, f[1])


def e_adic(a, E):
    """Integer digits d_k with a = sum_k d_k E^k, deg d_k < deg E."""
    out = []
    rest = trim(a)
    while rest:
        rest, r = divmod_int(rest, E)
        out.append(r)
    return out


def from_slots(slots, den, p, E):
    """p^-den sum_k a_k E^k / k! as a rational polynomial."""
    D = math.factorial(max(len(slots) - 1, 0)) * p ** den
    out, Epow = [], [1]
    for k, a in enumerate(slots):
        if a:
            scale = D // (math.factorial(k) * p ** den)
            out = _add_int(out, [scale * x for x in _mul_int(list(a), Epow)])
        Epow = _mul_int(Epow, E)
    return out, D


def lib_value(x, E):
    return from_slots(x.slots, x.den, x.ctx.p, E)


def agrees(f, lib, p, E):
    """Does the rational polynomial f match a library PDElement in its window?

    The difference must lie in p^prec S + Fil^J: its E-adic digits d_k for k < J
    must satisfy v_p(k! d_k) >= prec.
    """
    diff, D = sub(f, lib_value(lib, E))
    vD = vp(D, p)
    for k, d in enumerate(e_adic(diff, E)):
        if k >= lib.J:
            break
        vk = vp(math.factorial(k), p)
        for c in d:
            if vp(c, p) + vk - vD < lib.prec:
                return False
    return True


def frobenius(f, p, level):
    """φ on a rational polynomial: renaming for level >= 1, u -> u^p at level 0."""
    return f if level >= 1 else substitute_power(f, p)


def include_up(f, p):
    return substitute_power(f, p)
