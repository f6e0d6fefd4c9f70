"""Dense integer polynomial kernels (coefficient lists, low degree first).

Multiplication uses Kronecker substitution into a single Python integer,
which is far faster than schoolbook loops once degrees reach the hundreds.
"""

from __future__ import annotations

_SCHOOLBOOK = 12


def trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def reduce(a, mod: int) -> list[int]:
    return trim([c % mod for c in a])


def add(a, b, mod: int) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return reduce(out, mod)


def sub(a, b, mod: int) -> list[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] -= c
    return reduce(out, mod)


def scale(a, c: int, mod: int) -> list[int]:
    return reduce([x * c for x in a], mod)


def mul(a, b, mod: int) -> list[int]:
    """Product of two nonnegative-coefficient polynomials reduced mod ``mod``."""
    if not a or not b:
        return []
    if min(len(a), len(b)) <= _SCHOOLBOOK:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return reduce(out, mod)
    a = [c % mod for c in a]
    b = [c % mod for c in b]
    bound = (mod - 1) ** 2 * min(len(a), len(b))
    nbytes = (bound.bit_length() + 8) // 8
    x = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in a), "little")
    y = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in b), "little")
    n = len(a) + len(b) - 1
    raw = (x * y).to_bytes(nbytes * n, "little")
    return trim([int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % mod
                 for i in range(n)])


def divmod_monic(f, lead_deg: int, tail: list[tuple[int, int]], mod: int):
    """Divide ``f`` by the monic polynomial ``u^lead_deg + sum c u^k``.

    ``tail`` is the sparse list of (k, c) with k < lead_deg.  Returns
    (quotient, remainder) as coefficient lists.
    """
    r = [c % mod for c in f]
    if len(r) <= lead_deg:
        return [], trim(r)
    q = [0] * (len(r) - lead_deg)
    for i in range(len(r) - 1, lead_deg - 1, -1):
        t = r[i] % mod
        if t:
            q[i - lead_deg] = t
            base = i - lead_deg
            for k, c in tail:
                r[base + k] = (r[base + k] - t * c) % mod
        r[i] = 0
    return trim(q), trim(r[:lead_deg])


def inflate(a, k: int) -> list[int]:
    """Substitute u -> u^k."""
    if k == 1 or not a:
        return list(a)
    out = [0] * ((len(a) - 1) * k + 1)
    out[::k] = a
    return out


def power(a, n: int, mod: int) -> list[int]:
    out = [1]
    base = list(a)
    while n:
        if n & 1:
            out = mul(out, base, mod)
        n >>= 1
        if n:
            base = mul(base, base, mod)
    return out


def series_inverse(a, length: int, mod: int) -> list[int]:
    """Inverse of a power series with unit constant term, modulo u^length."""
    inv0 = pow(a[0], -1, mod)
    out = [0] * length
    out[0] = inv0
    for n in range(1, length):
        s = 0
        for k in range(1, min(n, len(a) - 1) + 1):
            s += a[k] * out[n - k]
        out[n] = (-s * inv0) % mod
    return trim(out)
