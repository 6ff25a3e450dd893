"""Truncated power series in the formal parameter ℏ with generic coefficients."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence


class HSeries:
    """``Σ_{k≤order} c_k ℏ^k``; every operation discards terms beyond ``order``.

    Coefficients only need ``+``, unary ``-`` and a product.  The product may
    itself return an :class:`HSeries` (as the star product does); its orders
    are then added to the convolution index.
    """

    __slots__ = ("coeffs", "order", "zero")

    def __init__(self, coeffs: Sequence, order: int, zero=0):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        cs = list(coeffs)[: order + 1]
        cs += [zero] * (order + 1 - len(cs))
        self.coeffs = tuple(cs)
        self.order = order
        self.zero = zero

    @classmethod
    def constant(cls, c, order: int, zero=0) -> HSeries:
        return cls([c], order, zero)

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k <= self.order else self.zero

    def __iter__(self):
        return iter(self.coeffs)

    def _other(self, other) -> HSeries:
        if isinstance(other, HSeries):
            return other
        return HSeries([other], self.order, self.zero)

    def __add__(self, other) -> HSeries:
        other = self._other(other)
        n = min(self.order, other.order)
        return HSeries([self[k] + other[k] for k in range(n + 1)], n, self.zero)

    __radd__ = __add__

    def __neg__(self) -> HSeries:
        return HSeries([-c for c in self.coeffs], self.order, self.zero)

    def __sub__(self, other) -> HSeries:
        return self + (-self._other(other))

    def __rsub__(self, other) -> HSeries:
        return self._other(other) - self

    def mul(self, other, product: Callable | None = None) -> HSeries:
        other = self._other(other)
        n = min(self.order, other.order)
        prod = product or (lambda a, b: a * b)
        out = [self.zero] * (n + 1)
        for i in range(n + 1):
            a = self[i]
            for j in range(n + 1 - i):
                r = prod(a, other[j])
                if isinstance(r, HSeries):
                    for k in range(min(r.order, n - i - j) + 1):
                        out[i + j + k] = out[i + j + k] + r[k]
                else:
                    out[i + j] = out[i + j] + r
        return HSeries(out, n, self.zero)

    def __mul__(self, other) -> HSeries:
        return self.mul(other)

    __rmul__ = __mul__

    def map(self, f: Callable) -> HSeries:
        return HSeries([f(c) for c in self.coeffs], self.order, f(self.zero))

    def truncate(self, order: int) -> HSeries:
        return HSeries(self.coeffs, min(order, self.order), self.zero)

    def shifted(self, k: int) -> HSeries:
        """Multiply by ℏ^k."""
        return HSeries([self.zero] * k + list(self.coeffs), self.order, self.zero)

    def nonzero_orders(self, is_zero: Callable | None = None) -> list[int]:
        test = is_zero or (lambda c: c == self.zero)
        return [k for k, c in enumerate(self.coeffs) if not test(c)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, HSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self) -> str:
        terms = [f"({c})*h^{k}" for k, c in enumerate(self.coeffs) if c != self.zero]
        return f"HSeries[{self.order}](" + (" + ".join(terms) or "0") + ")"


def series_sum(items: Iterable[HSeries], order: int, zero=0) -> HSeries:
    out = HSeries([], order, zero)
    for s in items:
        out = out + s
    return out
