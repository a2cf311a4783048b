"""Nestable forward-mode automatic differentiation on scalars.

A jet of order k along a direction is realized as k nested first-order dual
numbers; mixed directions are realized by seeding a different direction at
each nesting level.  Order 0 is a plain ``float``, so order-0 arithmetic is
bitwise identical to double-precision arithmetic.

Alignment between operands of different nesting depth is structural: a value
of lower depth is treated as a constant with respect to all levels above its
own.  Seeding always adds levels outermost, so depths inside one evaluation
are consecutive and this rule is exact.
"""

import math

from .errors import DomainError

__all__ = [
    "Dual",
    "seed",
    "seed_multi",
    "value_of",
    "depth_of",
    "nth_tangent",
    "coefficients",
    "sinh",
    "cosh",
    "tanh",
    "exp",
    "ln",
    "sqrt",
    "powi",
]

_DIV_GUARD = 1e-300


def depth_of(x):
    """Nesting depth of a scalar: 0 for a plain float, k for k nested duals."""
    return x.d if isinstance(x, Dual) else 0


def value_of(x):
    """Collapse a (possibly nested) dual to its underlying value slot."""
    while isinstance(x, Dual):
        x = x.p
    return x


class Dual(object):
    """First-order dual number a + eps*b where eps**2 = 0.

    Slots p (primal) and t (tangent) may themselves hold Dual values; the
    cached depth d orders levels so that arithmetic between operands of
    unequal depth treats the shallower one as a constant.
    """

    __slots__ = ("p", "t", "d")

    def __init__(self, p, t):
        self.p = p
        self.t = t
        self.d = depth_of(p) + 1

    def __repr__(self):
        return f"Dual({self.p!r}, {self.t!r})"

    # -- ring operations -------------------------------------------------

    def __add__(self, o):
        od = depth_of(o)
        if od < self.d:
            return Dual(self.p + o, self.t)
        if od > self.d:
            return Dual(self + o.p, o.t)
        return Dual(self.p + o.p, self.t + o.t)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.p, -self.t)

    def __sub__(self, o):
        od = depth_of(o)
        if od < self.d:
            return Dual(self.p - o, self.t)
        if od > self.d:
            return Dual(self - o.p, -o.t)
        return Dual(self.p - o.p, self.t - o.t)

    def __rsub__(self, o):
        # o has depth < self.d here (otherwise o.__sub__ would have run).
        return Dual(o - self.p, -self.t)

    def __mul__(self, o):
        od = depth_of(o)
        if od < self.d:
            return Dual(self.p * o, self.t * o)
        if od > self.d:
            return Dual(self * o.p, self * o.t)
        return Dual(self.p * o.p, self.p * o.t + self.t * o.p)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if abs(value_of(o)) <= _DIV_GUARD:
            raise DomainError(f"division by {value_of(o)!r} inside guard band")
        od = depth_of(o)
        if od < self.d:
            return Dual(self.p / o, self.t / o)
        if od > self.d:
            q = self / o.p
            return Dual(q, -(q * o.t) / o.p)
        q = self.p / o.p
        return Dual(q, (self.t - q * o.t) / o.p)

    def __rtruediv__(self, o):
        if abs(value_of(self)) <= _DIV_GUARD:
            raise DomainError(f"division by {value_of(self)!r} inside guard band")
        q = o / self.p
        return Dual(q, -(q * self.t) / self.p)

    def __pow__(self, k):
        return powi(self, k)


def div(a, b):
    """Guarded division for floats and duals alike."""
    if abs(value_of(b)) <= _DIV_GUARD:
        raise DomainError(f"division by {value_of(b)!r} inside guard band")
    return a / b


def powi(x, k):
    """x**k for integer k; exponent 0 yields 1.0 exactly."""
    if not isinstance(k, int):
        raise TypeError(f"integer exponent required, got {type(k).__name__}")
    if k < 0:
        return 1.0 / powi(x, -k)
    out = 1.0
    base = x
    while k:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


# -- transcendental functions (dispatch on depth) -------------------------


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.p), cosh(x.p) * x.t)
    return math.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.p), sinh(x.p) * x.t)
    return math.cosh(x)


def tanh(x):
    if isinstance(x, Dual):
        tp = tanh(x.p)
        return Dual(tp, (1.0 - tp * tp) * x.t)
    return math.tanh(x)


def exp(x):
    if isinstance(x, Dual):
        ep = exp(x.p)
        return Dual(ep, ep * x.t)
    return math.exp(x)


def ln(x):
    if value_of(x) <= 0.0:
        raise DomainError(f"ln of non-positive value {value_of(x)!r}")
    if isinstance(x, Dual):
        return Dual(ln(x.p), x.t / x.p)
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        if value_of(x) <= 0.0:
            raise DomainError(
                f"sqrt of {value_of(x)!r} with derivatives requested"
            )
        s = sqrt(x.p)
        return Dual(s, x.t / (2.0 * s))
    if x < 0.0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


# -- seeding and extraction ----------------------------------------------


def seed_multi(point, directions):
    """Lift a coordinate tuple through one dual level per direction.

    ``directions`` lists coordinate indices, innermost level first; the last
    entry becomes the outermost (top) level.  Evaluating a function on the
    result and peeling k tangent slots from the top yields the mixed
    derivative along the last k directions.
    """
    m = len(point)
    for d_idx in directions:
        if not 0 <= d_idx < m:
            raise IndexError(
                f"direction index {d_idx} out of range for dimension {m}"
            )
    xs = [float(c) for c in point]
    for d_idx in directions:
        xs = [Dual(x, 1.0 if i == d_idx else 0.0) for i, x in enumerate(xs)]
    return tuple(xs)


def seed(point, index, order):
    """Seed all coordinates at ``point`` along one direction to ``order``.

    Returns one scalar per coordinate: plain floats at order 0, nested duals
    with a unit tangent on the seeded coordinate otherwise.
    """
    if not 0 <= order <= 3:
        raise ValueError(f"order must be in 0..3, got {order}")
    if order == 0:
        m = len(point)
        if not 0 <= index < m:
            raise IndexError(f"direction index {index} out of range for dimension {m}")
        return tuple(float(c) for c in point)
    return seed_multi(point, [index] * order)


def nth_tangent(x, k):
    """Peel k tangent slots from the top, then collapse to the value slot.

    With a full seeding of depth k this is the k-th directional (or mixed)
    derivative; a shallower constant contributes zero.
    """
    for _ in range(k):
        if isinstance(x, Dual):
            x = x.t
        else:
            return 0.0
    return value_of(x)


def coefficients(x, order):
    """Value and derivative coefficients [f, f', .., f^(order)] of a jet."""
    return [nth_tangent(x, k) for k in range(order + 1)]
