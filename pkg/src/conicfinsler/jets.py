"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds the Taylor coefficients, up to a total degree ``order``,
of a (possibly array-valued, possibly complex) function of ``nvars`` real
variables around a base point.  It is the higher-order generalisation of a
dual number: arithmetic on jets propagates every partial derivative up to the
truncation degree exactly (to rounding), and :meth:`Jet.deriv` turns a jet of
order ``k`` into the jet of a partial derivative, of order ``k - 1``.

Coefficients are stored in the last axis, graded by total degree, so a jet of
order ``k`` only ever carries ``C(k + nvars, nvars)`` numbers; mixing jets of
different orders truncates to the smaller one.

Leading axes are broadcast like numpy arrays, which is how points are batched
and how vectors and matrices of jets are represented.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Sequence

import numpy as np


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = [a for a in itertools.product(range(degree + 1), repeat=nvars) if sum(a) == degree]
    return sorted(out, reverse=True)


class JetSpace:
    """Index tables for jets in ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.index: list[tuple[int, ...]] = []
        self.ncoef: list[int] = []
        for d in range(order + 1):
            self.index.extend(_monomials(nvars, d))
            self.ncoef.append(len(self.index))
        self.lookup = {a: i for i, a in enumerate(self.index)}
        self._mul: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._der: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def mul_table(self, k: int):
        if k not in self._mul:
            left, right, starts = [], [], []
            for c in range(self.ncoef[k]):
                gamma = self.index[c]
                starts.append(len(left))
                for alpha in itertools.product(*(range(g + 1) for g in gamma)):
                    beta = tuple(g - a for g, a in zip(gamma, alpha))
                    left.append(self.lookup[alpha])
                    right.append(self.lookup[beta])
            self._mul[k] = (np.array(left), np.array(right), np.array(starts))
        return self._mul[k]

    def deriv_table(self, k: int, var: int):
        """Source indices and factors for d/dx_var, from order k to k - 1."""
        key = (k, var)
        if key not in self._der:
            src, fac = [], []
            for alpha in self.index[: self.ncoef[k - 1]]:
                up = list(alpha)
                up[var] += 1
                src.append(self.lookup[tuple(up)])
                fac.append(up[var])
            self._der[key] = (np.array(src), np.array(fac, dtype=float))
        return self._der[key]


@functools.lru_cache(maxsize=None)
def space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


class Jet:
    """Truncated Taylor expansion; see the module docstring."""

    __array_ufunc__ = None  # make ndarray (op) Jet defer to the reflected Jet method

    __slots__ = ("space", "coef", "order")

    def __init__(self, space: JetSpace, coef: np.ndarray, order: int):
        self.space = space
        self.order = order
        self.coef = coef

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, sp: JetSpace, value, order: int | None = None) -> "Jet":
        order = sp.order if order is None else order
        value = np.asarray(value)
        coef = np.zeros(value.shape + (sp.ncoef[order],), dtype=np.result_type(value, float))
        coef[..., 0] = value
        return cls(sp, coef, order)

    @classmethod
    def variables(cls, sp: JetSpace, point: Sequence, order: int | None = None) -> list["Jet"]:
        """One jet per coordinate, expanded around ``point`` (arrays broadcast)."""
        order = sp.order if order is None else order
        point = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in point])
        out = []
        for i, p in enumerate(point):
            j = cls.constant(sp, p, order)
            if order >= 1:
                j.coef[..., 1 + i] = 1.0
            out.append(j)
        return out

    # -- introspection ------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.coef[..., 0]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.space, self.coef[..., : self.space.ncoef[order]], order)

    def derivative_value(self, alpha: Sequence[int]) -> np.ndarray:
        """Partial derivative d^alpha at the base point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError("derivative beyond the jet order")
        scale = math.prod(math.factorial(a) for a in alpha)
        return self.coef[..., self.space.lookup[alpha]] * scale

    # -- calculus -----------------------------------------------------------
    def deriv(self, var: int) -> "Jet":
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = self.space.deriv_table(self.order, var)
        return Jet(self.space, self.coef[..., src] * fac, self.order - 1)

    def grad(self) -> "Jet":
        """Gradient as a jet with a trailing axis of length nvars."""
        return stack([self.deriv(i) for i in range(self.space.nvars)], axis=-1)

    # -- array-like plumbing -------------------------------------------------
    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.space, self.coef[key + (slice(None),)], self.order)

    def __len__(self) -> int:
        return self.shape[0]

    def sum(self, axis: int = -1) -> "Jet":
        return Jet(self.space, self.coef.sum(axis=_coef_axis(axis, len(self.shape))), self.order)

    def reshape(self, *shape) -> "Jet":
        return Jet(self.space, self.coef.reshape(*shape, self.coef.shape[-1]), self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.space, self.coef.real, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.space, self.coef.imag, self.order)

    def conj(self) -> "Jet":
        return Jet(self.space, self.coef.conj(), self.order)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, value={self.value!r})"

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, None

    def __neg__(self):
        return Jet(self.space, -self.coef, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.space, a.coef + b.coef, a.order)
        other = np.asarray(other)
        shape = np.broadcast_shapes(a.shape, other.shape)
        coef = np.broadcast_to(a.coef, shape + a.coef.shape[-1:]).astype(
            np.result_type(a.coef, other), copy=True)
        coef[..., 0] += other
        return Jet(a.space, coef, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            other = np.asarray(other)
            return Jet(a.space, a.coef * other[..., None], a.order)
        left, right, starts = a.space.mul_table(a.order)
        prod = a.coef[..., left] * b.coef[..., right]
        return Jet(a.space, np.add.reduceat(prod, starts, axis=-1), a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)) and n >= 0:
            out = Jet.constant(self.space, np.ones(self.shape, dtype=self.coef.dtype), self.order)
            base = self
            while n:
                if n & 1:
                    out = out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        if n == 0.5:
            return sqrt(self)
        raise NotImplementedError("only non-negative integer powers and 0.5")


def _coef_axis(axis: int, ndim: int) -> int:
    return axis - 1 if axis < 0 else axis


def _compose(x: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """f(x) from the Taylor coefficients f^(m)(x0)/m!, m = 0..order (Horner in x - x0)."""
    h = Jet(x.space, x.coef.copy(), x.order)
    h.coef[..., 0] = 0
    out = Jet.constant(x.space, derivs[x.order], x.order)
    for m in range(x.order - 1, -1, -1):
        out = h * out + derivs[m]
    return out


def reciprocal(x: Jet) -> Jet:
    c0 = x.value
    inv = 1.0 / c0
    return _compose(x, [(-1.0) ** m * inv ** (m + 1) for m in range(x.order + 1)])


def sqrt(x):
    """Principal square root (cut along the negative real axis)."""
    if not isinstance(x, Jet):
        return np.sqrt(x)
    c0 = x.value
    r = np.sqrt(c0)
    inv = 1.0 / c0
    coefs = []
    for m in range(x.order + 1):
        binom = math.prod(0.5 - j for j in range(m)) / math.factorial(m)
        coefs.append(binom * r * inv ** m)
    return _compose(x, coefs)


def log(x):
    """Principal logarithm; the branch only affects the constant coefficient."""
    if not isinstance(x, Jet):
        return np.log(x)
    c0 = x.value
    coefs = [np.log(c0)] + [(-1.0) ** (m + 1) / (m * c0 ** m) for m in range(1, x.order + 1)]
    return _compose(x, coefs)


def angle(x, y):
    """atan2(y, x) for real jets."""
    if not isinstance(x, Jet) and not isinstance(y, Jet):
        return np.arctan2(y, x)
    return imag(log(x + 1j * y))


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e = np.exp(x.value)
    return _compose(x, [e / math.factorial(m) for m in range(x.order + 1)])


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    c, s = np.cos(x.value), np.sin(x.value)
    cyc = [c, -s, -c, s]
    return _compose(x, [cyc[m % 4] / math.factorial(m) for m in range(x.order + 1)])


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    c, s = np.cos(x.value), np.sin(x.value)
    cyc = [s, c, -s, -c]
    return _compose(x, [cyc[m % 4] / math.factorial(m) for m in range(x.order + 1)])


def real(x):
    return x.real if isinstance(x, Jet) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Jet) else np.imag(x)


def stack(items: Sequence, axis: int = -1):
    """np.stack for jets (and plain arrays); ``axis`` refers to the value shape."""
    jets = [i for i in items if isinstance(i, Jet)]
    if not jets:
        return np.stack([np.asarray(i) for i in items], axis=axis)
    sp = jets[0].space
    k = min(j.order for j in jets)
    coefs = []
    for i in items:
        if not isinstance(i, Jet):
            i = Jet.constant(sp, i, k)
        coefs.append(i.truncate(k).coef)
    coefs = np.broadcast_arrays(*coefs)
    ndim = coefs[0].ndim - 1
    ax = axis if axis >= 0 else ndim + 1 + axis
    return Jet(sp, np.stack(coefs, axis=ax), k)


def matvec(m: np.ndarray, v):
    """Constant matrix (..., n, k) times vector (..., k)."""
    if isinstance(v, Jet):
        return Jet(v.space, np.einsum("...ij,...jc->...ic", m, v.coef), v.order)
    return np.einsum("...ij,...j->...i", m, v)


def dot(a, b):
    return (a * b).sum(axis=-1)


def cross(a, b):
    a = a if isinstance(a, Jet) else np.asarray(a)
    b = b if isinstance(b, Jet) else np.asarray(b)
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    return stack([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx], axis=-1)


def det3(m):
    """Determinant of a (..., 3, 3) jet or array."""
    if not isinstance(m, Jet):
        return np.linalg.det(m)
    return dot(m[..., 0, :], cross(m[..., 1, :], m[..., 2, :]))


def inv3(m):
    """Inverse of a (..., 3, 3) jet by the adjugate formula."""
    if not isinstance(m, Jet):
        return np.linalg.inv(m)
    r0, r1, r2 = m[..., 0, :], m[..., 1, :], m[..., 2, :]
    c0, c1, c2 = cross(r1, r2), cross(r2, r0), cross(r0, r1)
    inv_det = reciprocal(dot(r0, c0))
    cols = stack([c0, c1, c2], axis=-1)  # columns of the inverse
    return cols * _expand(inv_det, 2)


def _expand(x: Jet, n: int) -> Jet:
    coef = x.coef
    for _ in range(n):
        coef = coef[..., None, :]
    return Jet(x.space, coef, x.order)


def expand_dims(x, n: int = 1):
    """Append ``n`` singleton value axes (for broadcasting scalars against vectors)."""
    if isinstance(x, Jet):
        return _expand(x, n)
    x = np.asarray(x)
    return x.reshape(x.shape + (1,) * n)


def value(x) -> np.ndarray:
    return x.value if isinstance(x, Jet) else np.asarray(x)
