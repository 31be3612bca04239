"""Forward-mode dual numbers with a fixed-width tangent block.

A :class:`Dual` carries a numpy value together with ``TANGENT_WIDTH``
directional derivatives (one per trainable circuit parameter).  Plain
numpy arrays and Duals flow through the same simulator code; the module
functions (``exp``, ``sqrt``, ``matmul``, ``expm``, ...) dispatch on the
operand type so the value arithmetic of a Dual evaluation is exactly the
plain-mode arithmetic.

Derivatives are with respect to real parameters, so ``conj`` and ``real``
act componentwise on the tangent as well.
"""

from __future__ import annotations

import numpy as np

TANGENT_WIDTH = 8


def _pad_tan(tan: np.ndarray, target_ndim: int) -> np.ndarray:
    """Insert broadcast axes after the tangent axis so trailing dims align."""
    pad = target_ndim - (tan.ndim - 1)
    if pad > 0:
        tan = tan.reshape(tan.shape[:1] + (1,) * pad + tan.shape[1:])
    return tan


class Dual:
    """Value plus TANGENT_WIDTH directional derivatives.

    ``tan`` always has shape ``(TANGENT_WIDTH,) + shape(val)``.
    Arithmetic broadcasts exactly like numpy on the value part.
    """

    __slots__ = ("val", "tan")

    # Make numpy defer to the reflected operators below instead of
    # coercing a Dual into an object array.
    __array_ufunc__ = None

    def __init__(self, val, tan):
        self.val = np.asarray(val)
        self.tan = np.asarray(tan)
        if self.tan.shape != (TANGENT_WIDTH,) + self.val.shape:
            raise ValueError(
                f"tangent shape {self.tan.shape} does not match value shape {self.val.shape}"
            )

    @classmethod
    def seed(cls, value: float, direction: int) -> "Dual":
        """Scalar dual with a unit tangent along one parameter direction."""
        tan = np.zeros(TANGENT_WIDTH)
        tan[direction] = 1.0
        return cls(np.asarray(float(value)), tan)

    @classmethod
    def constant(cls, value) -> "Dual":
        val = np.asarray(value)
        return cls(val, np.zeros((TANGENT_WIDTH,) + val.shape, dtype=val.dtype))

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    @property
    def real(self) -> "Dual":
        return Dual(self.val.real, self.tan.real)

    @property
    def imag(self) -> "Dual":
        return Dual(self.val.imag, self.tan.imag)

    def conj(self) -> "Dual":
        return Dual(self.val.conj(), self.tan.conj())

    def __repr__(self):
        return f"Dual(val={self.val!r})"

    # -- arithmetic ------------------------------------------------------

    def __neg__(self):
        return Dual(-self.val, -self.tan)

    def __add__(self, other):
        if isinstance(other, Dual):
            val = self.val + other.val
            tan = _pad_tan(self.tan, val.ndim) + _pad_tan(other.tan, val.ndim)
            return Dual(val, np.broadcast_to(tan, (TANGENT_WIDTH,) + val.shape))
        other = np.asarray(other)
        val = self.val + other
        tan = np.broadcast_to(_pad_tan(self.tan, val.ndim), (TANGENT_WIDTH,) + val.shape)
        return Dual(val, tan)

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-other if isinstance(other, Dual) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self).__add__(np.asarray(other))

    def __mul__(self, other):
        if isinstance(other, Dual):
            val = self.val * other.val
            tan = (
                _pad_tan(self.tan, val.ndim) * other.val
                + _pad_tan(other.tan, val.ndim) * self.val
            )
            return Dual(val, tan)
        other = np.asarray(other)
        val = self.val * other
        return Dual(val, _pad_tan(self.tan, val.ndim) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            val = self.val / other.val
            tan = (
                _pad_tan(self.tan, val.ndim) * other.val
                - _pad_tan(other.tan, val.ndim) * self.val
            ) / (other.val * other.val)
            return Dual(val, tan)
        other = np.asarray(other)
        val = self.val / other
        return Dual(val, _pad_tan(self.tan, val.ndim) / other)

    def __rtruediv__(self, other):
        other = np.asarray(other)
        val = other / self.val
        tan = -_pad_tan(self.tan, val.ndim) * other / (self.val * self.val)
        return Dual(val, tan)

    def __pow__(self, n):
        v = self.val**n
        g = n * self.val ** (np.asarray(n) - 1)
        return Dual(v, _pad_tan(self.tan, v.ndim) * g)

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Dual(self.val[key], self.tan[(slice(None),) + key])


def is_dual(x) -> bool:
    return isinstance(x, Dual)


def value(x):
    """Strip the tangent; identity on plain values."""
    return x.val if isinstance(x, Dual) else x


def _lift(fn, dfn):
    """Elementwise function with derivative ``dfn(value)``."""

    def wrapped(x):
        if isinstance(x, Dual):
            v = fn(x.val)
            return Dual(v, dfn(x.val) * x.tan)
        return fn(x)

    return wrapped


exp = _lift(np.exp, np.exp)
sin = _lift(np.sin, np.cos)
cos = _lift(np.cos, lambda v: -np.sin(v))
tanh = _lift(np.tanh, lambda v: 1.0 / np.cosh(v) ** 2)
cosh = _lift(np.cosh, np.sinh)
sqrt = _lift(np.sqrt, lambda v: 0.5 / np.sqrt(v))
log = _lift(np.log, lambda v: 1.0 / v)


def conj(x):
    return x.conj() if isinstance(x, Dual) else np.conj(x)


def real(x):
    return x.real if isinstance(x, Dual) else np.real(x)


def abs2(x):
    """|x|^2 as a real quantity (real dual in gradient mode)."""
    return real(x * conj(x))


def asum(x, axis=None):
    """Sum over value axes (never over the tangent axis)."""
    if isinstance(x, Dual):
        if axis is None:
            return Dual(x.val.sum(), x.tan.reshape(TANGENT_WIDTH, -1).sum(axis=1))
        return Dual(x.val.sum(axis=axis), x.tan.sum(axis=axis + 1 if axis >= 0 else axis))
    return np.sum(x, axis=axis)


def stack(items):
    """Build a vector from scalars, promoting to Dual if any item is one."""
    if any(isinstance(x, Dual) for x in items):
        vals = np.array([value(x) for x in items])
        dtype = np.result_type(
            vals.dtype, *(x.tan.dtype for x in items if isinstance(x, Dual))
        )
        tans = np.zeros((TANGENT_WIDTH, len(items)), dtype=dtype)
        for i, x in enumerate(items):
            if isinstance(x, Dual):
                tans[:, i] = x.tan
        return Dual(vals.astype(dtype, copy=False), tans)
    return np.array(items)


def outer(a, b):
    """Outer product of two vectors, either plain or dual."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.outer(a, b)
    av, bv = value(a), value(b)
    val = np.outer(av, bv)
    tan = np.zeros((TANGENT_WIDTH,) + val.shape, dtype=np.result_type(val, np.complex128))
    if isinstance(a, Dual):
        tan += a.tan[:, :, None] * bv[None, None, :]
    if isinstance(b, Dual):
        tan += av[None, :, None] * b.tan[:, None, :]
    return Dual(val, tan)


def matmul(a, b):
    """Matrix product for (k,k)@(k,k) or (k,k)@(k,) with dual operands."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return a @ b
    av, bv = value(a), value(b)
    val = av @ bv
    tan = np.zeros((TANGENT_WIDTH,) + val.shape, dtype=np.result_type(val, np.complex128))
    if isinstance(a, Dual):
        tan += np.matmul(a.tan, bv)
    if isinstance(b, Dual):
        if bv.ndim == 1:
            tan += np.einsum("ij,tj->ti", av, b.tan)
        else:
            tan += np.einsum("ij,tjk->tik", av, b.tan)
    return Dual(val, tan)


def expm(a, max_terms: int = 40):
    """Matrix exponential by scaling-and-squaring Taylor series.

    Works on plain and dual square matrices with identical value
    arithmetic, which keeps gradient-mode values bit-comparable to
    plain-mode evaluation.
    """
    av = value(a)
    k = av.shape[0]
    norm = np.linalg.norm(av, 1)
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    scale = 0.5**s
    x = a * scale
    eye = np.eye(k, dtype=np.result_type(av, np.complex128))
    result = x + eye
    term = x
    for i in range(2, max_terms):
        term = matmul(term, x) * (1.0 / i)
        result = result + term
        tv = value(term)
        tmax = np.abs(tv).max()
        if isinstance(term, Dual):
            tmax = max(tmax, np.abs(term.tan).max())
        if tmax < 1e-18:
            break
    for _ in range(s):
        result = matmul(result, result)
    return result
