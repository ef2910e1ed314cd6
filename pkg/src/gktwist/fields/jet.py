"""First-order multivariate forward-mode jets.

A :class:`Jet` carries a value array and the gradient of that value with
respect to ``n`` seed variables, stored in a trailing axis.  Leading axes
are batch axes, so one evaluation pass can cover many chart points.
"""

from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("val", "grad")

    # make numpy defer to our reflected operators
    __array_priority__ = 1000

    def __init__(self, val, grad):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def seed(cls, points):
        """Independent variables for a batch of points of shape (N, n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n_pts, n = points.shape
        eye = np.eye(n)
        return [cls(points[:, i], np.broadcast_to(eye[i], (n_pts, n)).copy())
                for i in range(n)]

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=float)
        return Jet(other, np.zeros(np.shape(other) + (self.nvars,)))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad)
        return Jet(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val - other.val, self.grad - other.grad)
        return Jet(self.val - other, self.grad)

    def __rsub__(self, other):
        return Jet(other - self.val, -self.grad)

    def __neg__(self):
        return Jet(-self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val * other.val,
                       self.val[..., None] * other.grad + other.val[..., None] * self.grad)
        other = np.asarray(other, dtype=float)
        return Jet(self.val * other, self.grad * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            q = self.val / other.val
            return Jet(q, (self.grad - q[..., None] * other.grad) / other.val[..., None])
        other = np.asarray(other, dtype=float)
        return Jet(self.val / other, self.grad / other[..., None])

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Jet supports integer powers only")
        if n == 0:
            return Jet(np.ones_like(self.val), np.zeros_like(self.grad))
        return Jet(self.val ** n, (n * self.val ** (n - 1))[..., None] * self.grad)

    def sin(self):
        return Jet(np.sin(self.val), np.cos(self.val)[..., None] * self.grad)

    def cos(self):
        return Jet(np.cos(self.val), -np.sin(self.val)[..., None] * self.grad)

    def exp(self):
        e = np.exp(self.val)
        return Jet(e, e[..., None] * self.grad)

    def sqrt(self):
        s = np.sqrt(self.val)
        return Jet(s, (0.5 / s)[..., None] * self.grad)

    def __repr__(self):
        return f"Jet(val={self.val!r}, grad={self.grad!r})"
