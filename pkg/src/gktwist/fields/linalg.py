"""Small dense linear algebra on object arrays (expressions or numbers)."""

from __future__ import annotations

import itertools

import numpy as np

from .expr import FieldExpr, is_zero


def obj(a) -> np.ndarray:
    """Copy ``a`` into an object array, keeping expressions and floats as-is."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx in itertools.product(*map(range, a.shape)):
        x = a[idx]
        out[idx] = x if isinstance(x, FieldExpr) else float(x)
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(0.0)
    return out


def eye(n: int) -> np.ndarray:
    out = zeros((n, n))
    for i in range(n):
        out[i, i] = 1.0
    return out


def matmul(a, b) -> np.ndarray:
    """Matrix product that skips structural zeros."""
    a, b = np.asarray(a, dtype=object), np.asarray(b, dtype=object)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    n, k = a.shape
    k2, m = b.shape
    if k != k2:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                x, y = a[i, t], b[t, j]
                if is_zero(x) or is_zero(y):
                    continue
                acc = acc + x * y
            out[i, j] = acc
    return out[:, 0] if vec else out


def trace(a):
    acc = 0.0
    for i in range(a.shape[0]):
        acc = acc + a[i, i]
    return acc


def trace_of_product(a, b):
    """tr(a @ b) without forming the product."""
    acc = 0.0
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            x, y = a[i, j], b[j, i]
            if is_zero(x) or is_zero(y):
                continue
            acc = acc + x * y
    return acc


def det(a):
    """Laplace expansion along the first row; meant for n <= 4."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    acc = 0.0
    for j in range(n):
        if is_zero(a[0, j]):
            continue
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        term = a[0, j] * det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def inv(a) -> np.ndarray:
    """Inverse via the adjugate."""
    a = np.asarray(a, dtype=object)
    n = a.shape[0]
    d = det(a)
    if is_zero(d):
        raise ZeroDivisionError("singular matrix")
    if n == 1:
        return obj([[1.0 / d]])
    out = zeros((n, n))
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            c = det(minor)
            if (i + j) % 2:
                c = -c
            out[j, i] = c / d
    return out


def transpose(a) -> np.ndarray:
    return np.asarray(a, dtype=object).T.copy()


def neg(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    out = zeros(a.shape)
    for idx in itertools.product(*map(range, a.shape)):
        out[idx] = -a[idx]
    return out


def block(rows) -> np.ndarray:
    """Assemble a block matrix from a nested list of 2-D object arrays."""
    return np.concatenate([np.concatenate([np.asarray(b, dtype=object) for b in row], axis=1)
                           for row in rows], axis=0)
