"""Array kernels for truncated series products.

Series are int64 arrays of coordinate planes: ``a[c, k]`` is the t^c
coordinate of the x^k coefficient (bivariate: ``a[c, i, j]`` for x^i y^j).
Each product is computed on raw planes 0..2n-2 and folded back with the
field's reduction matrix.  ``mod`` is the residue modulus, which is p for
F_{p^n} and p^K (with n = 1) for the modular lift.

Two interchangeable backends: numba (default) and pure numpy.  Set
``FGLAB_NO_NUMBA=1`` before import, or call :func:`use_backend`, to pick
numpy.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

BACKEND = "numpy" if (os.environ.get("FGLAB_NO_NUMBA") or not HAVE_NUMBA) else "numba"


def use_backend(name: str) -> str:
    """Switch kernels at runtime; returns the previous backend name."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, BACKEND = BACKEND, name
    return prev


# ---------------------------------------------------------------- numpy path


def _fold(raw: np.ndarray, mod: int, red: np.ndarray) -> np.ndarray:
    raw %= mod
    if red.shape[0] == 1:
        return raw
    return np.tensordot(red.T, raw, axes=(1, 0)) % mod


def _mul1_np(a, b, N, mod, red):
    n = a.shape[0]
    la, lb = min(a.shape[1], N + 1), min(b.shape[1], N + 1)
    raw = np.zeros((2 * n - 1, N + 1), dtype=np.int64)
    for c in range(n):
        ac = a[c, :la]
        if not ac.any():
            continue
        for d in range(n):
            bd = b[d, :lb]
            if not bd.any():
                continue
            prod = np.convolve(ac, bd)[: N + 1]
            raw[c + d, : prod.shape[0]] += prod
    return _fold(raw, mod, red)


def _mul2_np(a, b, N, mod, red):
    n = a.shape[0]
    raw = np.zeros((2 * n - 1, N + 1, N + 1), dtype=np.int64)
    la, lb = min(a.shape[1], N + 1), min(b.shape[1], N + 1)
    for c in range(n):
        for d in range(n):
            for i1 in range(la):
                row = a[c, i1, : N + 1 - i1]
                if not row.any():
                    continue
                for i2 in range(min(lb, N + 1 - i1)):
                    m = N + 1 - i1 - i2
                    other = b[d, i2, :m]
                    if not other.any():
                        continue
                    prod = np.convolve(row[:m], other)[:m]
                    raw[c + d, i1 + i2, : prod.shape[0]] += prod
    return _fold(raw, mod, red)


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _fold_nb(raw, mod, red):
        nraw = raw.shape[0]
        n = red.shape[1]
        flat = raw.reshape(nraw, -1)
        out = np.zeros((n, flat.shape[1]), dtype=np.int64)
        for k in range(nraw):
            for idx in range(flat.shape[1]):
                v = flat[k, idx] % mod
                if v != 0:
                    for c in range(n):
                        if red[k, c] != 0:
                            out[c, idx] += v * red[k, c]
        for c in range(n):
            for idx in range(flat.shape[1]):
                out[c, idx] %= mod
        return out

    @njit(cache=True)
    def _mul1_nb(a, b, N, mod, red):
        n = a.shape[0]
        la = min(a.shape[1], N + 1)
        lb = min(b.shape[1], N + 1)
        raw = np.zeros((2 * n - 1, N + 1), dtype=np.int64)
        for c in range(n):
            for i in range(la):
                ai = a[c, i]
                if ai == 0:
                    continue
                top = min(lb, N + 1 - i)
                for d in range(n):
                    row = raw[c + d]
                    bd = b[d]
                    for j in range(top):
                        row[i + j] += ai * bd[j]
        return _fold_nb(raw, mod, red)

    @njit(cache=True)
    def _mul2_nb(a, b, N, mod, red):
        n = a.shape[0]
        la = min(a.shape[1], N + 1)
        lb = min(b.shape[1], N + 1)
        raw = np.zeros((2 * n - 1, N + 1, N + 1), dtype=np.int64)
        for c in range(n):
            for i1 in range(la):
                for j1 in range(N + 1 - i1):
                    v = a[c, i1, j1]
                    if v == 0:
                        continue
                    rem = N - i1 - j1
                    for d in range(n):
                        out = raw[c + d]
                        bd = b[d]
                        for i2 in range(min(lb, rem + 1)):
                            for j2 in range(rem - i2 + 1):
                                out[i1 + i2, j1 + j2] += v * bd[i2, j2]
        return _fold_nb(raw, mod, red).reshape(n, N + 1, N + 1)


# ---------------------------------------------------------------- dispatch


def mul1(a: np.ndarray, b: np.ndarray, N: int, mod: int, red: np.ndarray) -> np.ndarray:
    """Univariate product truncated after x^N."""
    if BACKEND == "numba":
        return _mul1_nb(np.ascontiguousarray(a), np.ascontiguousarray(b), N, mod, red)
    return _mul1_np(a, b, N, mod, red)


def mul2(a: np.ndarray, b: np.ndarray, N: int, mod: int, red: np.ndarray) -> np.ndarray:
    """Bivariate product truncated after total degree N."""
    if BACKEND == "numba":
        return _mul2_nb(np.ascontiguousarray(a), np.ascontiguousarray(b), N, mod, red)
    return _mul2_np(a, b, N, mod, red)


def scale(s: np.ndarray, a: np.ndarray, mod: int, red: np.ndarray) -> np.ndarray:
    """Field scalar (coordinate vector) times a planes array of any shape."""
    n = a.shape[0]
    raw = np.zeros((2 * n - 1,) + a.shape[1:], dtype=np.int64)
    for c in range(n):
        if s[c]:
            raw[c : c + n] += s[c] * a
    return _fold(raw, mod, red)


def fmatmul(a: np.ndarray, b: np.ndarray, mod: int, red: np.ndarray) -> np.ndarray:
    """Matrix product over the field: (n, r, s) @ (n, s, t) -> (n, r, t)."""
    n = a.shape[0]
    raw = np.zeros((2 * n - 1, a.shape[1], b.shape[2]), dtype=np.int64)
    for c in range(n):
        if not a[c].any():
            continue
        for d in range(n):
            if b[d].any():
                raw[c + d] += a[c] @ b[d] % mod
    return _fold(raw, mod, red)


def twist(a: np.ndarray, frob: np.ndarray, mod: int) -> np.ndarray:
    """Apply a Frobenius-power matrix to every coefficient."""
    if frob.shape[0] == 1:
        return a.copy()
    return np.tensordot(frob.T, a, axes=(1, 0)) % mod
