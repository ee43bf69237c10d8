"""Álgebra linear exata sobre Z/ℓ^K (anel local) com numpy."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np


INT64_SAFE = 2**62


def dtype_for(modulus: int, inner: int = 1) -> type:
    """int64 quando produtos acumulados cabem, senão object (inteiros Python)."""
    if modulus * modulus * max(1, inner) < INT64_SAFE:
        return np.int64
    return object


def valuation(x: int, ell: int, cap: int) -> int:
    """Valuação ℓ-ádica de x, saturada em cap (x ≡ 0 devolve cap)."""
    x = int(x)
    if x == 0:
        return cap
    v = 0
    while x % ell == 0 and v < cap:
        x //= ell
        v += 1
    return v


def mat_mul(a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
    if a.dtype == object or b.dtype == object:
        return np.dot(a.astype(object), b.astype(object)) % modulus
    return (a @ b) % modulus


def smith_local(
    matrix: np.ndarray,
    ell: int,
    precision: int,
) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """Forma de Smith sobre Z/ℓ^K.

    Devolve (U, V, vals) com U·A·V = diag(ℓ^{vals}) mod ℓ^K. O pivô de cada etapa
    é a entrada de menor valuação do bloco restante, normalizada por uma unidade.
    Valuações >= K (entrada nula) saem com o sentinela K.
    """
    modulus = ell**precision
    rows, cols = matrix.shape
    dtype = dtype_for(modulus, max(rows, cols))
    a = (np.array(matrix, dtype=object) % modulus).astype(dtype)
    u = np.eye(rows, dtype=dtype)
    v = np.eye(cols, dtype=dtype)
    vals: List[int] = []
    diag = min(rows, cols)

    for t in range(diag):
        sub = a[t:, t:]
        if not sub.any():
            vals.extend([precision] * (diag - t))
            break

        pivot_val = precision
        pos = (0, 0)
        for k in range(precision):
            mask = (sub % ell ** (k + 1)) != 0
            if mask.any():
                idx = np.argwhere(mask)[0]
                pivot_val, pos = k, (int(idx[0]), int(idx[1]))
                break

        i, j = pos[0] + t, pos[1] + t
        if i != t:
            a[[t, i], :] = a[[i, t], :]
            u[[t, i], :] = u[[i, t], :]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
            v[:, [t, j]] = v[:, [j, t]]

        scale = ell**pivot_val
        unit = int(a[t, t]) // scale
        inv = pow(unit, -1, modulus)
        a[t, :] = (a[t, :] * inv) % modulus
        u[t, :] = (u[t, :] * inv) % modulus

        col_factors = a[t + 1:, t] // scale
        if col_factors.any():
            a[t + 1:, :] = (a[t + 1:, :] - np.outer(col_factors, a[t, :])) % modulus
            u[t + 1:, :] = (u[t + 1:, :] - np.outer(col_factors, u[t, :])) % modulus

        row_factors = a[t, t + 1:] // scale
        if row_factors.any():
            a[:, t + 1:] = (a[:, t + 1:] - np.outer(a[:, t], row_factors)) % modulus
            v[:, t + 1:] = (v[:, t + 1:] - np.outer(v[:, t], row_factors)) % modulus

        vals.append(pivot_val)

    return u, v, vals


def rank_mod(matrix: Sequence[Sequence[int]] | np.ndarray, ell: int) -> int:
    """Posto sobre F_ℓ por eliminação gaussiana."""
    a = np.array(matrix, dtype=np.int64) % ell if len(matrix) else np.zeros((0, 0), dtype=np.int64)
    if a.size == 0:
        return 0
    a = a.copy()
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        pivots = np.nonzero(a[rank:, c])[0]
        if pivots.size == 0:
            continue
        p = rank + int(pivots[0])
        if p != rank:
            a[[rank, p], :] = a[[p, rank], :]
        inv = pow(int(a[rank, c]), -1, ell)
        a[rank, :] = (a[rank, :] * inv) % ell
        others = np.nonzero(a[:, c])[0]
        for r in others:
            if r != rank:
                a[r, :] = (a[r, :] - a[r, c] * a[rank, :]) % ell
        rank += 1
        if rank == rows:
            break
    return rank


def standard_symplectic(g: int) -> np.ndarray:
    """Matriz de Gram J na base e_1..e_g, f_1..f_g."""
    j = np.zeros((2 * g, 2 * g), dtype=np.int64)
    j[:g, g:] = np.eye(g, dtype=np.int64)
    j[g:, :g] = -np.eye(g, dtype=np.int64)
    return j
