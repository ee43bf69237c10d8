"""Modelos de matrizes aleatórias sobre Z/ℓ^K e extração de BEGs de cokernels.

Base simplética padrão e_1..e_g, f_1..f_g com matriz de Gram J = [[0, I], [-I, 0]].
Modelo linear: M skew-simplética, G = coker(M + ℓ^n). Modelo não linear: F com
F^T J F = qJ, G = coker(1 - F).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sympy import isprime

from beg import BegTriple, OmegaElement, PsiMap, quotient_triple
from core_groups import AbelianLGroup, GroupElement
from linalg import dtype_for, mat_mul, smith_local, standard_symplectic


logger = logging.getLogger(__name__)

MODELS = ("linear", "nonlinear")
INT64_DRAW = 2**62


class PrecisionError(RuntimeError):
    """Divisores elementares grandes demais para a precisão de trabalho."""

    def __init__(self, message: str, valuations: List[int], precision: int) -> None:
        super().__init__(message)
        self.valuations = list(valuations)
        self.precision = precision


class ModelInvariantError(RuntimeError):
    """Uma matriz amostrada ou uma SNF violou sua identidade definidora."""


@dataclass(frozen=True)
class SampleConfig:
    ell: int
    n: int
    g: int
    K: Optional[int] = None
    q: Optional[int] = None
    t: int = 0
    seed: int = 0
    samples: int = 0
    max_resamples: int = 3

    def __post_init__(self) -> None:
        if self.ell < 3 or not isprime(self.ell):
            raise ValueError(f"ℓ precisa ser um primo ímpar, recebido {self.ell}.")
        if self.n < 1 or self.g < 1:
            raise ValueError("n e g precisam ser >= 1.")
        if self.K is None:
            object.__setattr__(self, "K", self.n + 12)
        if self.K <= self.n:
            raise ValueError(f"K precisa ser maior que n (K={self.K}, n={self.n}).")
        if self.q is not None:
            if (self.q - 1) % self.ell**self.n or (self.q - 1) % self.ell ** (self.n + 1) == 0:
                raise ValueError(f"q={self.q} precisa satisfazer ℓ^n || q - 1.")
        if self.t < 0 or self.samples < 0 or self.max_resamples < 0:
            raise ValueError("t, samples e max_resamples precisam ser >= 0.")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed precisa caber em 64 bits.")


@dataclass
class PadicMatrix:
    entries: np.ndarray
    ell: int
    precision: int

    @property
    def modulus(self) -> int:
        return self.ell**self.precision

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])


@dataclass
class SnfResult:
    u: np.ndarray
    v: np.ndarray
    divisor_valuations: List[int]
    precision: int
    resolved: bool = field(init=False)

    def __post_init__(self) -> None:
        self.resolved = all(v < self.precision for v in self.divisor_valuations)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Fluxo independente por amostra, determinado por (seed, índice)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _reduce(arr: np.ndarray, modulus: int, size: int) -> np.ndarray:
    return (np.array(arr, dtype=object) % modulus).astype(dtype_for(modulus, size))


def uniform_residues(rng: np.random.Generator, ell: int, precision: int, shape) -> np.ndarray:
    """Inteiros uniformes mod ℓ^precision (blocos de dígitos quando não cabem em int64)."""
    modulus = ell**precision
    if modulus <= INT64_DRAW:
        return rng.integers(0, modulus, size=shape, dtype=np.int64)
    chunk = 1
    while ell ** (chunk + 1) <= INT64_DRAW:
        chunk += 1
    out = np.zeros(shape, dtype=object)
    done = 0
    while done < precision:
        step = min(chunk, precision - done)
        digits = rng.integers(0, ell**step, size=shape, dtype=np.int64).astype(object)
        out = out + digits * ell**done
        done += step
    return out


def uniform_symmetric(rng: np.random.Generator, ell: int, precision: int, size: int) -> np.ndarray:
    raw = uniform_residues(rng, ell, precision, (size, size)).astype(object)
    return np.triu(raw) + np.triu(raw, 1).T


def _j(g: int) -> np.ndarray:
    return standard_symplectic(g).astype(object)


# ---------- modelo linear ----------

def check_skew_symplectic(m: PadicMatrix) -> None:
    j = _j(m.size // 2)
    ent = m.entries.astype(object)
    if ((ent.T.dot(j) + j.dot(ent)) % m.modulus).any():
        raise ModelInvariantError("M^T J + J M não se anula mod ℓ^K.")


def sample_skew_symplectic(cfg: SampleConfig, rng: np.random.Generator) -> PadicMatrix:
    """M = J^{-1} S = -J S com S simétrica uniforme: bijeção linear, logo Haar."""
    size = 2 * cfg.g
    modulus = cfg.ell**cfg.K
    sym = uniform_symmetric(rng, cfg.ell, cfg.K, size)
    m = PadicMatrix(_reduce(-_j(cfg.g).dot(sym), modulus, size), cfg.ell, cfg.K)
    check_skew_symplectic(m)
    return m


def lift_skew_symplectic(m: PadicMatrix, precision: int, rng: np.random.Generator) -> PadicMatrix:
    """Levantamento uniforme de M a Z/ℓ^{precision} (só os novos dígitos são sorteados)."""
    g = m.size // 2
    j = _j(g)
    sym = j.dot(m.entries.astype(object)) % m.modulus
    extra = uniform_symmetric(rng, m.ell, precision - m.precision, m.size)
    sym = sym + m.modulus * extra
    lifted = PadicMatrix(_reduce(-j.dot(sym), m.ell**precision, m.size), m.ell, precision)
    check_skew_symplectic(lifted)
    return lifted


# ---------- modelo não linear ----------

def _omega_form(x: np.ndarray, y: np.ndarray, j: np.ndarray, modulus: int) -> int:
    return int(x.dot(j.dot(y))) % modulus


def random_symplectic(g: int, ell: int, precision: int, rng: np.random.Generator) -> np.ndarray:
    """S ∈ Sp_{2g}(Z/ℓ^K) Haar, completando uma base simplética coluna a coluna."""
    modulus = ell**precision
    size = 2 * g
    j = _j(g)
    es: List[np.ndarray] = []
    fs: List[np.ndarray] = []

    def project(x: np.ndarray) -> np.ndarray:
        out = x.copy()
        for e, f in zip(es, fs):
            out = out - _omega_form(x, f, j, modulus) * e + _omega_form(x, e, j, modulus) * f
        return out % modulus

    for _ in range(g):
        while True:
            e = project(uniform_residues(rng, ell, precision, size).astype(object))
            if (e % ell).any():
                break
        y = project(uniform_residues(rng, ell, precision, size).astype(object))
        row = e.dot(j) % modulus
        k = next(idx for idx in range(size) if row[idx] % ell)
        unit = np.zeros(size, dtype=object)
        unit[k] = 1
        w0 = project(unit) * pow(int(row[k]), -1, modulus) % modulus
        f = (y - _omega_form(e, y, j, modulus) * w0 + w0) % modulus
        es.append(e)
        fs.append(f)

    return np.column_stack(es + fs)


def _similitude(g: int, q: int, modulus: int) -> np.ndarray:
    d = np.eye(2 * g, dtype=object)
    for i in range(g, 2 * g):
        d[i, i] = q % modulus
    return d


def check_similitude(f: PadicMatrix, q: int) -> None:
    j = _j(f.size // 2)
    ent = f.entries.astype(object)
    if ((ent.T.dot(j).dot(ent) - q * j) % f.modulus).any():
        raise ModelInvariantError("F^T J F difere de qJ mod ℓ^K.")


def sample_gsp_similitude(cfg: SampleConfig, rng: np.random.Generator) -> PadicMatrix:
    if cfg.q is None:
        raise ValueError("O modelo não linear exige q.")
    modulus = cfg.ell**cfg.K
    s = random_symplectic(cfg.g, cfg.ell, cfg.K, rng)
    entries = s.dot(_similitude(cfg.g, cfg.q, modulus)) % modulus
    f = PadicMatrix(_reduce(entries, modulus, 2 * cfg.g), cfg.ell, cfg.K)
    check_similitude(f, cfg.q)
    return f


def lift_symplectic(s: np.ndarray, ell: int, precision: int, target: int, rng: np.random.Generator) -> np.ndarray:
    """Levantamento de Hensel uniforme de S ∈ Sp mod ℓ^precision até ℓ^target."""
    size = s.shape[0]
    j = _j(size // 2)
    eye = np.eye(size, dtype=object)
    cur = s.astype(object) % ell**precision
    k = precision
    while k < target:
        k2 = min(2 * k, target)
        mod2 = ell**k2
        err = cur.T.dot(j).dot(cur) - j
        if (err % ell**k).any():
            raise ModelInvariantError("Matriz a levantar não é simplética.")
        err = err // ell**k
        y = j.dot(err) * pow(2, -1, mod2) % mod2
        x = -j.dot(uniform_symmetric(rng, ell, k2 - k, size)) % mod2
        cur = cur.dot(eye + ell**k * y).dot(eye + ell**k * x) % mod2
        k = k2
    return cur


def lift_similitude(f: PadicMatrix, q: int, precision: int, rng: np.random.Generator) -> PadicMatrix:
    g = f.size // 2
    inv_q = pow(q, -1, f.modulus)
    s = f.entries.astype(object).dot(_similitude(g, inv_q, f.modulus)) % f.modulus
    lifted = lift_symplectic(s, f.ell, f.precision, precision, rng)
    modulus = f.ell**precision
    entries = lifted.dot(_similitude(g, q, modulus)) % modulus
    out = PadicMatrix(_reduce(entries, modulus, f.size), f.ell, precision)
    check_similitude(out, q)
    return out


def conjugate(a: PadicMatrix, s: np.ndarray) -> PadicMatrix:
    """S A S^{-1} para S simplética (S^{-1} = -J S^T J)."""
    j = _j(a.size // 2)
    s = s.astype(object)
    s_inv = -j.dot(s.T).dot(j)
    entries = s.dot(a.entries.astype(object)).dot(s_inv) % a.modulus
    return PadicMatrix(_reduce(entries, a.modulus, a.size), a.ell, a.precision)


# ---------- SNF e extração ----------

def snf_local(a: PadicMatrix) -> SnfResult:
    u, v, vals = smith_local(a.entries, a.ell, a.precision)
    result = SnfResult(u, v, vals, a.precision)
    check_reconstruction(a, result)
    return result


def check_reconstruction(a: PadicMatrix, snf: SnfResult) -> None:
    modulus = a.modulus
    diag = mat_mul(mat_mul(snf.u, a.entries, modulus), snf.v, modulus)
    expected = np.zeros(diag.shape, dtype=object)
    for i, val in enumerate(snf.divisor_valuations):
        if val < a.precision:
            expected[i, i] = a.ell**val
    if ((diag.astype(object) - expected) % modulus).any():
        raise ModelInvariantError("U·A·V não reconstrói a forma de Smith.")
    if any(x > y for x, y in zip(snf.divisor_valuations, snf.divisor_valuations[1:])):
        raise ModelInvariantError("Valuações da SNF fora de ordem.")


def _extract(
    a: PadicMatrix,
    b: np.ndarray,
    omega_scale: int,
    n: int,
) -> BegTriple:
    """(G, ω, ψ) de G = coker(a), com ψ(ω(•, s)/ℓ^n) = b·s/ℓ^n."""
    ell, precision = a.ell, a.precision
    modulus = a.modulus
    snf = snf_local(a)
    vals = snf.divisor_valuations
    if max(vals, default=0) + n >= precision:
        raise PrecisionError(
            f"Valuações {vals} exigem precisão maior que K={precision} (n={n}).", vals, precision
        )

    g = a.size // 2
    j = _j(g)
    u = snf.u.astype(object)
    kept = sorted((p for p in range(a.size) if vals[p] > 0), key=lambda p: -vals[p])
    group = AbelianLGroup(ell, tuple(vals[p] for p in kept))
    exps = group.exponents
    k = [min(e, n) for e in exps]
    r_ = [max(0, e - n) for e in exps]

    coeffs = []
    for a_idx in range(len(kept)):
        for b_idx in range(a_idx + 1, len(kept)):
            pa, pb = kept[a_idx], kept[b_idx]
            total = sum(u[pa, i] * u[pb, g + i] - u[pa, g + i] * u[pb, i] for i in range(g))
            coeffs.append(total * omega_scale % ell ** min(exps[a_idx], exps[b_idx]))

    b_obj = b.astype(object)
    psi_rows = []
    for a_idx, pa in enumerate(kept):
        s = -(ell ** (n - k[a_idx])) * j.dot(u[pa, :]) % modulus
        w = b_obj.dot(s) % modulus
        if (w % ell**n).any():
            raise ModelInvariantError("b·s não é divisível por ℓ^n.")
        y = u.dot(w // ell**n)
        linha = []
        for b_idx, pb in enumerate(kept):
            y_b = int(y[pb]) % ell ** exps[b_idx]
            if y_b % ell ** r_[b_idx]:
                raise ModelInvariantError("Imagem de ψ fora de G[ℓ^n].")
            linha.append((y_b // ell ** r_[b_idx]) % ell ** k[b_idx])
        psi_rows.append(tuple(linha))

    try:
        omega = OmegaElement(group, n, tuple(coeffs))
        psi = PsiMap(group, n, tuple(psi_rows))
        return BegTriple(group, n, omega, psi)
    except ValueError as exc:
        raise ModelInvariantError(f"Tripla extraída inválida: {exc}") from exc


def extract_triple_linear(m: PadicMatrix, cfg: SampleConfig) -> BegTriple:
    """G = coker(M + ℓ^n), ω = imagem de Σ e_i∧f_i, ψ(α) = (M + ℓ^n)α'/ℓ^n."""
    a_ent = (m.entries.astype(object) + cfg.ell**cfg.n * np.eye(m.size, dtype=object)) % m.modulus
    a = PadicMatrix(_reduce(a_ent, m.modulus, m.size), m.ell, m.precision)
    return _extract(a, a_ent, 1, cfg.n)


def extract_triple_nonlinear(f: PadicMatrix, cfg: SampleConfig) -> BegTriple:
    """G = coker(1 - F), ω = ((q-1)/2ℓ^n)·ω°, ψ pela regra (F - 1)s/ℓ^n."""
    if cfg.q is None:
        raise ValueError("O modelo não linear exige q.")
    modulus = f.modulus
    eye = np.eye(f.size, dtype=object)
    a_ent = (eye - f.entries.astype(object)) % modulus
    b_ent = (f.entries.astype(object) - eye) % modulus
    scale = ((cfg.q - 1) // cfg.ell**cfg.n) * pow(2, -1, modulus) % modulus
    a = PadicMatrix(_reduce(a_ent, modulus, f.size), f.ell, f.precision)
    return _extract(a, b_ent, scale, cfg.n)


def sample_matrix(cfg: SampleConfig, model: str, rng: np.random.Generator) -> PadicMatrix:
    if model == "linear":
        return sample_skew_symplectic(cfg, rng)
    if model == "nonlinear":
        return sample_gsp_similitude(cfg, rng)
    raise ValueError(f"Modelo desconhecido: {model!r}.")


def extract_triple(matrix: PadicMatrix, cfg: SampleConfig, model: str) -> BegTriple:
    if model == "linear":
        return extract_triple_linear(matrix, cfg)
    return extract_triple_nonlinear(matrix, cfg)


def lift_matrix(matrix: PadicMatrix, cfg: SampleConfig, model: str, precision: int, rng: np.random.Generator) -> PadicMatrix:
    if model == "linear":
        return lift_skew_symplectic(matrix, precision, rng)
    return lift_similitude(matrix, cfg.q, precision, rng)


def extract_with_escalation(
    matrix: PadicMatrix,
    cfg: SampleConfig,
    model: str,
    rng: np.random.Generator,
) -> Tuple[BegTriple, int]:
    """Extrai a tripla, dobrando a folga K - n e levantando a mesma matriz quando preciso.

    Devolve (tripla, número de escalonamentos). Depois de max_resamples tentativas
    o último PrecisionError é propagado.
    """
    escalations = 0
    while True:
        try:
            return extract_triple(matrix, cfg, model), escalations
        except PrecisionError as exc:
            if escalations >= cfg.max_resamples:
                raise
            target = cfg.n + 2 * (matrix.precision - cfg.n)
            logger.debug("Escalonando precisão %d -> %d (valuações %s)", matrix.precision, target, exc.valuations)
            matrix = lift_matrix(matrix, cfg, model, target, rng)
            escalations += 1


def apply_Q_sampler(triple: BegTriple, t: int, rng: np.random.Generator) -> BegTriple:
    """Quociente por t elementos uniformes sorteados sucessivamente."""
    current = triple
    for _ in range(t):
        if current.group.is_trivial():
            break
        coords = [int(uniform_residues(rng, current.ell, e, ())) for e in current.group.exponents]
        current = quotient_triple(current, GroupElement.reduced(current.group, coords))
    return current
