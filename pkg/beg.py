"""Grupos bilinearmente enriquecidos (BEGs): triplas (G, ω, ψ).

Convenções de coordenadas usadas em todo o pacote, com k_i = min(e_i, n) e
r_i = max(0, e_i - n):

* ω = Σ_{i<j} c_ij b_i∧b_j, com c_ij mod ℓ^{min(e_i,e_j)}.
* ψ é guardado na base g_i = ℓ^{r_i} b_i^∨ de G^∨[ℓ^n] (g_i(b_i) = 1/ℓ^{k_i}) e
  na base ℓ^{r_j} b_j de G[ℓ^n]: ψ(g_i) = Σ_j A_ij ℓ^{r_j} b_j, A_ij mod ℓ^{k_j}.
* Um homomorfismo f: G -> H é a matriz F com F[k][i] = coordenada k de f(b_i).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import InitVar, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from core_groups import (
    AbelianLGroup,
    GroupElement,
    HomMatrix,
    OracleTooLargeError,
    count_matrices_of_rank,
    count_symmetric_of_corank,
    is_automorphism,
    is_surjective,
    iterate_homomorphisms,
    pochhammer,
)
from linalg import rank_mod, smith_local
from settings import get_settings


logger = logging.getLogger(__name__)

RawKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


def pairs(rank: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(rank) for j in range(i + 1, rank)]


def _k(group: AbelianLGroup, n: int) -> Tuple[int, ...]:
    return tuple(min(e, n) for e in group.exponents)


def _r(group: AbelianLGroup, n: int) -> Tuple[int, ...]:
    return tuple(max(0, e - n) for e in group.exponents)


# ---------- tipos ----------

@dataclass(frozen=True)
class OmegaElement:
    group: AbelianLGroup
    n: int
    coeffs: Tuple[int, ...]

    def __post_init__(self) -> None:
        exps = self.group.exponents
        idx = pairs(self.group.rank)
        if len(self.coeffs) != len(idx):
            raise ValueError(f"ω precisa de {len(idx)} coeficientes, recebidos {len(self.coeffs)}.")
        ell = self.group.ell
        normal = []
        for (i, j), c in zip(idx, self.coeffs):
            m = min(exps[i], exps[j])
            c = int(c) % ell**m
            if c % ell ** max(0, m - self.n):
                raise ValueError(f"ω não é de ℓ^{self.n}-torção: c_{i + 1}{j + 1} = {c}.")
            normal.append(c)
        object.__setattr__(self, "coeffs", tuple(normal))

    @classmethod
    def zero(cls, group: AbelianLGroup, n: int) -> "OmegaElement":
        return cls(group, n, tuple(0 for _ in pairs(group.rank)))

    def coeff(self, i: int, j: int) -> int:
        """c_ij com índices 0-based; c_ji = -c_ij."""
        if i == j:
            return 0
        if i > j:
            return -self.coeff(j, i)
        return self.coeffs[pairs(self.group.rank).index((i, j))]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def records(self) -> List[List[int]]:
        return [[i + 1, j + 1, c] for (i, j), c in zip(pairs(self.group.rank), self.coeffs)]


@dataclass(frozen=True)
class PsiMap:
    group: AbelianLGroup
    n: int
    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        r = self.group.rank
        ell = self.group.ell
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(rows) != r or any(len(row) != r for row in rows):
            raise ValueError(f"ψ precisa ser uma matriz {r}x{r}.")
        k = _k(self.group, self.n)
        normal = []
        for i, row in enumerate(rows):
            linha = []
            for j, a in enumerate(row):
                a %= ell ** k[j]
                if a % ell ** max(0, k[j] - k[i]):
                    raise ValueError(f"ψ não é homomorfismo: A_{i + 1}{j + 1} = {a}.")
                linha.append(a)
            normal.append(tuple(linha))
        object.__setattr__(self, "matrix", tuple(normal))

    @classmethod
    def zero(cls, group: AbelianLGroup, n: int) -> "PsiMap":
        r = group.rank
        return cls(group, n, tuple(tuple(0 for _ in range(r)) for _ in range(r)))

    def flat(self) -> Tuple[int, ...]:
        return tuple(a for row in self.matrix for a in row)


@dataclass(frozen=True)
class DualElement:
    """Caractere de G^∨[ℓ^level]: valor em b_i = coords[i] / ℓ^{min(e_i, level)}."""

    group: AbelianLGroup
    level: int
    coords: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.group.rank:
            raise ValueError("Caractere com número de coordenadas diferente do posto do grupo.")
        mods = [self.group.ell ** min(e, self.level) for e in self.group.exponents]
        object.__setattr__(self, "coords", tuple(int(c) % m for c, m in zip(self.coords, mods)))

    @classmethod
    def basis(cls, group: AbelianLGroup, level: int, i: int) -> "DualElement":
        return cls(group, level, tuple(1 if j == i else 0 for j in range(group.rank)))

    def value(self, i: int) -> Fraction:
        return Fraction(self.coords[i], self.group.ell ** min(self.group.exponents[i], self.level))


@dataclass(frozen=True)
class BegTriple:
    group: AbelianLGroup
    n: int
    omega: OmegaElement
    psi: PsiMap
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        if self.n < 1:
            raise ValueError("n precisa ser >= 1.")
        if self.omega.group != self.group or self.psi.group != self.group:
            raise ValueError("ω e ψ definidos sobre grupos diferentes.")
        if self.omega.n != self.n or self.psi.n != self.n:
            raise ValueError("ω e ψ com níveis de torção diferentes.")
        if validate and not check_compatibility(self.group, self.omega, self.psi):
            raise ValueError("(ω, ψ) não satisfazem a relação de compatibilidade.")

    @classmethod
    def from_raw(
        cls,
        group: AbelianLGroup,
        n: int,
        key: RawKey,
        validate: bool = True,
    ) -> "BegTriple":
        cvals, flat = key
        r = group.rank
        matrix = tuple(tuple(flat[i * r:(i + 1) * r]) for i in range(r))
        return cls(group, n, OmegaElement(group, n, cvals), PsiMap(group, n, matrix), validate)

    @classmethod
    def trivial(cls, ell: int, n: int) -> "BegTriple":
        group = AbelianLGroup(ell, ())
        return cls(group, n, OmegaElement.zero(group, n), PsiMap.zero(group, n))

    @property
    def ell(self) -> int:
        return self.group.ell

    @property
    def key(self) -> RawKey:
        return self.omega.coeffs, self.psi.flat()

    def to_record(self) -> Dict:
        return {
            "ell": self.ell,
            "n": self.n,
            "exponents": list(self.group.exponents),
            "omega": self.omega.records(),
            "psi": [list(row) for row in self.psi.matrix],
        }

    @classmethod
    def from_record(cls, record: Dict) -> "BegTriple":
        group = AbelianLGroup(int(record["ell"]), tuple(record.get("exponents", [])))
        n = int(record["n"])
        coeffs = {(int(i) - 1, int(j) - 1): int(c) for i, j, c in record.get("omega", [])}
        for i, j in coeffs:
            if not (0 <= i < j < group.rank):
                raise ValueError(f"Índice de ω inválido: ({i + 1}, {j + 1}).")
        omega = OmegaElement(group, n, tuple(coeffs.get(p, 0) for p in pairs(group.rank)))
        psi_rows = record.get("psi") or [[0] * group.rank for _ in range(group.rank)]
        psi = PsiMap(group, n, tuple(tuple(row) for row in psi_rows))
        return cls(group, n, omega, psi)

    def describe(self) -> str:
        omega = ", ".join(f"c{i}{j}={c}" for i, j, c in self.omega.records()) or "-"
        return f"{self.group.label()} | ω: {omega} | ψ: {[list(row) for row in self.psi.matrix]}"


# ---------- pareamentos e compatibilidade ----------

def omega_pairing(omega: OmegaElement, m: int, a: DualElement, b: DualElement) -> Fraction:
    """ω_m(a, b) = ℓ^m (a⊗b)(ω) em (1/ℓ^m)Z/Z."""
    if a.level != m or b.level != m:
        raise ValueError("Caracteres com nível de torção diferente de m.")
    if a.group != omega.group or b.group != omega.group:
        raise ValueError("Caracteres de outro grupo.")
    ell = omega.group.ell
    total = Fraction(0)
    for (i, j), c in zip(pairs(omega.group.rank), omega.coeffs):
        total += c * (a.value(i) * b.value(j) - a.value(j) * b.value(i))
    return (ell**m * total) % 1


def psi_pairing(psi: PsiMap, gamma: DualElement, delta: DualElement) -> Fraction:
    """⟨γ, δ⟩ = δ(ψ(γ)) em Q/Z."""
    if gamma.group != psi.group or delta.group != psi.group:
        raise ValueError("Caracteres de outro grupo.")
    if gamma.level != psi.n:
        raise ValueError("γ precisa estar em G^∨[ℓ^n].")
    ell = psi.group.ell
    rr = _r(psi.group, psi.n)
    d = gamma.coords
    total = Fraction(0)
    for j in range(len(rr)):
        x_j = ell ** rr[j] * sum(d[i] * psi.matrix[i][j] for i in range(len(rr)))
        total += x_j * delta.value(j)
    return total % 1


def _pair_ok(
    exps: Sequence[int],
    n: int,
    ell: int,
    i: int,
    j: int,
    a_ij: int,
    a_ji: int,
    c_ij: int,
) -> bool:
    """Relação de compatibilidade no par de geradores (i, j), para todo r <= e_1."""
    e_i, e_j = exps[i], exps[j]
    k_i, k_j = min(e_i, n), min(e_j, n)
    r_i, r_j = max(0, e_i - n), max(0, e_j - n)
    for r in range(exps[0] + 1):
        m_i, m_j = min(e_i, n + r), min(e_j, n + r)
        d_i = ell ** (k_i + r - m_i)
        d_j = ell ** (k_j + r - m_j)
        value = d_i * a_ij * ell ** (r_j + m_i) - d_j * a_ji * ell ** (r_i + m_j)
        value -= 2 * ell ** (n + r) * c_ij
        if value % ell ** (m_i + m_j):
            return False
    return True


def _compatible_raw(group: AbelianLGroup, n: int, cvals: Sequence[int], matrix: Sequence[Sequence[int]]) -> bool:
    exps = group.exponents
    for (i, j), c in zip(pairs(group.rank), cvals):
        if not _pair_ok(exps, n, group.ell, i, j, matrix[i][j], matrix[j][i], c):
            return False
    # pares diagonais satisfazem a relação identicamente
    return True


def check_compatibility(group: AbelianLGroup, omega: OmegaElement, psi: PsiMap) -> bool:
    """⟨ℓ^r α, β⟩ = ⟨ℓ^r β, α⟩ + 2 ω_{n+r}(α, β) para r <= e_1 e α, β geradores de G^∨[ℓ^{n+r}]."""
    if omega.group != group or psi.group != group or omega.n != psi.n:
        return False
    return _compatible_raw(group, psi.n, omega.coeffs, psi.matrix)


# ---------- enumeração ----------

def _psi_entry_range(ell: int, k: Sequence[int], i: int, j: int) -> range:
    return range(0, ell ** k[j], ell ** max(0, k[j] - k[i]))


def _omega_entry_range(group: AbelianLGroup, n: int, i: int, j: int) -> range:
    m = min(group.exponents[i], group.exponents[j])
    return range(0, group.ell**m, group.ell ** max(0, m - n))


@lru_cache(maxsize=512)
def pair_solutions(group: AbelianLGroup, n: int, i: int, j: int) -> Tuple[Tuple[int, int, int], ...]:
    """Todas as (A_ij, A_ji, c_ij) compatíveis no par (i, j)."""
    ell = group.ell
    k = _k(group, n)
    sols = []
    for a_ij in _psi_entry_range(ell, k, i, j):
        for a_ji in _psi_entry_range(ell, k, j, i):
            for c in _omega_entry_range(group, n, i, j):
                if _pair_ok(group.exponents, n, ell, i, j, a_ij, a_ji, c):
                    sols.append((a_ij, a_ji, c))
    return tuple(sols)


def count_begs(group: AbelianLGroup, n: int) -> int:
    total = 1
    for kk in _k(group, n):
        total *= group.ell**kk
    for i, j in pairs(group.rank):
        total *= len(pair_solutions(group, n, i, j))
    return total


def iterate_raw_begs(group: AbelianLGroup, n: int) -> Iterator[RawKey]:
    """Chaves (c, ψ achatado) de todos os BEGs sobre G, sem validação."""
    r = group.rank
    idx = pairs(r)
    diag_ranges = [range(group.ell**kk) for kk in _k(group, n)]
    pair_sols = [pair_solutions(group, n, i, j) for i, j in idx]
    for diag in itertools.product(*diag_ranges):
        for choice in itertools.product(*pair_sols):
            matrix = [[0] * r for _ in range(r)]
            for i in range(r):
                matrix[i][i] = diag[i]
            cvals = []
            for (i, j), (a_ij, a_ji, c) in zip(idx, choice):
                matrix[i][j], matrix[j][i] = a_ij, a_ji
                cvals.append(c)
            yield tuple(cvals), tuple(a for row in matrix for a in row)


def _enumeration_guard(group: AbelianLGroup, total: int) -> None:
    settings = get_settings()
    if group.log_order > settings.oracle_cap:
        raise OracleTooLargeError(
            f"oracle too large: |G| = {group.ell}^{group.log_order} excede {group.ell}^{settings.oracle_cap}."
        )
    if total > settings.enumeration_cap:
        raise OracleTooLargeError(f"oracle too large: {total} candidatos (limite {settings.enumeration_cap}).")


def enumerate_begs(group: AbelianLGroup, n: int) -> List[BegTriple]:
    """Todos os pares (ω, ψ) compatíveis sobre G, em ordem lexicográfica de chave."""
    _enumeration_guard(group, count_begs(group, n))
    keys = sorted(iterate_raw_begs(group, n))
    return [BegTriple.from_raw(group, n, key) for key in keys]


def _all_psi(group: AbelianLGroup, n: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    ell = group.ell
    k = _k(group, n)
    r = group.rank
    ranges = [_psi_entry_range(ell, k, i, j) for i in range(r) for j in range(r)]
    for flat in itertools.product(*ranges):
        yield tuple(tuple(flat[i * r:(i + 1) * r]) for i in range(r))


def _all_omega(group: AbelianLGroup, n: int) -> Iterator[Tuple[int, ...]]:
    ranges = [_omega_entry_range(group, n, i, j) for i, j in pairs(group.rank)]
    return itertools.product(*ranges)


def count_psi_maps(group: AbelianLGroup, n: int) -> int:
    total = 1
    k = _k(group, n)
    for i in range(group.rank):
        for j in range(group.rank):
            total *= len(_psi_entry_range(group.ell, k, i, j))
    return total


def count_omega_elements(group: AbelianLGroup, n: int) -> int:
    total = 1
    for i, j in pairs(group.rank):
        total *= len(_omega_entry_range(group, n, i, j))
    return total


def enumerate_begs_bruteforce(group: AbelianLGroup, n: int) -> List[BegTriple]:
    """Oráculo: testa check_compatibility em todo par (ω, ψ)."""
    _enumeration_guard(group, count_psi_maps(group, n) * count_omega_elements(group, n))
    found = []
    for matrix in _all_psi(group, n):
        psi = PsiMap(group, n, matrix)
        for cvals in _all_omega(group, n):
            omega = OmegaElement(group, n, cvals)
            if check_compatibility(group, omega, psi):
                found.append(BegTriple(group, n, omega, psi, False))
    return sorted(found, key=lambda t: t.key)


# ---------- ψ: posto, admissibilidade, contagens ----------

def psi_reduction(psi: PsiMap) -> List[List[int]]:
    """Matriz de ψ restrito a G^∨[ℓ] -> G[ℓ] sobre F_ℓ."""
    ell = psi.group.ell
    k = _k(psi.group, psi.n)
    r = psi.group.rank
    out = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            if k[i] <= k[j]:
                out[i][j] = (psi.matrix[i][j] // ell ** (k[j] - k[i])) % ell
    return out


def psi_corank(psi: PsiMap) -> int:
    r = psi.group.rank
    if r == 0:
        return 0
    return r - rank_mod(psi_reduction(psi), psi.group.ell)


def is_allowable(psi: PsiMap) -> bool:
    """⟨ψ(α), β⟩ = ⟨ψ(β), α⟩ sempre que ℓ^a α = ℓ^b β = 0 com a + b <= n."""
    group, n, ell = psi.group, psi.n, psi.group.ell
    exps = group.exponents
    k = _k(group, n)
    rr = _r(group, n)
    r = group.rank
    for a in range(n + 1):
        b = n - a
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                lhs = ell ** (k[i] + rr[j]) * psi.matrix[i][j]
                rhs = ell ** (k[j] + rr[i]) * psi.matrix[j][i]
                if (lhs - rhs) % ell ** (min(exps[i], a) + min(exps[j], b)):
                    return False
    return True


def count_allowable_psi(group: AbelianLGroup, n: int) -> int:
    k = _k(group, n)
    expo = sum(k)
    for i, j in pairs(group.rank):
        expo += 2 * k[j] - max(0, min(n, k[i] + k[j]) - k[i])
    return group.ell**expo


def R_n(group: AbelianLGroup, n: int) -> int:
    exps = group.exponents
    total = 0
    for i, j in pairs(group.rank):
        top = max(exps[i], exps[j])
        if top <= n:
            total += min(exps[i], exps[j], n - top)
    return total


def count_omega_for_zero_psi(group: AbelianLGroup, n: int) -> int:
    return group.ell ** R_n(group, n)


def _level_sizes(group: AbelianLGroup, n: int) -> Dict[int, int]:
    sizes: Dict[int, int] = {}
    for kk in _k(group, n):
        sizes[kk] = sizes.get(kk, 0) + 1
    return sizes


def _corank_law(group: AbelianLGroup, n: int) -> Dict[int, int]:
    """Distribuição do corank sobre o espaço das reduções de ψ admissíveis.

    Os blocos por nível aparecem em ordem decrescente; o bloco de nível n é livre,
    os demais diagonais são simétricos e os blocos abaixo da diagonal são livres.
    """
    ell = group.ell
    law: Dict[int, int] = {0: 1}
    size = 0
    for level, m in sorted(_level_sizes(group, n).items(), reverse=True):
        if level == n:
            block = {j: count_matrices_of_rank(m, m, m - j, ell) for j in range(m + 1)}
        else:
            block = {j: count_symmetric_of_corank(m, j, ell) for j in range(m + 1)}
        merged: Dict[int, int] = {}
        for c_x, n_x in law.items():
            for c_y, n_y in block.items():
                if not n_y:
                    continue
                free = ell ** (m * size - c_x * c_y)
                for rho in range(min(c_x, c_y) + 1):
                    ways = count_matrices_of_rank(c_y, c_x, rho, ell)
                    if ways:
                        key = c_x + c_y - rho
                        merged[key] = merged.get(key, 0) + n_x * n_y * ways * free
        law = merged
        size += m
    return law


def _reduction_space_size(group: AbelianLGroup, n: int) -> int:
    expo = 0
    sizes = sorted(_level_sizes(group, n).items(), reverse=True)
    for level, m in sizes:
        expo += m * m if level == n else m * (m + 1) // 2
    for a, b in itertools.combinations([m for _, m in sizes], 2):
        expo += a * b
    return group.ell**expo


def count_allowable_psi_by_corank(group: AbelianLGroup, n: int, s: int, bruteforce: bool = False) -> int:
    """A_{s,n}(G): ψ admissíveis com corank s."""
    if bruteforce:
        _enumeration_guard(group, count_psi_maps(group, n))
        maps = (PsiMap(group, n, matrix) for matrix in _all_psi(group, n))
        return sum(1 for psi in maps if is_allowable(psi) and psi_corank(psi) == s)
    law = _corank_law(group, n)
    fibre = count_allowable_psi(group, n) // _reduction_space_size(group, n)
    return law.get(s, 0) * fibre


def h_G(group: AbelianLGroup, n: int) -> Fraction:
    """Fração dos pares compatíveis com ψ invertível."""
    x = Fraction(1, group.ell)
    sizes = _level_sizes(group, n)
    value = pochhammer(x, x, sizes.get(n, 0))
    for level, m in sizes.items():
        if level < n:
            value *= pochhammer(x, x * x, (m + 1) // 2)
    return value


# ---------- pushforwards ----------

def push_raw(
    group: AbelianLGroup,
    target: AbelianLGroup,
    n: int,
    hom: HomMatrix,
    key: RawKey,
) -> RawKey:
    """(f_*ω, f∘ψ∘f^∨) para f: G -> H dada pela matriz hom."""
    ell = group.ell
    cvals, flat = key
    r, s = group.rank, target.rank
    k, k2 = _k(group, n), _k(target, n)
    rr, rr2 = _r(group, n), _r(target, n)
    fexps = target.exponents

    new_c = []
    src_pairs = pairs(r)
    for p, q in pairs(s):
        total = 0
        for (i, j), c in zip(src_pairs, cvals):
            if c:
                total += c * (hom[p][i] * hom[q][j] - hom[q][i] * hom[p][j])
        new_c.append(total % ell ** min(fexps[p], fexps[q]))

    new_psi = []
    for p in range(s):
        d = [(hom[p][i] * ell ** k[i]) // ell ** k2[p] for i in range(r)]
        x = [ell ** rr[j] * sum(d[i] * flat[i * r + j] for i in range(r)) for j in range(r)]
        for q in range(s):
            y = sum(hom[q][j] * x[j] for j in range(r)) % ell ** fexps[q]
            new_psi.append((y // ell ** rr2[q]) % ell ** k2[q])
    return tuple(new_c), tuple(new_psi)


def apply_hom(hom: HomMatrix, t: BegTriple, target: AbelianLGroup) -> BegTriple:
    """Pushforward de t ao longo de f: G -> H."""
    if target.ell != t.ell:
        raise ValueError("Grupos com primos diferentes.")
    key = push_raw(t.group, target, t.n, hom, t.key)
    return BegTriple.from_raw(target, t.n, key)


def act(hom: HomMatrix, t: BegTriple) -> BegTriple:
    """Ação de um automorfismo de G sobre t."""
    if not is_automorphism(hom, t.group):
        raise ValueError("A matriz não é um automorfismo de G.")
    return apply_hom(hom, t, t.group)


def quotient_map(group: AbelianLGroup, x: GroupElement) -> Tuple[AbelianLGroup, HomMatrix]:
    """G -> G/<x> em forma normal de expoentes, pela SNF de [ℓ^{e_i} δ_i | x]."""
    if group.is_trivial():
        return group, ()
    ell, r = group.ell, group.rank
    top = group.exponent
    relations = np.zeros((r, r + 1), dtype=object)
    for i, e in enumerate(group.exponents):
        relations[i, i] = ell**e
        relations[i, r] = int(x.coords[i])
    u, _, vals = smith_local(relations, ell, top)
    kept = sorted((p for p in range(r) if vals[p] > 0), key=lambda p: -vals[p])
    quotient = AbelianLGroup(ell, tuple(vals[p] for p in kept))
    hom = tuple(tuple(int(u[p, i]) % ell ** vals[p] for i in range(r)) for p in kept)
    return quotient, hom


def quotient_triple(t: BegTriple, x: GroupElement) -> BegTriple:
    if len(x.coords) != t.group.rank:
        raise ValueError("Elemento de outro grupo.")
    quotient, hom = quotient_map(t.group, x)
    if quotient == t.group and not any(x.coords):
        return t
    return apply_hom(hom, t, quotient)


# ---------- automorfismos e sobrejeções de triplas ----------

def canonicalize(t: BegTriple) -> BegTriple:
    """Representante lexicograficamente mínimo da órbita de Aut(G)."""
    from services.orbit_service import orbit_table

    table = orbit_table(t.group, t.n)
    canonical, _ = table.lookup(t.key)
    return BegTriple.from_raw(t.group, t.n, canonical, validate=False)


def count_aut_triple(t: BegTriple) -> int:
    from services.orbit_service import orbit_table

    return orbit_table(t.group, t.n).stabilizer_order(t.key)


def count_aut_triple_bruteforce(t: BegTriple) -> int:
    return sum(
        1
        for hom in iterate_homomorphisms(t.group, t.group)
        if is_automorphism(hom, t.group) and push_raw(t.group, t.group, t.n, hom, t.key) == t.key
    )


def count_surj_triples(src: BegTriple, dst: BegTriple) -> int:
    """#{f: src.G ->> dst.G com f_*ω = ω', f_*ψ = ψ'}, por força bruta."""
    if src.ell != dst.ell or src.n != dst.n:
        raise ValueError("Triplas com ℓ ou n diferentes.")
    if dst.group.is_trivial():
        return 1
    if dst.group.rank > src.group.rank:
        return 0
    _enumeration_guard(src.group, 0)
    return sum(
        1
        for hom in iterate_homomorphisms(src.group, dst.group)
        if is_surjective(hom, dst.group)
        and push_raw(src.group, dst.group, src.n, hom, src.key) == dst.key
    )
