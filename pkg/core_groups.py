"""Aritmética exata em ℓ-grupos abelianos finitos.

Todo grupo é guardado na forma normal de expoentes e_1 >= ... >= e_r, isto é
G = ⊕ Z/ℓ^{e_i}. As fórmulas fechadas (ordens de torções de ∧² e Sym², |Aut|,
sobrejeções, símbolos de Pochhammer) vivem aqui junto com os oráculos de força
bruta que as validam.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime, primitive_root
from sympy.utilities.iterables import partitions

from linalg import rank_mod, smith_local, valuation
from settings import get_settings


logger = logging.getLogger(__name__)

HomMatrix = Tuple[Tuple[int, ...], ...]


class OracleTooLargeError(ValueError):
    """Um limite de enumeração (oráculo, canonicalização) foi excedido."""


@dataclass(frozen=True)
class AbelianLGroup:
    ell: int
    exponents: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        exps = tuple(int(e) for e in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if self.ell < 3 or not isprime(self.ell):
            raise ValueError(f"ℓ precisa ser um primo ímpar, recebido {self.ell}.")
        if any(e < 1 for e in exps):
            raise ValueError(f"Expoentes precisam ser >= 1: {exps}.")
        if any(a < b for a, b in zip(exps, exps[1:])):
            raise ValueError(f"Expoentes precisam estar em ordem não crescente: {exps}.")

    @classmethod
    def parse(cls, ell: int, text: str) -> "AbelianLGroup":
        """Lê "2,1" (ou "" para o grupo trivial) e ordena os expoentes."""
        partes = [p.strip() for p in (text or "").split(",") if p.strip()]
        try:
            exps = sorted((int(p) for p in partes), reverse=True)
        except ValueError as exc:
            raise ValueError(f"Expoentes malformados: {text!r}.") from exc
        return cls(ell, tuple(exps))

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def log_order(self) -> int:
        return sum(self.exponents)

    @property
    def order(self) -> int:
        return self.ell**self.log_order

    @property
    def moduli(self) -> Tuple[int, ...]:
        return tuple(self.ell**e for e in self.exponents)

    @property
    def exponent(self) -> int:
        return self.exponents[0] if self.exponents else 0

    def is_trivial(self) -> bool:
        return not self.exponents

    def torsion_exponents(self, m: int) -> Tuple[int, ...]:
        """Expoentes de G[ℓ^m] nos geradores ℓ^{max(0,e_i-m)} b_i."""
        return tuple(min(e, m) for e in self.exponents)

    def label(self) -> str:
        if self.is_trivial():
            return "trivial"
        return " + ".join(f"Z/{self.ell**e}" for e in self.exponents)


@dataclass(frozen=True)
class GroupElement:
    coords: Tuple[int, ...]

    @classmethod
    def reduced(cls, group: AbelianLGroup, coords: Sequence[int]) -> "GroupElement":
        if len(coords) != group.rank:
            raise ValueError("Elemento com número de coordenadas diferente do posto do grupo.")
        return cls(tuple(int(c) % m for c, m in zip(coords, group.moduli)))


# ---------- q-séries e contagens de matrizes ----------

def pochhammer(a: Fraction | int, q: Fraction | int, k: int) -> Fraction:
    """(a;q)_k = ∏_{j<k} (1 - a q^j), exato."""
    if k < 0:
        raise ValueError("k precisa ser >= 0.")
    a, q = Fraction(a), Fraction(q)
    result = Fraction(1)
    for j in range(k):
        result *= 1 - a * q**j
    return result


def gaussian_binomial(r: int, s: int, x: Fraction | int) -> Fraction:
    """Binomial q-analógico [r, s]_x."""
    if s < 0 or s > r:
        return Fraction(0)
    x = Fraction(x)
    return pochhammer(x, x, r) / (pochhammer(x, x, s) * pochhammer(x, x, r - s))


def count_matrices_of_rank(rows: int, cols: int, rank: int, ell: int) -> int:
    if rank < 0 or rank > min(rows, cols):
        return 0
    num, den = 1, 1
    for i in range(rank):
        num *= (ell**rows - ell**i) * (ell**cols - ell**i)
        den *= ell**rank - ell**i
    return num // den


def count_symmetric_invertible(m: int, ell: int) -> int:
    value = Fraction(ell ** (m * (m + 1) // 2))
    value *= pochhammer(Fraction(1, ell), Fraction(1, ell**2), (m + 1) // 2)
    return int(value)


def count_symmetric_of_corank(m: int, j: int, ell: int) -> int:
    """Matrizes simétricas m×m sobre F_ℓ com núcleo de dimensão j."""
    if j < 0 or j > m:
        return 0
    subspaces = ell ** (j * (m - j)) * gaussian_binomial(m, j, Fraction(1, ell))
    return int(subspaces) * count_symmetric_invertible(m - j, ell)


# ---------- ordens de torções e contagens de grupos ----------

def _pair_min_sum(group: AbelianLGroup, n: int, strict: bool) -> int:
    exps = group.exponents
    total = 0
    for i in range(len(exps)):
        start = i + 1 if strict else i
        for j in range(start, len(exps)):
            total += min(exps[i], exps[j], n)
    return total


def wedge2_torsion_order(group: AbelianLGroup, n: int) -> int:
    return group.ell ** _pair_min_sum(group, n, strict=True)


def sym2_torsion_order(group: AbelianLGroup, n: int) -> int:
    return group.ell ** _pair_min_sum(group, n, strict=False)


def count_hom(source: AbelianLGroup, target: AbelianLGroup) -> int:
    total = sum(min(e, f) for e in source.exponents for f in target.exponents)
    return source.ell**total


def count_aut(group: AbelianLGroup) -> int:
    """|Aut(G)| pela fórmula fechada para ℓ-grupos abelianos (expoentes crescentes)."""
    ell = group.ell
    exps = sorted(group.exponents)
    r = len(exps)
    if r == 0:
        return 1
    # d_k = maior índice com o mesmo expoente, c_k = menor (1-based)
    d = [max(i + 1 for i in range(r) if exps[i] == exps[k]) for k in range(r)]
    c = [min(i + 1 for i in range(r) if exps[i] == exps[k]) for k in range(r)]
    total = 1
    for k in range(r):
        total *= ell ** d[k] - ell**k
    for j in range(r):
        total *= ell ** (exps[j] * (r - d[j]))
    for i in range(r):
        total *= ell ** ((exps[i] - 1) * (r - c[i] + 1))
    return total


def count_surj_groups(source: AbelianLGroup, target: AbelianLGroup) -> int:
    """#Surj(G, H) via o critério de Frattini: f é sobre sse f mod ℓH é sobre."""
    if source.ell != target.ell:
        raise ValueError("Grupos com primos diferentes.")
    ell = source.ell
    factor = Fraction(1)
    for k, f in enumerate(target.exponents, start=1):
        rho = sum(1 for e in source.exponents if e >= f)
        if rho <= k - 1:
            return 0
        factor *= 1 - Fraction(1, ell ** (rho - k + 1))
    return int(count_hom(source, target) * factor)


# ---------- produtos infinitos ----------

def _truncation_index(ell: int, tol: float) -> int:
    # cauda Σ_{i>N} ℓ^{-i} <= ℓ^{-N}/(ℓ-1); margem de 4x
    if tol <= 0:
        raise ValueError("tol precisa ser > 0.")
    n = 1
    while ell ** (-n) / (ell - 1) >= tol / 4:
        n += 1
    return n


@lru_cache(maxsize=128)
def c_ell(ell: int, tol: float) -> float:
    """c_ℓ = ∏_{i>=0} (1 - ℓ^{-(2i+1)}), truncado com erro < tol."""
    stop = _truncation_index(ell, tol)
    value = 1.0
    for i in range(stop + 1):
        expo = 2 * i + 1
        if expo > stop + 1:
            break
        value *= 1.0 - float(ell) ** (-expo)
    return value


@lru_cache(maxsize=256)
def tail_product(ell: int, t: int, tol: float) -> float:
    """∏_{i>t} (1 + ℓ^{-i})^{-1}, truncado com erro < tol."""
    stop = t + _truncation_index(ell, tol)
    value = 1.0
    for i in range(t + 1, stop + 1):
        value /= 1.0 + float(ell) ** (-i)
    return value


# ---------- enumeração ----------

def _oracle_guard(group: AbelianLGroup) -> None:
    cap = get_settings().oracle_cap
    if group.log_order > cap:
        raise OracleTooLargeError(
            f"oracle too large: |G| = {group.ell}^{group.log_order} excede {group.ell}^{cap}."
        )


def iterate_elements(group: AbelianLGroup) -> Iterator[GroupElement]:
    """Todos os elementos de G em ordem lexicográfica."""
    _oracle_guard(group)
    for coords in itertools.product(*(range(m) for m in group.moduli)):
        yield GroupElement(tuple(coords))


def groups_up_to(ell: int, bound: int) -> List[AbelianLGroup]:
    """Todos os ℓ-grupos com |G| <= bound, em ordem de |G| e depois de expoentes."""
    groups = [AbelianLGroup(ell, ())]
    k = 1
    while ell**k <= bound:
        tipos = []
        for part in partitions(k):
            exps = sorted((size for size, mult in part.items() for _ in range(mult)), reverse=True)
            tipos.append(tuple(exps))
        for exps in sorted(tipos, reverse=True):
            groups.append(AbelianLGroup(ell, exps))
        k += 1
    return groups


def hom_entry_ranges(source: AbelianLGroup, target: AbelianLGroup) -> List[List[range]]:
    """Valores possíveis de F[k][i] (imagem de b_i na coordenada k do alvo)."""
    ell = source.ell
    ranges = []
    for f in target.exponents:
        linha = []
        for e in source.exponents:
            step = ell ** max(0, f - e)
            linha.append(range(0, ell**f, step))
        ranges.append(linha)
    return ranges


def iterate_homomorphisms(source: AbelianLGroup, target: AbelianLGroup) -> Iterator[HomMatrix]:
    total = count_hom(source, target)
    cap = get_settings().enumeration_cap
    if total > cap:
        raise OracleTooLargeError(f"oracle too large: {total} homomorfismos (limite {cap}).")
    ranges = hom_entry_ranges(source, target)
    flat = [rg for linha in ranges for rg in linha]
    r_src = source.rank
    for values in itertools.product(*flat):
        yield tuple(
            tuple(values[k * r_src:(k + 1) * r_src]) for k in range(target.rank)
        )


def is_surjective(matrix: HomMatrix, target: AbelianLGroup) -> bool:
    if target.is_trivial():
        return True
    return rank_mod(matrix, target.ell) == target.rank


def socle_matrix(matrix: HomMatrix, source: AbelianLGroup, target: AbelianLGroup) -> List[List[int]]:
    """Matriz induzida G[ℓ] -> H[ℓ] nas bases ℓ^{e-1} b."""
    ell = source.ell
    out = []
    for k, f in enumerate(target.exponents):
        linha = []
        for i, e in enumerate(source.exponents):
            entry = matrix[k][i]
            if e > f:
                linha.append(0)
            else:
                linha.append((entry // ell ** (f - e)) % ell)
        out.append(linha)
    return out


def is_automorphism(matrix: HomMatrix, group: AbelianLGroup) -> bool:
    if group.is_trivial():
        return True
    return rank_mod(socle_matrix(matrix, group, group), group.ell) == group.rank


def compose_homs(
    outer: HomMatrix,
    inner: HomMatrix,
    target: AbelianLGroup,
) -> HomMatrix:
    """outer ∘ inner, reduzido nos módulos do alvo."""
    if not inner:
        return tuple(tuple() for _ in target.exponents)
    cols = len(inner[0])
    return tuple(
        tuple(
            sum(outer[k][j] * inner[j][i] for j in range(len(inner))) % target.moduli[k]
            for i in range(cols)
        )
        for k in range(target.rank)
    )


def identity_hom(group: AbelianLGroup) -> HomMatrix:
    r = group.rank
    return tuple(tuple(1 if i == k else 0 for i in range(r)) for k in range(r))


@lru_cache(maxsize=256)
def automorphism_generators(group: AbelianLGroup) -> Tuple[HomMatrix, ...]:
    """Geradores de Aut(G): escalas por raiz primitiva, transvecções e trocas."""
    ell = group.ell
    r = group.rank
    exps = group.exponents
    if r == 0:
        return ()
    root = int(primitive_root(ell * ell))
    base = [list(row) for row in identity_hom(group)]
    gens: List[HomMatrix] = []

    for i in range(r):
        m = [row[:] for row in base]
        m[i][i] = root % group.moduli[i]
        gens.append(tuple(tuple(row) for row in m))

    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            m = [row[:] for row in base]
            # b_j -> b_j + ℓ^{max(0, e_i - e_j)} b_i
            m[i][j] = ell ** max(0, exps[i] - exps[j]) % group.moduli[i]
            gens.append(tuple(tuple(row) for row in m))

    for i in range(r - 1):
        if exps[i] == exps[i + 1]:
            m = [row[:] for row in base]
            m[i][i], m[i + 1][i + 1] = 0, 0
            m[i][i + 1], m[i + 1][i] = 1, 1
            gens.append(tuple(tuple(row) for row in m))

    return tuple(gens)


# ---------- oráculos de força bruta ----------

def count_aut_bruteforce(group: AbelianLGroup) -> int:
    _oracle_guard(group)
    return sum(1 for m in iterate_homomorphisms(group, group) if is_automorphism(m, group))


def count_surj_groups_bruteforce(source: AbelianLGroup, target: AbelianLGroup) -> int:
    _oracle_guard(source)
    _oracle_guard(target)
    return sum(1 for m in iterate_homomorphisms(source, target) if is_surjective(m, target))


def _structure(rows: List[List[int]], ell: int, precision: int) -> List[int]:
    """Expoentes do submódulo de (Z/ℓ^E)^width gerado pelas linhas."""
    if not rows:
        return []
    arr = np.array(rows, dtype=object)
    _, _, vals = smith_local(arr, ell, precision)
    return [precision - v for v in vals if v < precision]


def _torsion_log(exps: Sequence[int], n: int) -> int:
    return sum(min(e, n) for e in exps)


def tensor_torsion_orders_bruteforce(group: AbelianLGroup, n: int) -> Tuple[int, int]:
    """(|∧²G[ℓ^n]|, |Sym²G[ℓ^n]|) gerando ∧² por todos os x⊗y − y⊗x."""
    _oracle_guard(group)
    ell = group.ell
    r = group.rank
    if r == 0:
        return 1, 1
    big = group.exponent
    # G⊗G = ⊕ Z/ℓ^{min(e_i,e_j)} b_i⊗b_j, mergulhado em (Z/ℓ^big)^{r²}
    tensor_exps = [min(group.exponents[i], group.exponents[j]) for i in range(r) for j in range(r)]
    shifts = [ell ** (big - t) for t in tensor_exps]

    elements = [el.coords for el in iterate_elements(group)]
    rows: List[List[int]] = []
    for x, y in itertools.combinations(elements, 2):
        vec = []
        for idx in range(r * r):
            i, j = divmod(idx, r)
            coef = x[i] * y[j] - y[i] * x[j]
            vec.append((coef % ell ** tensor_exps[idx]) * shifts[idx])
        if any(vec):
            rows.append(vec)
        if len(rows) > 4 * r * r:
            rows = _echelon_rows(rows, ell, big)

    wedge_exps = _structure(rows, ell, big)

    # Sym² = (G⊗G)/∧²: relações ℓ^{t} e_idx junto com os geradores de ∧²
    relations = []
    for idx, t in enumerate(tensor_exps):
        vec = [0] * (r * r)
        vec[idx] = ell**t
        relations.append(vec)
    plain_rows = [[(v // shifts[k]) for k, v in enumerate(row)] for row in rows]
    arr = np.array(relations + plain_rows, dtype=object)
    _, _, vals = smith_local(arr, ell, big)
    sym_exps = [v for v in vals if 0 < v]

    return ell ** _torsion_log(wedge_exps, n), ell ** _torsion_log(sym_exps, n)


def _echelon_rows(rows: List[List[int]], ell: int, precision: int) -> List[List[int]]:
    """Forma escalonada de um conjunto de geradores mod ℓ^precision, com o mesmo span."""
    modulus = ell**precision
    pending = [[x % modulus for x in row] for row in rows]
    pending = [row for row in pending if any(row)]
    if not pending:
        return []
    width = len(pending[0])
    out: List[List[int]] = []
    for c in range(width):
        best: Optional[int] = None
        best_val = precision
        for idx, row in enumerate(pending):
            v = valuation(row[c], ell, precision)
            if v < best_val:
                best, best_val = idx, v
        if best is None:
            continue
        pivot = pending.pop(best)
        scale = ell**best_val
        # pivô normalizado: pivot[c] = ℓ^v
        inv = pow(pivot[c] // scale, -1, modulus)
        pivot = [(x * inv) % modulus for x in pivot]
        for row in pending:
            if row[c]:
                factor = row[c] // scale
                for k in range(width):
                    row[k] = (row[k] - factor * pivot[k]) % modulus
        out.append(pivot)
        pending = [row for row in pending if any(row)]
    return out + pending
