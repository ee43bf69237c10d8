"""Medidas de Cohen–Lenstra com raízes da unidade: μ e Q^tμ em forma fechada.

Cada valor é um racional exato vezes uma constante real nomeada (c_ℓ ou
∏_{i>t}(1+ℓ^{-i})^{-1}); só a constante passa por truncamento com tolerância.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Tuple

from sympy import isprime

from beg import (
    BegTriple,
    R_n,
    count_allowable_psi_by_corank,
    count_aut_triple,
    h_G,
    psi_corank,
)
from core_groups import (
    AbelianLGroup,
    OracleTooLargeError,
    c_ell,
    count_aut,
    groups_up_to,
    pochhammer,
    sym2_torsion_order,
    tail_product,
    wedge2_torsion_order,
)
from services.orbit_service import isomorphism_classes
from settings import get_settings


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasureParams:
    ell: int
    n: int
    t: int = 0
    tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.ell < 3 or not isprime(self.ell):
            raise ValueError(f"ℓ precisa ser um primo ímpar, recebido {self.ell}.")
        if self.n < 1:
            raise ValueError("n precisa ser >= 1.")
        if self.t < 0:
            raise ValueError("t precisa ser >= 0.")
        if not self.tol > 0:
            raise ValueError("tol precisa ser > 0.")


@dataclass(frozen=True)
class MeasureValue:
    rational: Fraction
    constant: float
    label: str

    @property
    def value(self) -> float:
        return float(self.rational) * self.constant

    def __str__(self) -> str:
        return f"{self.rational} · {self.label} ≈ {self.value:.12g}"


def _tail(p: MeasureParams) -> MeasureValue:
    return MeasureValue(Fraction(1), tail_product(p.ell, p.t, p.tol), f"∏_(i>{p.t})(1+{p.ell}^-i)^-1")


def _x(ell: int) -> Fraction:
    return Fraction(1, ell)


def _q_ratio(ell: int, t: int, s: int) -> Fraction:
    """(ℓ^{-1})_t / (ℓ^{-1})_{t-s}."""
    x = _x(ell)
    return pochhammer(x, x, t) / pochhammer(x, x, t - s)


def _check_same(group: AbelianLGroup, p: MeasureParams) -> None:
    if group.ell != p.ell:
        raise ValueError(f"Grupo sobre ℓ={group.ell}, parâmetros com ℓ={p.ell}.")


def mu_point(triple: BegTriple, p: MeasureParams) -> MeasureValue:
    if p.t != 0:
        raise ValueError("mu_point exige t = 0; use qtmu_point.")
    _check_same(triple.group, p)
    constant = c_ell(p.ell, p.tol)
    if psi_corank(triple.psi) > 0:
        return MeasureValue(Fraction(0), constant, "c_ℓ")
    denom = count_aut_triple(triple) * sym2_torsion_order(triple.group, p.n)
    return MeasureValue(Fraction(1, denom), constant, "c_ℓ")


def qtmu_point(triple: BegTriple, p: MeasureParams) -> MeasureValue:
    _check_same(triple.group, p)
    tail = _tail(p)
    s = psi_corank(triple.psi)
    if s > p.t:
        return MeasureValue(Fraction(0), tail.constant, tail.label)
    group = triple.group
    denom = count_aut_triple(triple) * sym2_torsion_order(group, p.n) * group.order**p.t
    return MeasureValue(_q_ratio(p.ell, p.t, s) / denom, tail.constant, tail.label)


def mu_group(group: AbelianLGroup, p: MeasureParams) -> MeasureValue:
    if p.t != 0:
        raise ValueError("mu_group exige t = 0; use qtmu_group.")
    _check_same(group, p)
    tail = _tail(p)
    rational = Fraction(wedge2_torsion_order(group, p.n)) * h_G(group, p.n) / count_aut(group)
    return MeasureValue(rational, tail.constant, tail.label)


def qtmu_group(group: AbelianLGroup, p: MeasureParams) -> MeasureValue:
    _check_same(group, p)
    tail = _tail(p)
    total = Fraction(0)
    for s in range(min(p.t, group.rank) + 1):
        total += count_allowable_psi_by_corank(group, p.n, s) * _q_ratio(p.ell, p.t, s)
    denom = count_aut(group) * sym2_torsion_order(group, p.n) * group.order**p.t
    rational = group.ell ** R_n(group, p.n) * total / denom
    return MeasureValue(rational, tail.constant, tail.label)


def malle_group(group: AbelianLGroup, p: MeasureParams) -> MeasureValue:
    """Fórmula de Malle para n = 1."""
    if p.n != 1:
        raise ValueError("malle_group só está definida para n = 1.")
    _check_same(group, p)
    tail = _tail(p)
    x = _x(p.ell)
    r = group.rank
    rational = Fraction(p.ell ** comb(r, 2)) * pochhammer(x, x, r + p.t) / pochhammer(x, x, p.t)
    rational /= count_aut(group) * group.order**p.t
    return MeasureValue(rational, tail.constant, tail.label)


def moment_theory(dst: BegTriple, p: MeasureParams) -> Fraction:
    """E #Surj(*, dst) sob Q^tμ."""
    _check_same(dst.group, p)
    return Fraction(1, dst.group.order**p.t * sym2_torsion_order(dst.group, p.n))


@dataclass(frozen=True)
class ClassRow:
    triple: BegTriple
    orbit_size: int
    corank: int
    measure: MeasureValue
    conditional: float


def class_rows(group: AbelianLGroup, p: MeasureParams) -> List[ClassRow]:
    """Uma linha por classe de isomorfismo de BEG sobre G, com Q^tμ(classe)/Q^tμ(G)."""
    _check_same(group, p)
    classes = isomorphism_classes(group, p.n)
    values = [qtmu_point(triple, p) for triple, _ in classes]
    total = sum((v.rational for v in values), Fraction(0))
    rows = []
    for (triple, size), value in zip(classes, values):
        conditional = float(value.rational / total) if total else 0.0
        rows.append(ClassRow(triple, size, psi_corank(triple.psi), value, conditional))
    return rows


def class_sum(group: AbelianLGroup, p: MeasureParams) -> MeasureValue:
    """Σ sobre classes de isomorfismo de qtmu_point."""
    rows = class_rows(group, p)
    tail = _tail(p)
    return MeasureValue(sum((row.measure.rational for row in rows), Fraction(0)), tail.constant, tail.label)


def truncated_mass(p: MeasureParams, bound: int) -> float:
    """Σ_{|G| <= bound} Q^tμ(G)."""
    cap = get_settings().oracle_cap
    if bound >= p.ell ** (cap + 1):
        raise OracleTooLargeError(f"oracle too large: bound {bound} excede {p.ell}^{cap}.")
    total = sum((qtmu_group(g, p).rational for g in groups_up_to(p.ell, bound)), Fraction(0))
    return float(total) * tail_product(p.ell, p.t, p.tol)


def conditionals(group: AbelianLGroup, p: MeasureParams) -> List[Tuple[BegTriple, float]]:
    """Tabela Q^tμ(G, ω, ψ) / Q^tμ(G) por classe."""
    return [(row.triple, row.conditional) for row in class_rows(group, p)]
