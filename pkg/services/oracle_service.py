# services/oracle_service.py
"""Suítes de oráculos: fórmulas fechadas contra enumeração por força bruta."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from beg import (
    count_allowable_psi,
    count_allowable_psi_by_corank,
    count_aut_triple,
    count_aut_triple_bruteforce,
    count_begs,
    count_omega_for_zero_psi,
    enumerate_begs_bruteforce,
    h_G,
    is_allowable,
    psi_corank,
    PsiMap,
)
from core_groups import (
    AbelianLGroup,
    OracleTooLargeError,
    count_aut,
    count_aut_bruteforce,
    count_surj_groups,
    count_surj_groups_bruteforce,
    groups_up_to,
    sym2_torsion_order,
    tensor_torsion_orders_bruteforce,
    wedge2_torsion_order,
)
from measures import MeasureParams, class_sum, malle_group, mu_group, qtmu_group
from services.orbit_service import isomorphism_classes


logger = logging.getLogger(__name__)

DEFAULT_EXPONENTS: Tuple[Tuple[int, ...], ...] = ((1,), (2,), (1, 1), (2, 1), (2, 2), (1, 1, 1))
DEFAULT_NS = (1, 2, 3)
DEFAULT_TS = (0, 1, 2)


@dataclass(frozen=True)
class OracleCheck:
    case: str
    passed: bool
    expected: str = ""
    actual: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: List[OracleCheck] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if any(not c.passed for c in self.checks):
            return "FAIL"
        if not self.checks:
            return "SKIP"
        return "PASS"

    @property
    def failures(self) -> List[OracleCheck]:
        return [c for c in self.checks if not c.passed]


@dataclass(frozen=True)
class OracleCase:
    ell: int
    groups: Tuple[AbelianLGroup, ...]
    ns: Tuple[int, ...] = DEFAULT_NS
    ts: Tuple[int, ...] = DEFAULT_TS
    rmax: int = 4
    tmax: int = 3

    @classmethod
    def default(cls, ell: int, **kwargs) -> "OracleCase":
        return cls(ell, tuple(AbelianLGroup(ell, e) for e in DEFAULT_EXPONENTS), **kwargs)


def _check(case: str, expected, actual) -> OracleCheck:
    return OracleCheck(case, expected == actual, str(expected), str(actual))


def _case(group: AbelianLGroup, n: Optional[int] = None, t: Optional[int] = None) -> str:
    parts = [group.label()]
    if n is not None:
        parts.append(f"n={n}")
    if t is not None:
        parts.append(f"t={t}")
    return " ".join(parts)


# ---------- suítes ----------

def suite_begs(case: OracleCase, result: SuiteResult) -> None:
    """Contagem de BEGs e fibra constante: todo ψ admissível tem ℓ^{R_n} ω compatíveis."""
    for group in case.groups:
        for n in case.ns:
            label = _case(group, n)
            try:
                triples = enumerate_begs_bruteforce(group, n)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            result.checks.append(_check(f"{label} #BEG = {len(triples)}", len(triples), count_begs(group, n)))
            fibres = Counter(t.psi.matrix for t in triples)
            expected = count_omega_for_zero_psi(group, n)
            odd = [(psi, size) for psi, size in fibres.items() if size != expected]
            sample = f"ψ={list(map(list, odd[0][0]))}: {odd[0][1]}" if odd else str(expected)
            result.checks.append(OracleCheck(f"{label} fibra constante", not odd, str(expected), sample))
            bad = [psi for psi in fibres if not is_allowable(PsiMap(group, n, psi))]
            result.checks.append(OracleCheck(
                f"{label} ψ compatíveis são admissíveis", not bad, "nenhum", str(list(map(list, bad[0]))) if bad else "nenhum"
            ))


def suite_allowable(case: OracleCase, result: SuiteResult) -> None:
    for group in case.groups:
        for n in case.ns:
            label = _case(group, n)
            try:
                by_corank = {
                    s: count_allowable_psi_by_corank(group, n, s, bruteforce=True) for s in range(group.rank + 1)
                }
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            result.checks.append(_check(f"{label} #admissíveis", sum(by_corank.values()), count_allowable_psi(group, n)))
            for s in range(group.rank + 1):
                result.checks.append(_check(f"{label} A_{s}", by_corank.get(s, 0), count_allowable_psi_by_corank(group, n, s)))


def suite_rn(case: OracleCase, result: SuiteResult) -> None:
    for group in case.groups:
        for n in case.ns:
            label = _case(group, n)
            try:
                triples = enumerate_begs_bruteforce(group, n)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            zero = sum(1 for t in triples if not any(any(row) for row in t.psi.matrix))
            result.checks.append(_check(f"{label} ℓ^R_n", zero, count_omega_for_zero_psi(group, n)))


def suite_hg(case: OracleCase, result: SuiteResult) -> None:
    for group in case.groups:
        for n in case.ns:
            label = _case(group, n)
            try:
                triples = enumerate_begs_bruteforce(group, n)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            invertible = sum(1 for t in triples if psi_corank(t.psi) == 0)
            result.checks.append(_check(f"{label} h_G", Fraction(invertible, len(triples)), h_G(group, n)))


def suite_classes(case: OracleCase, result: SuiteResult) -> None:
    """Valor agregado por grupo contra a soma pontual sobre classes de isomorfismo."""
    for group in case.groups:
        for n in case.ns:
            try:
                isomorphism_classes(group, n)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{_case(group, n)}: {exc}")
                continue
            p0 = MeasureParams(case.ell, n, 0)
            result.checks.append(_check(f"{_case(group, n)} μ(G)", mu_group(group, p0).rational, class_sum(group, p0).rational))
            for t in case.ts:
                p = MeasureParams(case.ell, n, t)
                result.checks.append(_check(f"{_case(group, n, t)} Q^tμ(G)", qtmu_group(group, p).rational, class_sum(group, p).rational))


def suite_malle(case: OracleCase, result: SuiteResult) -> None:
    groups = [g for g in groups_up_to(case.ell, case.ell**case.rmax) if g.rank <= case.rmax]
    for group in groups:
        for t in range(case.tmax + 1):
            p = MeasureParams(case.ell, 1, t)
            result.checks.append(_check(_case(group, 1, t), malle_group(group, p).rational, qtmu_group(group, p).rational))


def suite_tensor(case: OracleCase, result: SuiteResult) -> None:
    for group in case.groups:
        for n in case.ns:
            label = _case(group, n)
            try:
                observed = tensor_torsion_orders_bruteforce(group, n)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            expected = (wedge2_torsion_order(group, n), sym2_torsion_order(group, n))
            result.checks.append(_check(f"{label} |∧²[ℓ^n]|, |Sym²[ℓ^n]|", observed, expected))


def suite_aut(case: OracleCase, result: SuiteResult) -> None:
    for group in case.groups:
        try:
            result.checks.append(_check(f"{group.label()} |Aut|", count_aut_bruteforce(group), count_aut(group)))
        except OracleTooLargeError as exc:
            result.skipped.append(f"{group.label()}: {exc}")
            continue
        n = case.ns[0]
        try:
            for triple, _ in isomorphism_classes(group, n):
                result.checks.append(_check(
                    f"{triple.describe()} |Aut(t)|", count_aut_triple_bruteforce(triple), count_aut_triple(triple)
                ))
        except OracleTooLargeError as exc:
            result.skipped.append(f"{_case(group, n)}: {exc}")


def suite_surj(case: OracleCase, result: SuiteResult) -> None:
    for src in case.groups:
        for dst in case.groups:
            label = f"{src.label()} ->> {dst.label()}"
            try:
                brute = count_surj_groups_bruteforce(src, dst)
            except OracleTooLargeError as exc:
                result.skipped.append(f"{label}: {exc}")
                continue
            result.checks.append(_check(label, brute, count_surj_groups(src, dst)))


SUITES: Dict[str, Callable[[OracleCase, SuiteResult], None]] = {
    "begs": suite_begs,
    "allowable": suite_allowable,
    "rn": suite_rn,
    "hg": suite_hg,
    "classes": suite_classes,
    "malle": suite_malle,
    "tensor": suite_tensor,
    "aut": suite_aut,
    "surj": suite_surj,
}


def run_suites(names: Iterable[str], case: OracleCase) -> List[SuiteResult]:
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"Suíte desconhecida: {name!r}. Disponíveis: {', '.join(SUITES)}.")
        result = SuiteResult(name)
        SUITES[name](case, result)
        for notice in result.skipped:
            logger.warning("Suíte %s: caso ignorado (%s)", name, notice)
        logger.info("Suíte %s: %s (%d verificações)", name, result.status, len(result.checks))
        results.append(result)
    return results


def format_results(results: Sequence[SuiteResult]) -> List[str]:
    lines = []
    for result in results:
        lines.append(f"[{result.status}] {result.suite}: {len(result.checks)} verificações")
        for check in result.checks:
            if check.passed:
                lines.append(f"  ✅ {check.case}")
            else:
                lines.append(f"  ⚠️ contraexemplo {check.case}: esperado {check.expected}, obtido {check.actual}")
        for notice in result.skipped:
            lines.append(f"  ignorado: {notice}")
    return lines
