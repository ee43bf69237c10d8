"""Experimentos de Monte Carlo: histogramas de BEGs, momentos e comparação com a teoria."""

from __future__ import annotations

import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from scipy.stats import chi2

from beg import BegTriple, count_surj_triples
from core_groups import AbelianLGroup, OracleTooLargeError, count_surj_groups, groups_up_to
from matrix_models import MODELS, SampleConfig
from measures import MeasureParams, class_rows, moment_theory, qtmu_group, truncated_mass
from pipeline import SampleOutcome, decode_key, encode_key, key_group, process_sample
from settings import get_settings


logger = logging.getLogger(__name__)

MIN_EXPECTED = 5


@dataclass
class TripleHistogram:
    counts: Counter = field(default_factory=Counter)
    total: int = 0
    unresolved: int = 0
    escalations: int = 0
    meta: Dict = field(default_factory=dict)

    @property
    def resolved(self) -> int:
        return self.total - self.unresolved

    def add(self, outcome: SampleOutcome) -> None:
        self.total += 1
        self.escalations += outcome.escalations
        if outcome.unresolved:
            self.unresolved += 1
        else:
            self.counts[outcome.key] += 1

    def merge(self, other: "TripleHistogram") -> "TripleHistogram":
        merged = TripleHistogram(
            self.counts + other.counts,
            self.total + other.total,
            self.unresolved + other.unresolved,
            self.escalations + other.escalations,
            dict(self.meta),
        )
        for key, value in other.meta.items():
            merged.meta.setdefault(key, value)
        return merged

    def check(self) -> None:
        if sum(self.counts.values()) + self.unresolved != self.total:
            raise ValueError("Histograma inconsistente: Σcontagens + não resolvidas != total.")

    def frequency(self, key: str) -> float:
        return self.counts.get(key, 0) / self.resolved if self.resolved else 0.0

    def group_counts(self) -> Counter:
        out: Counter = Counter()
        for key, count in self.counts.items():
            out[key_group(key)] += count
        return out


def _run_chunk(cfg: SampleConfig, model: str, start: int, stop: int) -> TripleHistogram:
    hist = TripleHistogram()
    for index in range(start, stop):
        hist.add(process_sample(cfg, model, index))
    return hist


def _chunks(total: int, workers: int) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(total / (workers * 4)))
    return [(start, min(total, start + size)) for start in range(0, total, size)]


def run_experiment(
    cfg: SampleConfig,
    model: str,
    t: Optional[int] = None,
    workers: Optional[int] = None,
) -> TripleHistogram:
    """N amostras de `model`, cada uma com t quocientes aleatórios; determinístico dado o seed."""
    if model not in MODELS:
        raise ValueError(f"Modelo desconhecido: {model!r}.")
    if t is not None:
        cfg = replace(cfg, t=t)
    workers = workers or get_settings().workers or os.cpu_count() or 1
    meta = {"model": model, "ell": cfg.ell, "n": cfg.n, "g": cfg.g, "K": cfg.K, "q": cfg.q,
            "t": cfg.t, "seed": cfg.seed, "samples": cfg.samples, "max_resamples": cfg.max_resamples}
    hist = TripleHistogram(meta=meta)
    chunks = _chunks(cfg.samples, workers)
    started = time.perf_counter()

    if workers <= 1 or len(chunks) <= 1:
        for start, stop in chunks:
            hist = hist.merge(_run_chunk(cfg, model, start, stop))
    else:
        logger.info("Distribuindo %d amostras em %d blocos para %d processos", cfg.samples, len(chunks), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, model, start, stop) for start, stop in chunks]
            for future in futures:
                hist = hist.merge(future.result())

    hist.meta["runtime"] = round(time.perf_counter() - started, 3)
    hist.check()
    if hist.unresolved:
        logger.info("%d de %d amostras sem resolução de precisão", hist.unresolved, hist.total)
    return hist


# ---------- momentos ----------

@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    low: float
    high: float
    exact: bool

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return self.low - sigmas * self.stderr <= target <= self.high + sigmas * self.stderr


@lru_cache(maxsize=4096)
def _surj_for_key(key: str, dst_key: str) -> Tuple[int, int]:
    """(mínimo, máximo) de #Surj(amostra, dst); intervalo quando a contagem excede o limite."""
    src, _ = decode_key(key)
    dst, _ = decode_key(dst_key)
    try:
        count = count_surj_triples(src, dst)
        return count, count
    except OracleTooLargeError:
        return 0, count_surj_groups(src.group, dst.group)


def estimate_moment(h: TripleHistogram, dst: BegTriple) -> MomentEstimate:
    """Média amostral de #Surj(*, dst) sobre as amostras resolvidas."""
    if dst.group.is_trivial():
        return MomentEstimate(1.0, 0.0, 1.0, 1.0, True)
    if not h.resolved:
        raise ValueError("Histograma sem amostras resolvidas.")
    dst_key = encode_key(dst)
    low = high = square = 0.0
    for key, count in h.counts.items():
        lo, hi = _surj_for_key(key, dst_key)
        low += lo * count
        high += hi * count
        square += lo * lo * count
    n = h.resolved
    mean = low / n
    variance = max(0.0, square / n - mean * mean)
    stderr = math.sqrt(variance / (n - 1)) if n > 1 else 0.0
    return MomentEstimate(mean, stderr, low / n, high / n, low == high)


# ---------- comparação ----------

@dataclass(frozen=True)
class ComparisonRow:
    key: str
    label: str
    corank: Optional[int]
    observed: int
    expected: float
    z: float


@dataclass
class ComparisonReport:
    rows: List[ComparisonRow]
    total: int
    resolved: int
    unresolved: int
    tv: float
    chi2: float
    dof: int
    p_value: float
    support_mass: float
    observed_support: float
    out_of_support: float
    runtime: float
    seed: Optional[int]
    params: MeasureParams
    bound: int
    moments: Dict[str, Dict] = field(default_factory=dict)

    @property
    def unresolved_fraction(self) -> float:
        return self.unresolved / self.total if self.total else 0.0


def _z(observed: int, p: float, n: int) -> float:
    if n == 0:
        return 0.0
    if p <= 0.0 or p >= 1.0:
        return 0.0 if observed == round(n * p) else math.inf
    return (observed - n * p) / math.sqrt(n * p * (1 - p))


def _support_rows(h: TripleHistogram, p: MeasureParams, bound: int) -> List[Tuple[str, str, Optional[int], int, float]]:
    """(chave, rótulo, corank, observado, probabilidade) para cada classe de |G| <= bound."""
    groups_seen = h.group_counts()
    rows = []
    for group in groups_up_to(p.ell, bound):
        try:
            for row in class_rows(group, p):
                key = encode_key(row.triple)
                rows.append((key, row.triple.describe(), row.corank, h.counts.get(key, 0), row.measure.value))
        except OracleTooLargeError:
            # grupo inteiro vira uma linha só
            observed = groups_seen.get(group, 0)
            rows.append((f"group|{p.ell}|{p.n}|{','.join(map(str, group.exponents))}", group.label(), None,
                         observed, qtmu_group(group, p).value))
    return rows


def compare(
    h: TripleHistogram,
    p: MeasureParams,
    bound: int,
    runtime: Optional[float] = None,
) -> ComparisonReport:
    support = _support_rows(h, p, bound)
    n = h.resolved
    rows = [ComparisonRow(key, label, corank, obs, prob, _z(obs, prob, n)) for key, label, corank, obs, prob in support]

    support_mass = truncated_mass(p, bound)
    observed_support = sum(r.observed for r in rows) / n if n else 0.0
    tv = 0.5 * sum(abs((r.observed / n if n else 0.0) - r.expected) for r in rows)

    # χ²: classes com E < 5 agrupadas com a massa fora do suporte
    pooled_obs = n - sum(r.observed for r in rows)
    pooled_exp = n * max(0.0, 1.0 - support_mass)
    stat, bins = 0.0, 0
    for r in rows:
        expected = n * r.expected
        if expected >= MIN_EXPECTED:
            stat += (r.observed - expected) ** 2 / expected
            bins += 1
        else:
            pooled_obs += r.observed
            pooled_exp += expected
    if pooled_exp > 0:
        stat += (pooled_obs - pooled_exp) ** 2 / pooled_exp
        bins += 1
    dof = max(bins - 1, 0)
    p_value = float(chi2.sf(stat, dof)) if dof > 0 else 1.0

    return ComparisonReport(
        rows=rows,
        total=h.total,
        resolved=n,
        unresolved=h.unresolved,
        tv=tv,
        chi2=stat,
        dof=dof,
        p_value=p_value,
        support_mass=support_mass,
        observed_support=observed_support,
        out_of_support=1.0 - observed_support if n else 0.0,
        runtime=runtime if runtime is not None else float(h.meta.get("runtime", 0.0)),
        seed=h.meta.get("seed"),
        params=p,
        bound=bound,
    )


@dataclass(frozen=True)
class Thresholds:
    z_max: float = 3.0
    alpha: float = 0.01
    max_unresolved: float = 0.001
    min_expected: float = 25.0


def acceptance_failures(report: ComparisonReport, thresholds: Thresholds = Thresholds()) -> List[str]:
    failures = []
    for row in report.rows:
        if report.resolved * row.expected >= thresholds.min_expected and abs(row.z) > thresholds.z_max:
            failures.append(f"z = {row.z:.2f} em {row.label}")
    if report.dof and report.p_value < thresholds.alpha:
        failures.append(f"χ² = {report.chi2:.2f} (gl {report.dof}), p = {report.p_value:.4f} < {thresholds.alpha}")
    if report.unresolved_fraction > thresholds.max_unresolved:
        failures.append(f"{report.unresolved} amostras sem resolução ({report.unresolved_fraction:.4%})")
    return failures


def histogram_tv(h1: TripleHistogram, h2: TripleHistogram, keys: Optional[Iterable[str]] = None) -> float:
    """Distância de variação total entre dois histogramas (restrita a `keys` se dado)."""
    keys = set(keys) if keys is not None else set(h1.counts) | set(h2.counts)
    return 0.5 * sum(abs(h1.frequency(k) - h2.frequency(k)) for k in keys)


def support_keys(p: MeasureParams, bound: int) -> List[str]:
    return [encode_key(row.triple) for g in groups_up_to(p.ell, bound) for row in class_rows(g, p)]


@dataclass(frozen=True)
class ConditionalRow:
    key: str
    count: int
    frequency: float
    stderr: float


def conditional_frequencies(h: TripleHistogram, group: AbelianLGroup) -> List[ConditionalRow]:
    """P(classe | G) empírica com erro-padrão binomial."""
    keys = [k for k in h.counts if key_group(k) == group]
    total = sum(h.counts[k] for k in keys)
    rows = []
    for key in sorted(keys):
        freq = h.counts[key] / total if total else 0.0
        se = math.sqrt(freq * (1 - freq) / total) if total else 0.0
        rows.append(ConditionalRow(key, h.counts[key], freq, se))
    return rows


def convergence_diagnostic(
    cfg: SampleConfig,
    model: str,
    gs: Iterable[int],
    p: MeasureParams,
    bound: int,
    workers: Optional[int] = None,
) -> List[Tuple[int, float]]:
    """TV(empírico, teoria truncada) para vários g; só relata, nunca falha."""
    out = []
    for g in gs:
        hist = run_experiment(replace(cfg, g=g), model, workers=workers)
        out.append((g, compare(hist, p, bound).tv))
    for (g1, tv1), (g2, tv2) in zip(out, out[1:]):
        if tv2 > tv1:
            logger.warning("TV aumentou de g=%d (%.4f) para g=%d (%.4f)", g1, tv1, g2, tv2)
    return out


def moment_rows(h: TripleHistogram, targets: Iterable[BegTriple], p: MeasureParams) -> Dict[str, Dict]:
    out = {}
    for dst in targets:
        est = estimate_moment(h, dst)
        theory = moment_theory(dst, p)
        out[encode_key(dst)] = {
            "target": dst.describe(),
            "theory": str(theory),
            "mean": est.mean,
            "stderr": est.stderr,
            "interval": [est.low, est.high],
            "exact": est.exact,
            "within_3se": est.within(float(Fraction(theory))),
        }
    return out
