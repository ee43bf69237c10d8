"""Uma amostra de ponta a ponta: matriz -> cokernel -> Q^t -> chave de histograma."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from beg import BegTriple, canonicalize
from core_groups import AbelianLGroup, OracleTooLargeError
from matrix_models import (
    PrecisionError,
    SampleConfig,
    apply_Q_sampler,
    extract_with_escalation,
    sample_matrix,
    sample_rng,
)


logger = logging.getLogger(__name__)

CANONICAL = "c"
COARSE = "r"


@dataclass(frozen=True)
class SampleOutcome:
    key: Optional[str]
    coarse: bool = False
    escalations: int = 0

    @property
    def unresolved(self) -> bool:
        return self.key is None


def _join(values) -> str:
    return ",".join(str(v) for v in values)


def _split(text: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v != "")


def encode_key(triple: BegTriple, coarse: bool = False) -> str:
    """Chave textual estável; "c" = forma canônica, "r" = tripla crua (coarse)."""
    flag = COARSE if coarse else CANONICAL
    cvals, flat = triple.key
    return "|".join(
        [flag, str(triple.ell), str(triple.n), _join(triple.group.exponents), _join(cvals), _join(flat)]
    )


def decode_key(key: str) -> Tuple[BegTriple, bool]:
    try:
        flag, ell, n, exps, cvals, flat = key.split("|")
    except ValueError as exc:
        raise ValueError(f"Chave de histograma malformada: {key!r}.") from exc
    if flag not in (CANONICAL, COARSE):
        raise ValueError(f"Marcador de chave desconhecido: {flag!r}.")
    group = AbelianLGroup(int(ell), _split(exps))
    triple = BegTriple.from_raw(group, int(n), (_split(cvals), _split(flat)))
    return triple, flag == COARSE


def key_group(key: str) -> AbelianLGroup:
    _, ell, _, exps, _, _ = key.split("|")
    return AbelianLGroup(int(ell), _split(exps))


def _build_key(triple: BegTriple) -> Tuple[str, bool]:
    try:
        return encode_key(canonicalize(triple)), False
    except OracleTooLargeError:
        logger.info("Classe acima do limite de canonicalização: %s", triple.group.label())
        return encode_key(triple, coarse=True), True


def process_sample(cfg: SampleConfig, model: str, index: int) -> SampleOutcome:
    """Sorteia a amostra `index` do fluxo de `cfg.seed` e devolve sua chave."""
    rng = sample_rng(cfg.seed, index)
    matrix = sample_matrix(cfg, model, rng)
    try:
        triple, escalations = extract_with_escalation(matrix, cfg, model, rng)
    except PrecisionError as exc:
        logger.debug("Amostra %d sem resolução em K=%d: %s", index, exc.precision, exc.valuations)
        return SampleOutcome(None, escalations=cfg.max_resamples)
    triple = apply_Q_sampler(triple, cfg.t, rng)
    key, coarse = _build_key(triple)
    return SampleOutcome(key, coarse, escalations)
