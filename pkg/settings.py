"""Configuração por variáveis de ambiente, carregada uma única vez."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, TypeVar

import dotenv


dotenv.load_dotenv()

T = TypeVar("T")


@dataclass(frozen=True)
class Settings:
    tol: float = 1e-12
    oracle_cap: int = 8
    enumeration_cap: int = 2_000_000
    canonical_rank: int = 4
    canonical_order: int = 6
    canonical_classes: int = 50_000
    workers: Optional[int] = None
    reports_dir: str = "reports"


def _read(name: str, cast: Callable[[str], T], default: T) -> T:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = cast(raw.strip())
    except ValueError as exc:
        raise RuntimeError(f"{name} inválida no ambiente: {raw!r}.") from exc
    if isinstance(value, (int, float)) and value <= 0:
        raise RuntimeError(f"{name} precisa ser positiva, recebido {raw!r}.")
    return value


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings(
        tol=_read("BEG_TOL", float, 1e-12),
        oracle_cap=_read("BEG_ORACLE_CAP", int, 8),
        enumeration_cap=_read("BEG_ENUMERATION_CAP", int, 2_000_000),
        canonical_rank=_read("BEG_CANONICAL_RANK", int, 4),
        canonical_order=_read("BEG_CANONICAL_ORDER", int, 6),
        canonical_classes=_read("BEG_CANONICAL_CLASSES", int, 50_000),
        workers=_read("BEG_WORKERS", int, None),
        reports_dir=os.getenv("BEG_REPORTS_DIR") or "reports",
    )
