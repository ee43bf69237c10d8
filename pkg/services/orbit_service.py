"""Órbitas de Aut(G) sobre os BEGs de um grupo, via grafo de geradores."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Set, Tuple

import networkx as nx
import numpy as np

from beg import BegTriple, RawKey, count_begs, iterate_raw_begs, pairs, push_raw
from core_groups import (
    AbelianLGroup,
    HomMatrix,
    OracleTooLargeError,
    automorphism_generators,
    count_aut,
    is_automorphism,
    iterate_homomorphisms,
)
from linalg import dtype_for
from settings import get_settings


logger = logging.getLogger(__name__)


@dataclass
class OrbitTable:
    group: AbelianLGroup
    n: int
    aut_order: int
    canonical: Dict[RawKey, RawKey]
    sizes: Dict[RawKey, int]

    def lookup(self, key: RawKey) -> Tuple[RawKey, int]:
        try:
            rep = self.canonical[key]
        except KeyError as exc:
            raise ValueError("Chave fora do conjunto de BEGs do grupo.") from exc
        return rep, self.sizes[rep]

    def stabilizer_order(self, key: RawKey) -> int:
        _, size = self.lookup(key)
        return self.aut_order // size

    def classes(self) -> List[Tuple[RawKey, int]]:
        return sorted(self.sizes.items())


def check_canonical_caps(group: AbelianLGroup, n: int) -> int:
    settings = get_settings()
    if group.rank > settings.canonical_rank or group.log_order > settings.canonical_order:
        raise OracleTooLargeError(
            f"canonicalization cap: {group.label()} excede posto {settings.canonical_rank} "
            f"ou ordem {group.ell}^{settings.canonical_order}."
        )
    total = count_begs(group, n)
    if total > settings.canonical_classes:
        raise OracleTooLargeError(
            f"canonicalization cap: {total} BEGs sobre {group.label()} (limite {settings.canonical_classes})."
        )
    return total


def _moduli(group: AbelianLGroup, n: int) -> List[int]:
    ell, exps = group.ell, group.exponents
    mods = [ell ** min(exps[i], exps[j]) for i, j in pairs(group.rank)]
    for _ in range(group.rank):
        mods.extend(ell ** min(e, n) for e in exps)
    return mods


def _linear_action(group: AbelianLGroup, n: int, hom: HomMatrix) -> np.ndarray:
    """Matriz W com (chave · W) mod módulos = chave do pushforward."""
    width = len(pairs(group.rank)) + group.rank**2
    split = len(pairs(group.rank))
    rows = []
    for u in range(width):
        unit = [0] * width
        unit[u] = 1
        c, p = push_raw(group, group, n, hom, (tuple(unit[:split]), tuple(unit[split:])))
        rows.append(list(c) + list(p))
    return np.array(rows, dtype=object)


@lru_cache(maxsize=64)
def orbit_table(group: AbelianLGroup, n: int) -> OrbitTable:
    total = check_canonical_caps(group, n)
    keys = list(iterate_raw_begs(group, n))
    index = {key: pos for pos, key in enumerate(keys)}

    graph = nx.Graph()
    graph.add_nodes_from(range(len(keys)))

    split = len(pairs(group.rank))
    mods = _moduli(group, n)
    if mods:
        dtype = dtype_for(max(mods), len(mods))
        modulus_row = np.array(mods, dtype=object).astype(dtype)
        flat = np.array([c + p for c, p in keys], dtype=object).astype(dtype)
        for hom in automorphism_generators(group):
            w = _linear_action(group, n, hom).astype(dtype)
            images = np.dot(flat, w) % modulus_row
            for pos, row in enumerate(images.tolist()):
                row = tuple(int(v) for v in row)
                target = index[(row[:split], row[split:])]
                if target != pos:
                    graph.add_edge(pos, target)

    canonical: Dict[RawKey, RawKey] = {}
    sizes: Dict[RawKey, int] = {}
    for component in nx.connected_components(graph):
        members = [keys[pos] for pos in component]
        rep = min(members)
        sizes[rep] = len(members)
        for key in members:
            canonical[key] = rep

    aut_order = count_aut(group)
    logger.debug("Órbitas de %s (n=%d): %d BEGs, %d classes", group.label(), n, total, len(sizes))
    return OrbitTable(group, n, aut_order, canonical, sizes)


def orbit_bruteforce(t: BegTriple) -> Set[RawKey]:
    """Órbita de t aplicando todos os automorfismos de G."""
    return {
        push_raw(t.group, t.group, t.n, hom, t.key)
        for hom in iterate_homomorphisms(t.group, t.group)
        if is_automorphism(hom, t.group)
    }


def isomorphism_classes(group: AbelianLGroup, n: int) -> List[Tuple[BegTriple, int]]:
    """(representante canônico, tamanho da órbita) para cada classe de BEG sobre G."""
    table = orbit_table(group, n)
    return [(BegTriple.from_raw(group, n, key, validate=False), size) for key, size in table.classes()]
