# coding/montecarlo.py
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar, Union

import numpy as np

from bloch.exceptions import PreconditionError

T = TypeVar("T")

DEFAULT_CHUNK = 10_000

Seed = Union[int, np.random.SeedSequence]


def as_seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    s = int(seed)
    if s != seed or s < 0 or s >= 2 ** 64:
        raise PreconditionError(f"semente precisa ser inteiro de 64 bits sem sinal: {seed!r}")
    return np.random.SeedSequence(s)


def chunk_sizes(total: int, chunk_size: int = DEFAULT_CHUNK) -> List[int]:
    """Tamanhos fixos dos lotes; só o último pode ser menor."""
    if total < 1 or chunk_size < 1:
        raise PreconditionError("total e chunk_size precisam ser ≥ 1")
    full, rest = divmod(int(total), int(chunk_size))
    return [int(chunk_size)] * full + ([rest] if rest else [])


def map_chunks(
    fn: Callable[[np.random.Generator, int], T],
    total: int,
    seed: Seed,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> List[T]:
    """
    Roda `fn(rng, tamanho)` por lote, cada lote com seu gerador derivado de
    SeedSequence(seed).spawn. O resultado vem na ordem dos lotes, então não
    depende do número de workers.
    """
    sizes = chunk_sizes(total, chunk_size)
    children = as_seed_sequence(seed).spawn(len(sizes))
    gens = [np.random.default_rng(c) for c in children]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, gens, sizes))
    return [fn(g, s) for g, s in zip(gens, sizes)]


def fsum_vectors(parts: Iterable[np.ndarray], dim: int = 3) -> np.ndarray:
    """Soma componente a componente com math.fsum, na ordem dada."""
    cols: List[List[float]] = [[] for _ in range(dim)]
    for p in parts:
        for k in range(dim):
            cols[k].append(float(p[k]))
    return np.array([math.fsum(c) for c in cols])
