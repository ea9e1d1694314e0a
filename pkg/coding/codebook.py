# coding/codebook.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from bloch.exceptions import PreconditionError, ResourceLimitError
from bloch.states import BlochPoint, vectors_of

from .typicality import JointTables, TypicalityParams, check_distribution

logger = logging.getLogger(__name__)

# n·rate ≤ 24 bits, K ≤ 2^24 palavras
MAX_CODE_BITS = 24.0
# elementos do tensor (blocos × palavras × n) por lote no codificador
_ENCODE_BATCH = 2_000_000
FAILURE = -1


@dataclass(frozen=True, eq=False)
class Codebook:
    """K palavras-código de n índices de calota; rate_bits = log₂(K)/n."""

    codewords: np.ndarray
    cap_count: int

    def __post_init__(self):
        c = np.array(self.codewords, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise PreconditionError(f"codebook precisa ser K x n, veio {c.shape}")
        if np.any(c < 0) or np.any(c >= self.cap_count):
            raise PreconditionError("palavra-código com índice fora da partição")
        c.setflags(write=False)
        object.__setattr__(self, "codewords", c)

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[1])

    @property
    def rate_bits(self) -> float:
        return math.log2(self.size) / self.n


def code_size(n: int, rate_bits: float) -> int:
    """K = round(2^{n·rate}), com a trava de 24 bits."""
    rate = float(rate_bits)
    if not math.isfinite(rate) or rate < 0.0:
        raise PreconditionError(f"taxa precisa ser ≥ 0: {rate_bits!r}")
    exponent = n * rate
    if exponent > MAX_CODE_BITS:
        raise ResourceLimitError(
            f"n·rate = {exponent:.2f} bits excede o limite de {MAX_CODE_BITS:.0f} bits "
            f"(K ≤ 2^{MAX_CODE_BITS:.0f} palavras-código)"
        )
    return max(1, int(round(2.0 ** exponent)))


def generate_codebook(
    params: TypicalityParams, rate_bits: float, marginal: np.ndarray, seed: int
) -> Codebook:
    """Palavras-código com letras i.i.d. de `marginal`, reprodutíveis pela semente."""
    k = code_size(params.n, rate_bits)
    q = check_distribution(marginal, params.cap_count, "marginal")
    rng = np.random.default_rng(seed)
    words = rng.choice(params.cap_count, size=(k, params.n), p=q)
    book = Codebook(words, params.cap_count)
    logger.debug(
        "[CODE] codebook K=%d n=%d taxa pedida=%.4f efetiva=%.4f bits",
        k, params.n, float(rate_bits), book.rate_bits,
    )
    return book


# ------------------------------------------------------------------------------
# Codificador
# ------------------------------------------------------------------------------
def _weak_matches(x_hat, codebook: Codebook, tables: JointTables, params: TypicalityParams):
    n, delta = params.n, params.delta
    words = codebook.codewords

    x_ok = np.abs(-tables.log_px[x_hat].sum(axis=1) / n - tables.h_x) < delta
    with np.errstate(invalid="ignore"):
        c_ok = np.abs(-tables.log_qy[words].sum(axis=1) / n - tables.h_y) < delta

    out = np.full(x_hat.shape[0], FAILURE, dtype=np.int64)
    step = max(1, _ENCODE_BATCH // (codebook.size * n))
    for start in range(0, x_hat.shape[0], step):
        xb = x_hat[start:start + step]
        info = tables.log_joint[xb[:, None, :], words[None, :, :]].sum(axis=2)
        with np.errstate(invalid="ignore"):
            ok = np.isfinite(info) & (np.abs(-info / n - tables.h_xy) < delta)
        ok &= c_ok[None, :] & x_ok[start:start + step, None]
        hit = ok.any(axis=1)
        out[start:start + step][hit] = ok[hit].argmax(axis=1)
    return out


def _strong_matches(x_hat, codebook: Codebook, tables: JointTables, params: TypicalityParams):
    n_caps = params.cap_count
    bound = params.delta / n_caps ** 2
    target = tables.joint.ravel()
    words = codebook.codewords

    out = np.full(x_hat.shape[0], FAILURE, dtype=np.int64)
    rows = np.arange(codebook.size)[:, None]
    for b, x in enumerate(x_hat):
        cells = x[None, :] * n_caps + words
        counts = np.zeros((codebook.size, n_caps * n_caps))
        np.add.at(counts, (np.broadcast_to(rows, cells.shape), cells), 1.0)
        ok = np.all(np.abs(counts / params.n - target[None, :]) < bound, axis=1)
        if ok.any():
            out[b] = int(ok.argmax())
    return out


def encode_indices(
    x_hat: np.ndarray, codebook: Codebook, tables: JointTables, params: TypicalityParams
) -> np.ndarray:
    """
    Índice da primeira palavra-código conjuntamente típica com cada bloco
    já discretizado (B, n); FAILURE (-1) quando nenhuma serve.
    """
    x = np.asarray(x_hat, dtype=np.int64).reshape(-1, params.n)
    if codebook.n != params.n:
        raise PreconditionError(f"codebook com n={codebook.n}, parâmetros com n={params.n}")
    if params.mode == "weak":
        return _weak_matches(x, codebook, tables, params)
    return _strong_matches(x, codebook, tables, params)


def encode(
    x_block: Union[Sequence[BlochPoint], np.ndarray],
    codebook: Codebook,
    joint: np.ndarray,
    params: TypicalityParams,
) -> Optional[int]:
    """
    Discretiza o bloco pela calota de cada letra e devolve o índice da
    primeira palavra-código típica com ele, ou None. Empates: menor índice.
    """
    if isinstance(x_block, np.ndarray):
        vectors = x_block.reshape(-1, 3)
    else:
        vectors = vectors_of(x_block)
    if vectors.shape[0] != params.n:
        raise PreconditionError(f"bloco com {vectors.shape[0]} letras, esperado n={params.n}")

    n_caps = params.cap_count
    j = check_distribution(np.asarray(joint).ravel(), n_caps * n_caps, "conjunta")
    tables = JointTables.from_joint(j.reshape(n_caps, n_caps))
    x_hat = params.partition.locate(vectors)
    idx = int(encode_indices(x_hat[None, :], codebook, tables, params)[0])
    return None if idx == FAILURE else idx
