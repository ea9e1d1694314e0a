# coding/simulation.py
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.linalg import svdvals

from analytic.curve import LambdaLike, as_lambda, entropy_s, p_lambda
from bloch.exceptions import PreconditionError
from bloch.partition import build_partition
from bloch.rotations import rotate_each_to_north
from bloch.states import (
    DensityMatrix,
    entropy_from_eigenvalues,
    kets_from_vectors,
    mix_vectors,
    sample_uniform,
    von_neumann_entropy,
)
from optimizer.channel import discrete_posterior_entropy, discretize_analytic_channel

from .codebook import FAILURE, Codebook, encode_indices, generate_codebook
from .montecarlo import DEFAULT_CHUNK, Seed, as_seed_sequence, fsum_vectors, map_chunks
from .typicality import JointTables, TypicalityParams

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
BOOTSTRAP_RESAMPLES = 200
# entropia exata de bloco só até 2^8 dimensões
EXACT_BLOCK_MAX_N = 8
EXACT_BLOCK_MIN_SAMPLES = 30


def _check_samples(num_samples: int) -> int:
    m = int(num_samples)
    if m != num_samples or m < MIN_SAMPLES:
        raise PreconditionError(f"num_samples precisa ser inteiro ≥ {MIN_SAMPLES}: {num_samples!r}")
    return m


def pooled_entropy(mean_vector: np.ndarray) -> float:
    """Entropia do estado (I + r·σ)/2."""
    r = np.asarray(mean_vector, dtype=float)
    norm = float(np.linalg.norm(r))
    if norm > 1.0:
        r = r / norm
    return von_neumann_entropy(DensityMatrix.from_bloch_vector(r))


def _mean_entropy(vectors: np.ndarray) -> float:
    return pooled_entropy(vectors.mean(axis=0)) if vectors.shape[0] else float("nan")


# ------------------------------------------------------------------------------
# Estimativa da entropia posterior
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class EntropyEstimate:
    pooled_rotated_entropy: Optional[float]
    exact_block_entropy: Optional[float]
    encoder_failure_rate: float
    samples_used: int
    confidence_halfwidth: Optional[float]
    centroid_pooled_entropy: Optional[float]
    coarse_graining_bias: float
    mean_overlap: Optional[float]
    valid: bool
    num_samples: int
    codebook_size: int
    rate_bits: float
    requested_rate_bits: float
    analytic_entropy: float
    block_entropy_codewords: int = 0

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class _ChunkResult:
    failures: int
    block_sums: np.ndarray
    centroid_sum: np.ndarray
    overlap_sum: float
    blocks: Optional[np.ndarray]
    words: Optional[np.ndarray]


def _block_kets(blocks: np.ndarray) -> np.ndarray:
    """Kets produto (m, 2^n) de blocos de vetores de Bloch (m, n, 3)."""
    m, n, _ = blocks.shape
    kets = kets_from_vectors(blocks.reshape(-1, 3)).reshape(m, n, 2)
    psi = kets[:, 0, :]
    for i in range(1, n):
        psi = (psi[:, :, None] * kets[:, i, None, :]).reshape(m, -1)
    return psi


def exact_block_entropy(blocks: np.ndarray, words: np.ndarray, n: int) -> Optional[tuple]:
    """
    (1/n) S(média dos projetores de bloco) por palavra-código, média ponderada
    pelas amostras. Só entram palavras com ≥ 30 amostras.

    Retorna (entropia, palavras usadas) ou None.
    """
    total = 0
    acc: List[float] = []
    weights: List[int] = []
    for word in np.unique(words):
        chosen = blocks[words == word]
        m = chosen.shape[0]
        if m < EXACT_BLOCK_MIN_SAMPLES:
            continue
        sv = svdvals(_block_kets(chosen) / math.sqrt(m))
        acc.append(float(entropy_from_eigenvalues(sv ** 2)) / n)
        weights.append(m)
        total += m
    if not weights:
        return None
    return math.fsum(a * w for a, w in zip(acc, weights)) / total, len(weights)


def estimate_posterior_entropy(
    lam: LambdaLike,
    params: TypicalityParams,
    rate_bits: float,
    num_samples: int,
    seed: Seed,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    codebook: Optional[Codebook] = None,
) -> EntropyEstimate:
    """
    Simula o mapa de codificação por tipicidade conjunta e estima a
    entropia posterior por letra.

    Para cada bloco codificado cada letra x_i é girada pela rotação que leva
    o centróide de ŷ_i ao norte; os vetores girados formam um único 2x2.
    Com n ≤ 8 calcula também a entropia exata por palavra-código.
    """
    x = as_lambda(lam)
    m_total = _check_samples(num_samples)
    part = params.partition
    n = params.n

    channel = discretize_analytic_channel(part, x)
    tables = JointTables.from_joint(channel.joint())
    book_seq, sample_seq, boot_seq = as_seed_sequence(seed).spawn(3)
    if codebook is None:
        codebook = generate_codebook(
            params, rate_bits, channel.marginal, int(book_seq.generate_state(1)[0])
        )
    if codebook.n != n or codebook.cap_count != part.cap_count:
        raise PreconditionError("codebook incompatível com os parâmetros de tipicidade")
    keep_blocks = n <= EXACT_BLOCK_MAX_N
    cents = part.centroid_vectors

    def run(rng: np.random.Generator, size: int) -> _ChunkResult:
        v = sample_uniform(rng, size * n).reshape(size, n, 3)
        x_hat = part.locate(v.reshape(-1, 3)).reshape(size, n)
        idx = encode_indices(x_hat, codebook, tables, params)
        ok = idx != FAILURE

        good = v[ok]
        anchors = cents[codebook.codewords[idx[ok]]].reshape(-1, 3)
        rotated = rotate_each_to_north(anchors, good.reshape(-1, 3)).reshape(-1, n, 3)
        rotated_c = rotate_each_to_north(anchors, cents[x_hat[ok]].reshape(-1, 3))
        overlaps = (1.0 + np.einsum("ij,ij->i", good.reshape(-1, 3), anchors)) / 2.0
        return _ChunkResult(
            failures=int((~ok).sum()),
            block_sums=rotated.sum(axis=1),
            centroid_sum=rotated_c.sum(axis=0),
            overlap_sum=float(overlaps.sum()),
            blocks=good if keep_blocks else None,
            words=idx[ok] if keep_blocks else None,
        )

    chunks = map_chunks(run, m_total, sample_seq, chunk_size=chunk_size, workers=workers)

    failures = sum(c.failures for c in chunks)
    used = m_total - failures
    base = dict(
        encoder_failure_rate=failures / m_total,
        samples_used=used,
        num_samples=m_total,
        codebook_size=codebook.size,
        rate_bits=codebook.rate_bits,
        requested_rate_bits=float(rate_bits),
        analytic_entropy=entropy_s(x),
        # viés da discretização: entropia posterior do canal nas calotas menos a analítica
        coarse_graining_bias=discrete_posterior_entropy(channel) - entropy_s(x),
    )
    if used == 0:
        logger.warning("[SIM] todas as %d codificações falharam; estimativa inválida", m_total)
        return EntropyEstimate(
            pooled_rotated_entropy=None,
            exact_block_entropy=None,
            confidence_halfwidth=None,
            centroid_pooled_entropy=None,
            mean_overlap=None,
            valid=False,
            **base,
        )

    letters = used * n
    pooled_vec = fsum_vectors(c.block_sums.sum(axis=0) for c in chunks) / letters
    centroid_vec = fsum_vectors(c.centroid_sum for c in chunks) / letters
    pooled = pooled_entropy(pooled_vec)
    centroid_pooled = pooled_entropy(centroid_vec)
    mean_overlap = math.fsum(c.overlap_sum for c in chunks) / letters

    # bootstrap sobre blocos
    block_sums = np.concatenate([c.block_sums for c in chunks])
    rng = np.random.default_rng(boot_seq)
    boot = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        pick = rng.integers(0, used, used)
        boot[b] = pooled_entropy(block_sums[pick].sum(axis=0) / letters)
    lo, hi = np.percentile(boot, [2.5, 97.5])
    halfwidth = float(hi - lo) / 2.0

    exact = None
    exact_words = 0
    if keep_blocks:
        found = exact_block_entropy(
            np.concatenate([c.blocks for c in chunks]),
            np.concatenate([c.words for c in chunks]),
            n,
        )
        if found is not None:
            exact, exact_words = found

    estimate = EntropyEstimate(
        pooled_rotated_entropy=pooled,
        exact_block_entropy=exact,
        confidence_halfwidth=halfwidth,
        centroid_pooled_entropy=centroid_pooled,
        mean_overlap=mean_overlap,
        valid=True,
        block_entropy_codewords=exact_words,
        **base,
    )
    logger.info(
        "[SIM] λ=%.4g n=%d K=%d falhas=%.4f S=%.6f ±%.4f (analítico %.6f)",
        x, n, codebook.size, estimate.encoder_failure_rate, pooled, halfwidth,
        estimate.analytic_entropy,
    )
    return estimate


# ------------------------------------------------------------------------------
# Exemplo dos hemisférios
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class HemisphereReport:
    exact: float
    monte_carlo: float
    gap: float
    samples: int
    north_entropy: float
    south_entropy: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def lo_hemisphere_example(
    num_samples: int,
    seed: Seed,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> HemisphereReport:
    """
    Alice diz só o hemisfério do estado. Exato: mistura do hemisfério norte,
    autovalores (3/4, 1/4). Monte Carlo: polo mais próximo, rotação ao norte
    e entropia da mistura amostrada.
    """
    m_total = _check_samples(num_samples)
    hemi = build_partition(2)
    exact = von_neumann_entropy(mix_vectors(hemi.mean_vectors[:1]))
    poles = hemi.centroid_vectors

    def run(rng: np.random.Generator, size: int):
        v = sample_uniform(rng, size)
        cap = hemi.locate(v)
        rotated = rotate_each_to_north(poles[cap], v)
        north = cap == 0
        return rotated.sum(axis=0), v[north].sum(axis=0), int(north.sum()), v[~north].sum(axis=0)

    chunks = map_chunks(run, m_total, seed, chunk_size=chunk_size, workers=workers)
    pooled = fsum_vectors(c[0] for c in chunks) / m_total
    n_north = sum(c[2] for c in chunks)
    n_south = m_total - n_north
    north = fsum_vectors(c[1] for c in chunks) / max(n_north, 1)
    south = fsum_vectors(c[3] for c in chunks) / max(n_south, 1)

    mc = pooled_entropy(pooled)
    report = HemisphereReport(
        exact=exact,
        monte_carlo=mc,
        gap=abs(mc - exact),
        samples=m_total,
        north_entropy=pooled_entropy(north),
        south_entropy=pooled_entropy(south),
    )
    logger.info("[LO] exato=%.6f monte carlo=%.6f gap=%.2e (%d amostras)", exact, mc, report.gap, m_total)
    return report


# ------------------------------------------------------------------------------
# Oráculo do agrupamento por rotação (canal contínuo)
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class PoolingOracleReport:
    lam: float
    estimated_eigenvalues: tuple
    exact_eigenvalues: tuple
    standard_error: float
    z_score: float
    samples: int

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def sample_channel_outputs(rng: np.random.Generator, inputs: np.ndarray, lam: float) -> np.ndarray:
    """
    Uma saída x ~ P^λ(·|y) por linha de `inputs`, por rejeição: x uniforme
    aceito com probabilidade e^{λ(u-1)}, u = |⟨x|y⟩|².
    """
    inputs = np.asarray(inputs, dtype=float).reshape(-1, 3)
    out = np.empty_like(inputs)
    pending = np.arange(inputs.shape[0])
    while pending.size:
        cand = sample_uniform(rng, pending.size)
        u = (1.0 + np.einsum("ij,ij->i", cand, inputs[pending])) / 2.0
        accept = rng.random(pending.size) < np.exp(lam * (u - 1.0))
        out[pending[accept]] = cand[accept]
        pending = pending[~accept]
    return out


def channel_pooling_oracle(
    lam: LambdaLike,
    num_samples: int,
    seed: Seed,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> PoolingOracleReport:
    """
    y uniforme, x ~ P^λ(·|y) por rejeição (sem passar pelas rotações), x
    girado pela rotação que leva y ao norte e agrupado; os autovalores devem
    bater com (p(λ), 1 - p(λ)).
    """
    x_lam = as_lambda(lam)
    m_total = _check_samples(num_samples)

    def run(rng: np.random.Generator, size: int):
        y = sample_uniform(rng, size)
        xs = sample_channel_outputs(rng, y, x_lam)
        pooled = rotate_each_to_north(y, xs)
        return pooled.sum(axis=0), float(np.sum(pooled[:, 2] ** 2))

    chunks = map_chunks(run, m_total, seed, chunk_size=chunk_size, workers=workers)
    mean = fsum_vectors(c[0] for c in chunks) / m_total
    second = math.fsum(c[1] for c in chunks) / m_total
    radius = float(np.linalg.norm(mean))
    p_hat = (1.0 - radius) / 2.0
    p = p_lambda(x_lam)

    variance = max(second - mean[2] ** 2, 0.0)
    se = math.sqrt(variance / m_total) / 2.0
    z_score = abs(p_hat - p) / se if se > 0.0 else math.inf
    logger.info("[SIM] oráculo λ=%.4g p estimado=%.6f exato=%.6f z=%.2f", x_lam, p_hat, p, z_score)
    return PoolingOracleReport(
        lam=x_lam,
        estimated_eigenvalues=(p_hat, 1.0 - p_hat),
        exact_eigenvalues=(p, 1.0 - p),
        standard_error=se,
        z_score=z_score,
        samples=m_total,
    )
