# optimizer/channel.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import rel_entr, softmax

from analytic.curve import LambdaLike, as_lambda
from bloch.exceptions import PreconditionError
from bloch.partition import CapPartition
from bloch.states import LN2, DensityMatrix, binary_entropy, overlap_matrix

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-10
LETTER_STATES = ("mean", "centroid")


def letter_vectors(partition: CapPartition, states: str = "mean") -> np.ndarray:
    """
    Vetores de Bloch dos estados-letra de cada calota.

      - "mean": estado médio da calota (|v| < 1)
      - "centroid": projetor do centróide (|v| = 1)
    """
    if states == "mean":
        return partition.mean_vectors
    if states == "centroid":
        return partition.centroid_vectors
    raise PreconditionError(f"states precisa ser um de {LETTER_STATES}: {states!r}")


def channel_marginal(q_matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return weights @ q_matrix


def posterior_bloch_vectors(
    q_matrix: np.ndarray, weights: np.ndarray, letters: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (marginal, r) com r[ŷ] = Σ_x̂ P(x̂|ŷ) v_x̂.

    Colunas com marginal nula recebem r = 0; elas não pesam em nenhuma soma.
    """
    marginal = channel_marginal(q_matrix, weights)
    weighted = q_matrix.T @ (weights[:, None] * letters)
    r = np.zeros_like(weighted)
    live = marginal > 0.0
    r[live] = weighted[live] / marginal[live, None]
    return marginal, r


def mutual_information_nats(q_matrix: np.ndarray, weights: np.ndarray, marginal: np.ndarray) -> float:
    per_row = rel_entr(q_matrix, marginal[None, :]).sum(axis=1)
    return max(float(weights @ per_row), 0.0)


def posterior_entropy_bits(marginal: np.ndarray, r: np.ndarray) -> float:
    # autovalores (1 ± |r|)/2
    radius = np.clip(np.linalg.norm(r, axis=1), 0.0, 1.0)
    per_output = binary_entropy((1.0 - radius) / 2.0)
    return float(np.clip(marginal @ per_output, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class DiscreteChannel:
    """
    Canal discretizado Q̂(ŷ|x̂) sobre uma partição em calotas.

    q_matrix[x̂, ŷ] é estocástica por linha (1e-10); na construção as
    linhas são renormalizadas e a matriz fica somente leitura.
    """

    partition: CapPartition
    q_matrix: np.ndarray = field(repr=False)
    states: str = "mean"

    def __post_init__(self):
        q = np.array(self.q_matrix, dtype=float)
        n = self.partition.cap_count
        if q.shape != (n, n):
            raise PreconditionError(f"q_matrix precisa ser {n}x{n}, veio {q.shape}")
        if not np.all(np.isfinite(q)) or np.any(q < 0.0):
            raise PreconditionError("q_matrix com entradas negativas ou não finitas")
        sums = q.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > ROW_SUM_TOL:
            raise PreconditionError(f"linhas de q_matrix não somam 1 (desvio {worst:.3e})")
        letter_vectors(self.partition, self.states)

        q = q / sums[:, None]
        q.setflags(write=False)
        object.__setattr__(self, "q_matrix", q)

    @property
    def cap_count(self) -> int:
        return self.partition.cap_count

    @property
    def weights(self) -> np.ndarray:
        return self.partition.weights

    @property
    def letters(self) -> np.ndarray:
        return letter_vectors(self.partition, self.states)

    @cached_property
    def _posterior(self) -> Tuple[np.ndarray, np.ndarray]:
        return posterior_bloch_vectors(self.q_matrix, self.weights, self.letters)

    @property
    def marginal(self) -> np.ndarray:
        return self._posterior[0]

    @property
    def posterior_vectors(self) -> np.ndarray:
        return self._posterior[1]

    @cached_property
    def posterior_states(self) -> Tuple[DensityMatrix, ...]:
        return tuple(DensityMatrix.from_bloch_vector(r) for r in self.posterior_vectors)

    def posteriors(self) -> np.ndarray:
        """P̂(x̂|ŷ) como matriz [ŷ, x̂]."""
        joint = self.weights[:, None] * self.q_matrix
        out = np.zeros_like(joint.T)
        live = self.marginal > 0.0
        out[live] = joint.T[live] / self.marginal[live, None]
        return out

    def joint(self) -> np.ndarray:
        """P̂(x̂, ŷ) = p̂(x̂) Q̂(ŷ|x̂), matriz [x̂, ŷ]."""
        return self.weights[:, None] * self.q_matrix


@dataclass(frozen=True)
class ObjectiveReport:
    multiplier: float
    mutual_info_bits: float
    posterior_entropy_bits: float
    lagrangian_value: float
    iterations: int
    converged: bool
    residual: float
    relative_residual: float = 0.0
    regularized: bool = False
    init: str = "uniform"
    states: str = "mean"
    lagrangian_start: Optional[float] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "multiplier": self.multiplier,
            "mutual_info_bits": self.mutual_info_bits,
            "posterior_entropy_bits": self.posterior_entropy_bits,
            "lagrangian_value": self.lagrangian_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "regularized": self.regularized,
            "init": self.init,
            "states": self.states,
            "lagrangian_start": self.lagrangian_start,
        }


# ------------------------------------------------------------------------------
# Funcionais do canal (bits)
# ------------------------------------------------------------------------------
def discrete_mutual_information(ch: DiscreteChannel) -> float:
    """I(X̂;Ŷ) = Σ p̂(x̂) D(Q̂(·|x̂) ‖ q̂), em bits."""
    return mutual_information_nats(ch.q_matrix, ch.weights, ch.marginal) / LN2


def discrete_posterior_entropy(ch: DiscreteChannel) -> float:
    """Σ q̂(ŷ) S(ρ_ŷ), em bits."""
    return posterior_entropy_bits(ch.marginal, ch.posterior_vectors)


def evaluate(ch: DiscreteChannel, multiplier: float) -> Tuple[float, float, float]:
    """(I, S, I + μS) em bits."""
    i_bits = discrete_mutual_information(ch)
    s_bits = discrete_posterior_entropy(ch)
    return i_bits, s_bits, i_bits + multiplier * s_bits


def discretize_analytic_channel(
    partition: CapPartition, lam: LambdaLike, *, states: str = "mean"
) -> DiscreteChannel:
    """
    Q̂(ŷ|x̂) ∝ Q^λ(c_ŷ|c_x̂)·peso(ŷ), linhas renormalizadas.

    O fator (1/4π)λ/(e^λ-1) some na renormalização: cada linha é um
    softmax de λu + log peso.
    """
    x = as_lambda(lam)
    u = overlap_matrix(partition.centroid_vectors, partition.centroid_vectors)
    logits = x * u + np.log(partition.weights)[None, :]
    q = softmax(logits, axis=1)
    logger.debug("[OPT] canal analítico λ=%.6g N=%d", x, partition.cap_count)
    return DiscreteChannel(partition, q, states)


def uniform_channel(partition: CapPartition, *, states: str = "mean") -> DiscreteChannel:
    n = partition.cap_count
    q = np.tile(partition.weights, (n, 1))
    return DiscreteChannel(partition, q, states)


def random_channel(partition: CapPartition, seed: int, *, states: str = "mean") -> DiscreteChannel:
    rng = np.random.default_rng(seed)
    n = partition.cap_count
    return DiscreteChannel(partition, rng.dirichlet(np.ones(n), size=n), states)
