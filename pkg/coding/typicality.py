# coding/typicality.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr

from bloch.exceptions import PreconditionError
from bloch.partition import CapPartition
from bloch.states import LN2

TYPICALITY_MODES = ("weak", "strong")
DIST_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TypicalityParams:
    """
    Parâmetros de tipicidade.

      - strong: frequências por letra dentro de δ/|X̂| (pares: δ/|X̂|²)
      - weak: -(1/n) log₂ P(seq) dentro de δ da entropia, em bits
    """

    delta: float
    partition: CapPartition
    n: int
    mode: str = "weak"

    def __post_init__(self):
        delta = float(self.delta)
        if not math.isfinite(delta) or delta <= 0.0:
            raise PreconditionError(f"delta precisa ser positivo: {self.delta!r}")
        n = int(self.n)
        if n != self.n or n < 1:
            raise PreconditionError(f"blocklength precisa ser inteiro ≥ 1: {self.n!r}")
        if self.mode not in TYPICALITY_MODES:
            raise PreconditionError(f"modo de tipicidade inválido: {self.mode!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "n", n)

    @property
    def cap_count(self) -> int:
        return self.partition.cap_count


def check_distribution(dist: np.ndarray, size: int, label: str = "distribuição") -> np.ndarray:
    p = np.asarray(dist, dtype=float).reshape(-1)
    if p.size != size:
        raise PreconditionError(f"{label} com {p.size} entradas, esperado {size}")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise PreconditionError(f"{label} com entradas negativas")
    total = float(p.sum())
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise PreconditionError(f"{label} soma {total!r}, esperado 1")
    return p / total


def entropy_bits(dist: np.ndarray) -> float:
    return float(entr(np.asarray(dist, dtype=float)).sum() / LN2)


def log2_probs(dist: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(np.asarray(dist, dtype=float))


def _as_sequence(seq: Sequence[int], params: TypicalityParams) -> np.ndarray:
    s = np.asarray(seq, dtype=np.int64).reshape(-1)
    if s.shape[0] != params.n:
        raise PreconditionError(f"sequência de comprimento {s.shape[0]}, esperado n={params.n}")
    if np.any(s < 0) or np.any(s >= params.cap_count):
        raise PreconditionError("índice de calota fora da partição")
    return s


def _weakly_typical(log2_p_sum: float, n: int, entropy: float, delta: float) -> bool:
    if not math.isfinite(log2_p_sum):
        return False
    return abs(-log2_p_sum / n - entropy) < delta


# ------------------------------------------------------------------------------
# Operações
# ------------------------------------------------------------------------------
def is_typical(seq: Sequence[int], dist: np.ndarray, params: TypicalityParams) -> bool:
    s = _as_sequence(seq, params)
    p = check_distribution(dist, params.cap_count)

    if params.mode == "weak":
        return _weakly_typical(float(log2_probs(p)[s].sum()), params.n, entropy_bits(p), params.delta)

    freq = np.bincount(s, minlength=params.cap_count) / params.n
    return bool(np.all(np.abs(freq - p) < params.delta / params.cap_count))


def is_jointly_typical(
    x_seq: Sequence[int], y_seq: Sequence[int], joint: np.ndarray, params: TypicalityParams
) -> bool:
    """
    joint[x̂, ŷ] = P̂(x̂|ŷ) q̂(ŷ).

    No modo weak exige as três condições: x, y e o par.
    """
    x = _as_sequence(x_seq, params)
    y = _as_sequence(y_seq, params)
    n_caps = params.cap_count
    j = np.asarray(joint, dtype=float)
    if j.shape != (n_caps, n_caps):
        raise PreconditionError(f"distribuição conjunta precisa ser {n_caps}x{n_caps}")
    j = check_distribution(j.ravel(), n_caps * n_caps, "conjunta").reshape(n_caps, n_caps)

    if params.mode == "weak":
        tables = JointTables.from_joint(j)
        return (
            _weakly_typical(float(tables.log_px[x].sum()), params.n, tables.h_x, params.delta)
            and _weakly_typical(float(tables.log_qy[y].sum()), params.n, tables.h_y, params.delta)
            and _weakly_typical(float(tables.log_joint[x, y].sum()), params.n, tables.h_xy, params.delta)
        )

    counts = np.bincount(x * n_caps + y, minlength=n_caps * n_caps) / params.n
    return bool(np.all(np.abs(counts - j.ravel()) < params.delta / n_caps ** 2))


@dataclass(frozen=True, eq=False)
class JointTables:
    """log₂ das probabilidades e entropias da conjunta, para o codificador."""

    joint: np.ndarray
    log_joint: np.ndarray
    log_px: np.ndarray
    log_qy: np.ndarray
    h_x: float
    h_y: float
    h_xy: float

    @classmethod
    def from_joint(cls, joint: np.ndarray) -> "JointTables":
        j = np.asarray(joint, dtype=float)
        px, qy = j.sum(axis=1), j.sum(axis=0)
        return cls(
            joint=j,
            log_joint=log2_probs(j),
            log_px=log2_probs(px),
            log_qy=log2_probs(qy),
            h_x=entropy_bits(px),
            h_y=entropy_bits(qy),
            h_xy=entropy_bits(j.ravel()),
        )
