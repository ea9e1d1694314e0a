# bloch/states.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import entr

from .exceptions import InvalidStateError, PreconditionError

# ------------------------------------------------------------------------------
# Constantes
# ------------------------------------------------------------------------------
TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-9
MAX_DIM = 1024

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


# ------------------------------------------------------------------------------
# Pontos da esfera
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class BlochPoint:
    """
    Estado puro de um qubit em coordenadas polares (theta, phi).

    - theta em [0, π], phi em [0, 2π)
    - nos polos phi é sempre 0 (igualdade testável)
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise PreconditionError("BlochPoint com coordenada não finita")
        if theta < 0.0 or theta > math.pi:
            raise PreconditionError(f"theta fora de [0, π]: {theta!r}")

        phi = phi % TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        if theta == 0.0 or theta == math.pi:
            phi = 0.0

        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "BlochPoint":
        v = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(v))
        if v.shape != (3,) or norm == 0.0:
            raise PreconditionError("vetor de Bloch precisa ser 3D e não nulo")
        x, y, z = v / norm
        theta = math.acos(min(1.0, max(-1.0, z)))
        phi = math.atan2(y, x) % TWO_PI
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    @property
    def ket(self) -> np.ndarray:
        # √((1+cosθ)/2)|0⟩ + e^{iφ}√((1−cosθ)/2)|1⟩
        c = math.cos(self.theta)
        return np.array(
            [
                math.sqrt((1.0 + c) / 2.0),
                np.exp(1j * self.phi) * math.sqrt((1.0 - c) / 2.0),
            ],
            dtype=complex,
        )


NORTH = BlochPoint(0.0, 0.0)
SOUTH = BlochPoint(math.pi, 0.0)


def vectors_of(points: Iterable[BlochPoint]) -> np.ndarray:
    return np.array([p.vector for p in points], dtype=float).reshape(-1, 3)


def kets_from_vectors(vectors: np.ndarray) -> np.ndarray:
    """Kets (N, 2) de vetores de Bloch unitários (N, 3)."""
    v = np.asarray(vectors, dtype=float).reshape(-1, 3)
    z = np.clip(v[:, 2], -1.0, 1.0)
    phi = np.arctan2(v[:, 1], v[:, 0])
    kets = np.empty((v.shape[0], 2), dtype=complex)
    kets[:, 0] = np.sqrt((1.0 + z) / 2.0)
    kets[:, 1] = np.exp(1j * phi) * np.sqrt((1.0 - z) / 2.0)
    return kets


def sample_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    """Pontos uniformes na esfera: z ~ U(-1, 1), φ ~ U(0, 2π)."""
    z = rng.uniform(-1.0, 1.0, size)
    phi = rng.uniform(0.0, TWO_PI, size)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


# ------------------------------------------------------------------------------
# Overlaps
# ------------------------------------------------------------------------------
def overlap(x: BlochPoint, y: BlochPoint) -> float:
    """|⟨x|y⟩|² = (1 + cos γ)/2, γ o ângulo de grande círculo entre x e y."""
    cos_gamma = float(np.clip(np.dot(x.vector, y.vector), -1.0, 1.0))
    return (1.0 + cos_gamma) / 2.0


def overlap_amplitude(x: BlochPoint, y: BlochPoint) -> float:
    """Mesmo overlap, calculado pelo produto interno das amplitudes."""
    return float(abs(np.vdot(x.ket, y.ket)) ** 2)


def overlap_matrix(vectors_a: np.ndarray, vectors_b: np.ndarray) -> np.ndarray:
    """Matriz de overlaps u[i, j] = (1 + a_i · b_j)/2."""
    cos_gamma = np.clip(np.asarray(vectors_a) @ np.asarray(vectors_b).T, -1.0, 1.0)
    return (1.0 + cos_gamma) / 2.0


# ------------------------------------------------------------------------------
# Matrizes densidade
# ------------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Matriz densidade imutável, dimensão 2^n (n ≤ 10).

    Valida na construção:
      - hermitiana (1e-12 por entrada)
      - traço 1 (1e-12)
      - autovalores ≥ -1e-10
    """

    entries: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"matriz não quadrada: shape={m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim > MAX_DIM or dim & (dim - 1):
            raise InvalidStateError(f"dimensão {dim} não é potência de 2 em [2, {MAX_DIM}]")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("matriz com entradas não finitas")

        herm_err = float(np.max(np.abs(m - m.conj().T)))
        if herm_err > HERMITIAN_TOL:
            raise InvalidStateError(f"matriz não hermitiana (erro {herm_err:.3e})")
        m = (m + m.conj().T) / 2.0

        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"traço {tr!r} diferente de 1")

        eig = linalg.eigvalsh(m)
        if eig[0] < -PSD_TOL:
            raise InvalidStateError(f"autovalor negativo {eig[0]:.3e}")

        m.setflags(write=False)
        eig = np.clip(eig, 0.0, None)
        eig.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise PreconditionError("vetor de Bloch só existe para dim = 2")
        m = self.entries
        return np.array([2.0 * m[0, 1].real, -2.0 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])

    @classmethod
    def from_bloch_vector(cls, vector: Sequence[float]) -> "DensityMatrix":
        r = np.asarray(vector, dtype=float).reshape(3)
        return cls((IDENTITY_2 + np.tensordot(r, PAULI, axes=1)) / 2.0)

    @classmethod
    def maximally_mixed(cls, dim: int = 2) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


def density_stack(vectors: np.ndarray) -> np.ndarray:
    """Pilha (N, 2, 2) de (I + r·σ)/2 para vetores (N, 3), sem validação."""
    r = np.asarray(vectors, dtype=float).reshape(-1, 3)
    return (IDENTITY_2[None, :, :] + np.einsum("nk,kij->nij", r, PAULI)) / 2.0


def pure_density(x: BlochPoint) -> DensityMatrix:
    ket = x.ket
    return DensityMatrix(np.outer(ket, ket.conj()))


WeightedPoints = Iterable[Tuple[BlochPoint, float]]


def mix(points: WeightedPoints) -> DensityMatrix:
    """
    ρ = Σ p_k |x_k⟩⟨x_k| para uma lista de pares (ponto, probabilidade).

    Os pesos precisam somar 1 (1e-9); a soma é renormalizada para manter
    o traço exato.
    """
    pairs = list(points)
    if not pairs:
        raise PreconditionError("mix de lista vazia")
    weights = np.array([float(w) for _, w in pairs])
    return mix_vectors(vectors_of(p for p, _ in pairs), weights)


def mix_vectors(vectors: np.ndarray, weights: Optional[np.ndarray] = None) -> DensityMatrix:
    """Versão vetorizada de mix: vetores de Bloch (N, 3), pesos (N,) ou uniformes."""
    v = np.asarray(vectors, dtype=float).reshape(-1, 3)
    if v.shape[0] == 0:
        raise PreconditionError("mix de lista vazia")
    if weights is None:
        return DensityMatrix.from_bloch_vector(v.mean(axis=0))

    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != v.shape[0]:
        raise PreconditionError("número de pesos diferente do número de pontos")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise PreconditionError("pesos precisam ser não negativos")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise PreconditionError(f"pesos somam {total!r}, esperado 1")
    return DensityMatrix.from_bloch_vector((w @ v) / total)


# ------------------------------------------------------------------------------
# Entropias (sempre em bits na interface)
# ------------------------------------------------------------------------------
def entropy_from_eigenvalues(eigenvalues: np.ndarray, axis: int = -1) -> np.ndarray:
    """-Σ λ log₂ λ ao longo de `axis`, com 0·log 0 = 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = np.where((lam < 0.0) & (lam >= -PSD_TOL), 0.0, lam)
    return entr(lam).sum(axis=axis) / LN2


def von_neumann_entropy(rho: Union[DensityMatrix, np.ndarray]) -> float:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    s = float(entropy_from_eigenvalues(rho.eigenvalues))
    return min(max(s, 0.0), math.log2(rho.dim))


def binary_entropy(p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """h₂(p) = -p log₂ p - (1-p) log₂(1-p)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise PreconditionError(f"probabilidade fora de [0, 1]: {p!r}")
    h = (entr(arr) + entr(1.0 - arr)) / LN2
    if h.ndim == 0:
        return float(h)
    return h
