# bloch/rotations.py
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as SO3

from .states import IDENTITY_2, PAULI, BlochPoint


@dataclass(frozen=True, eq=False)
class Rotation:
    """
    Rotação da esfera de Bloch.

    Guarda o elemento de SO(3) (scipy) e expõe o unitário de SU(2)
    correspondente: U = cos(a/2) I - i sin(a/2) n·σ.
    """

    so3: SO3

    def apply(self, point: BlochPoint) -> BlochPoint:
        return BlochPoint.from_vector(self.so3.apply(point.vector))

    def apply_vectors(self, vectors: np.ndarray) -> np.ndarray:
        return self.so3.apply(np.asarray(vectors, dtype=float))

    def inverse(self) -> "Rotation":
        return Rotation(self.so3.inv())

    @property
    def matrix(self) -> np.ndarray:
        return self.so3.as_matrix()

    def unitary(self) -> np.ndarray:
        rotvec = self.so3.as_rotvec()
        angle = float(np.linalg.norm(rotvec))
        if angle == 0.0:
            return IDENTITY_2.copy()
        n = rotvec / angle
        return (
            math.cos(angle / 2.0) * IDENTITY_2
            - 1j * math.sin(angle / 2.0) * np.tensordot(n, PAULI, axes=1)
        )


def north_rotvecs(vectors: np.ndarray) -> np.ndarray:
    """
    Vetores de rotação (N, 3) que levam cada vetor unitário ao polo norte.

    Eixo v × ẑ, ângulo θ. No polo sul (v × ẑ = 0) o eixo é -ŷ, o mesmo
    que a fórmula dá para phi = 0.
    """
    v = np.asarray(vectors, dtype=float).reshape(-1, 3)
    z = np.clip(v[:, 2], -1.0, 1.0)
    theta = np.arccos(z)
    s = np.hypot(v[:, 0], v[:, 1])

    axis = np.zeros_like(v)
    ok = s > 0.0
    axis[ok, 0] = v[ok, 1] / s[ok]
    axis[ok, 1] = -v[ok, 0] / s[ok]
    axis[~ok, 1] = -1.0
    return axis * theta[:, None]


def rotation_to_north(y: BlochPoint) -> Rotation:
    """Rotação que leva y ao polo norte (x = 0); preserva overlaps."""
    return Rotation(SO3.from_rotvec(north_rotvecs(y.vector)[0]))


def rotate_each_to_north(anchors: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """
    Aplica, linha a linha, a rotação que leva anchors[i] ao norte em vectors[i].
    """
    anchors = np.asarray(anchors, dtype=float).reshape(-1, 3)
    vectors = np.asarray(vectors, dtype=float).reshape(-1, 3)
    if anchors.shape[0] == 0:
        return np.empty((0, 3))
    return SO3.from_rotvec(north_rotvecs(anchors)).apply(vectors)

