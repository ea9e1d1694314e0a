# bloch/partition.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .exceptions import PreconditionError
from .states import TWO_PI, BlochPoint, kets_from_vectors

logger = logging.getLogger(__name__)

# pontos amostrados por aresta no cálculo do diâmetro
_EDGE_SAMPLES = 24


@dataclass(frozen=True, eq=False)
class CapPartition:
    """
    Partição da esfera em calotas de área igual.

    Faixas de latitude (z_edges, de 1 até -1) cortadas em setores de
    longitude iguais; as faixas 0 e -1 são as calotas polares (1 setor).
    """

    cap_count: int
    centroids: Tuple[BlochPoint, ...]
    weights: np.ndarray
    diameter_bound: float
    z_edges: np.ndarray = field(repr=False)
    sectors: np.ndarray = field(repr=False)
    band_start: np.ndarray = field(repr=False)
    centroid_vectors: np.ndarray = field(repr=False)
    mean_vectors: np.ndarray = field(repr=False)
    diameters: np.ndarray = field(repr=False)

    @property
    def band_count(self) -> int:
        return int(self.sectors.shape[0])

    @property
    def centroid_kets(self) -> np.ndarray:
        return kets_from_vectors(self.centroid_vectors)

    def cap_bounds(self, index: int) -> Tuple[float, float, float, float]:
        """(z_top, z_bottom, phi_start, phi_end) da calota `index`."""
        if index < 0 or index >= self.cap_count:
            raise PreconditionError(f"calota {index} fora de [0, {self.cap_count})")
        band = int(np.searchsorted(self.band_start, index, side="right") - 1)
        m = int(self.sectors[band])
        k = index - int(self.band_start[band])
        phi_end = TWO_PI if k + 1 == m else TWO_PI * (k + 1) / m
        return (
            float(self.z_edges[band]),
            float(self.z_edges[band + 1]),
            TWO_PI * k / m,
            phi_end,
        )

    def locate(self, vectors: np.ndarray) -> np.ndarray:
        """Índice da calota que contém cada vetor (N, 3)."""
        v = np.asarray(vectors, dtype=float).reshape(-1, 3)
        z = np.clip(v[:, 2], -1.0, 1.0)

        # faixa b cobre z em [z_edges[b+1], z_edges[b]); a calota norte inclui z = 1
        ascending = self.z_edges[::-1]
        idx = np.searchsorted(ascending, z, side="right") - 1
        idx = np.clip(idx, 0, self.band_count - 1)
        band = (self.band_count - 1) - idx

        m = self.sectors[band]
        phi = np.mod(np.arctan2(v[:, 1], v[:, 0]), TWO_PI)
        k = np.minimum(np.floor(phi * m / TWO_PI).astype(np.int64), m - 1)
        return self.band_start[band] + k

    def contains(self, index: int, vectors: np.ndarray) -> np.ndarray:
        """Pertinência à calota `index` pelos limites da calota."""
        z_top, z_bot, phi0, phi1 = self.cap_bounds(index)
        v = np.asarray(vectors, dtype=float).reshape(-1, 3)
        z = np.clip(v[:, 2], -1.0, 1.0)
        phi = np.mod(np.arctan2(v[:, 1], v[:, 0]), TWO_PI)

        in_z = (z >= z_bot) & ((z < z_top) | (z_top >= 1.0))
        in_phi = (phi >= phi0) & (phi < phi1)
        if phi1 >= TWO_PI:
            in_phi = in_phi | (phi >= TWO_PI)
        return in_z & in_phi


# ------------------------------------------------------------------------------
# Construção (zonal de área igual)
# ------------------------------------------------------------------------------
def _collar_counts(n: int) -> Tuple[float, List[int]]:
    """
    Ângulo da calota polar e número de regiões por faixa intermediária.

    O arredondamento carrega a discrepância acumulada de uma faixa para a
    próxima, então o total fecha em n - 2.
    """
    polar = 2.0 * math.asin(math.sqrt(1.0 / n))
    if n == 2:
        return polar, []

    ideal_angle = math.sqrt(4.0 * math.pi / n)
    n_collars = max(1, int(round((math.pi - 2.0 * polar) / ideal_angle)))
    collar_angle = (math.pi - 2.0 * polar) / n_collars
    region_area = 4.0 * math.pi / n

    counts: List[int] = []
    carry = 0.0
    for i in range(n_collars):
        top = polar + i * collar_angle
        bottom = top + collar_angle
        ideal = TWO_PI * (math.cos(top) - math.cos(bottom)) / region_area
        m = int(round(ideal + carry))
        carry += ideal - m
        counts.append(m)

    # fecha o total na última faixa
    counts[-1] += (n - 2) - sum(counts)
    counts = [c for c in counts if c > 0]
    if not counts:
        counts = [n - 2]
    return polar, counts


def _sin2_primitive(t: float) -> float:
    return (t - math.sin(t) * math.cos(t)) / 2.0


def _mean_vectors(z_edges: np.ndarray, sectors: np.ndarray) -> np.ndarray:
    """Vetor de Bloch médio (medida de área) de cada calota."""
    out = []
    for b in range(sectors.shape[0]):
        z_top, z_bot = float(z_edges[b]), float(z_edges[b + 1])
        t_top = math.acos(min(1.0, max(-1.0, z_top)))
        t_bot = math.acos(min(1.0, max(-1.0, z_bot)))
        mean_z = (z_top + z_bot) / 2.0
        # E[sen θ] = ∫ sen²θ dθ / ∫ sen θ dθ
        mean_s = (_sin2_primitive(t_bot) - _sin2_primitive(t_top)) / (z_top - z_bot)

        m = int(sectors[b])
        width = TWO_PI / m
        for k in range(m):
            p0, p1 = k * width, (k + 1) * width
            if m == 1:
                cx = cy = 0.0
            else:
                cx = (math.sin(p1) - math.sin(p0)) / width
                cy = (math.cos(p0) - math.cos(p1)) / width
            out.append((mean_s * cx, mean_s * cy, mean_z))
    return np.array(out, dtype=float)


def _centroids(z_edges, sectors, mean_vectors) -> np.ndarray:
    cents = np.empty_like(mean_vectors)
    i = 0
    for b in range(sectors.shape[0]):
        m = int(sectors[b])
        for k in range(m):
            v = mean_vectors[i]
            norm = float(np.linalg.norm(v))
            horiz = math.hypot(v[0], v[1])
            polar_band = b == 0 or b == sectors.shape[0] - 1
            if norm > 1e-12 and (horiz > 1e-12 or polar_band):
                cents[i] = v / norm
            else:
                # faixa inteira fora dos polos: ponto médio em área, φ central
                z = float(v[2])
                phi = TWO_PI * (k + 0.5) / m
                r = math.sqrt(max(0.0, 1.0 - z * z))
                cents[i] = (r * math.cos(phi), r * math.sin(phi), z)
            i += 1
    return cents


def _boundary_points(z_top: float, z_bot: float, p0: float, p1: float) -> np.ndarray:
    t = np.linspace(0.0, 1.0, _EDGE_SAMPLES)
    th_top = math.acos(min(1.0, max(-1.0, z_top)))
    th_bot = math.acos(min(1.0, max(-1.0, z_bot)))
    thetas = np.concatenate([
        np.full_like(t, th_top), np.full_like(t, th_bot),
        th_top + (th_bot - th_top) * t, th_top + (th_bot - th_top) * t,
    ])
    phis = np.concatenate([
        p0 + (p1 - p0) * t, p0 + (p1 - p0) * t,
        np.full_like(t, p0), np.full_like(t, p1),
    ])
    st = np.sin(thetas)
    return np.column_stack([st * np.cos(phis), st * np.sin(phis), np.cos(thetas)])


def _cap_diameters(z_edges: np.ndarray, sectors: np.ndarray) -> np.ndarray:
    diam = []
    last = sectors.shape[0] - 1
    for b in range(sectors.shape[0]):
        m = int(sectors[b])
        if b == 0 or b == last:
            # calota circular: diâmetro 2θc
            z_rim = float(z_edges[1]) if b == 0 else -float(z_edges[-2])
            diam.append(2.0 * math.acos(min(1.0, max(-1.0, z_rim))))
            continue
        for k in range(m):
            pts = _boundary_points(
                float(z_edges[b]), float(z_edges[b + 1]),
                TWO_PI * k / m, TWO_PI * (k + 1) / m,
            )
            cos = np.clip(pts @ pts.T, -1.0, 1.0)
            diam.append(float(np.arccos(cos.min())))
    return np.array(diam, dtype=float)


@lru_cache(maxsize=16)
def build_partition(target_caps: int) -> CapPartition:
    """
    Partição de área igual com `target_caps` calotas.

    Retorna CapPartition com:
      - pesos todos iguais a 1/N
      - centróides esféricos (média normalizada)
      - diameter_bound = maior diâmetro angular, O(1/√N)
    """
    n = int(target_caps)
    if n != target_caps or n < 2:
        raise PreconditionError(f"target_caps precisa ser inteiro ≥ 2: {target_caps!r}")

    polar, counts = _collar_counts(n)
    sectors = np.array([1] + counts + [1], dtype=np.int64)
    cumulative = np.concatenate([[0], np.cumsum(sectors)])
    # bordas exatas em z: área acumulada c/N ↔ z = 1 - 2c/N
    z_edges = 1.0 - 2.0 * cumulative / n
    z_edges[0], z_edges[-1] = 1.0, -1.0
    band_start = cumulative[:-1].astype(np.int64)

    mean_vectors = _mean_vectors(z_edges, sectors)
    centroid_vectors = _centroids(z_edges, sectors, mean_vectors)
    diameters = _cap_diameters(z_edges, sectors)

    for arr in (z_edges, sectors, band_start, mean_vectors, centroid_vectors, diameters):
        arr.setflags(write=False)
    weights = np.full(n, 1.0 / n)
    weights.setflags(write=False)

    part = CapPartition(
        cap_count=n,
        centroids=tuple(BlochPoint.from_vector(v) for v in centroid_vectors),
        weights=weights,
        diameter_bound=float(diameters.max()),
        z_edges=z_edges,
        sectors=sectors,
        band_start=band_start,
        centroid_vectors=centroid_vectors,
        mean_vectors=mean_vectors,
        diameters=diameters,
    )
    logger.debug(
        "[PARTICAO] N=%d faixas=%d calota polar=%.4f rad diametro=%.4f rad",
        n, part.band_count, polar, part.diameter_bound,
    )
    return part
