# analytic/curve.py
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from bloch.exceptions import PreconditionError
from bloch.states import LN2, BlochPoint, binary_entropy, overlap

logger = logging.getLogger(__name__)

LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1e3
# abaixo disso 1/λ - 1/(e^λ - 1) perde toda a precisão: usa série
SERIES_CUTOFF = 1e-3
RATE_SERIES_CUTOFF = 0.1
CONVEXITY_TOL = 1e-9


@dataclass(frozen=True)
class LambdaParam:
    """Multiplicador de Lagrange λ > 0 (avaliação limitada a [1e-6, 1e3])."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v <= 0.0:
            raise PreconditionError(f"lambda precisa ser positivo e finito: {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def clamped(self) -> float:
        return min(max(self.value, LAMBDA_MIN), LAMBDA_MAX)

    def __float__(self) -> float:
        return self.value


LambdaLike = Union[float, LambdaParam]


def as_lambda(lam: LambdaLike) -> float:
    if not isinstance(lam, LambdaParam):
        lam = LambdaParam(lam)
    return lam.clamped


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    rate_bits: float
    entropy_bits: float
    b_bits: float
    e_ebits: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "lambda": self.lam,
            "rate_bits": self.rate_bits,
            "entropy_bits": self.entropy_bits,
            "b_bits": self.b_bits,
            "e_ebits": self.e_ebits,
        }


CURVE_COLUMNS = ("lambda", "rate_bits", "entropy_bits", "b_bits", "e_ebits")


# ------------------------------------------------------------------------------
# Formas fechadas
# ------------------------------------------------------------------------------
def p_lambda(lam: LambdaLike) -> float:
    """
    Autovalor menor do estado posterior: p(λ) = 1/λ - 1/(e^λ - 1), em (0, ½).
    """
    x = as_lambda(lam)
    if x < SERIES_CUTOFF:
        return 0.5 - x / 12.0 + x ** 3 / 720.0 - x ** 5 / 30240.0
    # 1/(e^λ - 1) = e^{-λ}/(1 - e^{-λ}), sem overflow
    return 1.0 / x - math.exp(-x) / -math.expm1(-x)


def _one_minus_two_p(x: float) -> float:
    if x < SERIES_CUTOFF:
        return x / 6.0 - x ** 3 / 360.0 + x ** 5 / 15120.0
    return 1.0 - 2.0 * p_lambda(x)


def rate_r1_nats(lam: LambdaLike) -> float:
    """
    R₁(λ) = λ/(e^λ-1) - 1 + log(λe^λ/(e^λ-1)), em nats.

    Com t = λ/2 vira t·coth t - 1 - log(senh t / t): os dois termos já são
    O(t²), então não há cancelamento de parcelas O(1) perto de zero.
    """
    x = as_lambda(lam)
    t = x / 2.0
    if x < RATE_SERIES_CUTOFF:
        t2 = t * t
        return t2 * (1.0 / 6.0 - t2 * (1.0 / 60.0 - t2 * (1.0 / 567.0 - t2 / 5400.0)))
    log_sinh = t + math.log1p(-math.exp(-2.0 * t)) - LN2
    return t / math.tanh(t) - 1.0 - (log_sinh - math.log(t))


def rate_r1(lam: LambdaLike) -> float:
    """Taxa R₁(λ) em bits por letra."""
    return max(rate_r1_nats(lam), 0.0) / LN2


def entropy_s(lam: LambdaLike) -> float:
    """S(λ) = h₂(p(λ)) em bits."""
    return binary_entropy(p_lambda(lam))


def multiplier_for_lambda(lam: LambdaLike) -> float:
    """
    μ(λ) = λ / ln((1-p)/p): multiplicador de entropia em que Q^λ satisfaz a
    equação de ponto fixo. Tende a 3 quando λ → 0⁺.
    """
    x = as_lambda(lam)
    p = p_lambda(x)
    return x / math.log1p(_one_minus_two_p(x) / p)


def lambda_for_multiplier(mu: float) -> LambdaParam:
    """Inversa de multiplier_for_lambda; só existe para μ > 3."""
    m = float(mu)
    lo_mu, hi_mu = multiplier_for_lambda(LAMBDA_MIN), multiplier_for_lambda(LAMBDA_MAX)
    if not math.isfinite(m) or m <= lo_mu or m >= hi_mu:
        raise PreconditionError(
            f"multiplicador {mu!r} fora de ({lo_mu:.6f}, {hi_mu:.3f}): "
            "abaixo de 3 o canal uniforme é o ótimo"
        )
    t = bisect(
        lambda t: multiplier_for_lambda(math.exp(t)) - m,
        math.log(LAMBDA_MIN), math.log(LAMBDA_MAX), xtol=1e-14, maxiter=200,
    )
    return LambdaParam(math.exp(t))


def q_lambda_density_overlap(u: Union[float, np.ndarray], lam: LambdaLike):
    """Q^λ como função do overlap u = |⟨x|y⟩|², por esterradiano."""
    x = as_lambda(lam)
    scale = x / -math.expm1(-x)
    return scale * np.exp(x * (np.asarray(u, dtype=float) - 1.0)) / (4.0 * math.pi)


def q_lambda_density(y: BlochPoint, x: BlochPoint, lam: LambdaLike) -> float:
    """Q^λ(y|x) = (1/4π) λ/(e^λ-1) e^{λ|⟨x|y⟩|²}."""
    return float(q_lambda_density_overlap(overlap(x, y), lam))


# ------------------------------------------------------------------------------
# Inversão e pontos do plano (b, e)
# ------------------------------------------------------------------------------
def lambda_for_entropy(s_target: float) -> LambdaParam:
    """
    λ tal que S(λ) = s_target, por bisseção em log λ (S é estritamente
    decrescente). Alvos fora do alcance de [1e-6, 1e3] são saturados.
    """
    s = float(s_target)
    if not math.isfinite(s) or s <= 0.0 or s >= 1.0:
        raise PreconditionError(f"entropia alvo precisa estar em (0, 1): {s_target!r}")

    lo, hi = math.log(LAMBDA_MIN), math.log(LAMBDA_MAX)
    if s >= entropy_s(LAMBDA_MIN):
        logger.warning("[INVERT] S=%.12f acima do alcance; saturando em λ=%g", s, LAMBDA_MIN)
        return LambdaParam(LAMBDA_MIN)
    if s <= entropy_s(LAMBDA_MAX):
        logger.warning("[INVERT] S=%.12f abaixo do alcance; saturando em λ=%g", s, LAMBDA_MAX)
        return LambdaParam(LAMBDA_MAX)

    t = bisect(lambda t: entropy_s(math.exp(t)) - s, lo, hi, xtol=1e-14, maxiter=200)
    return LambdaParam(math.exp(t))


def resource_point(rate_bits: float, entropy_bits: float) -> Tuple[float, float]:
    """Protocolo baseado em teleporte: (b, e) = (R + 2S, S)."""
    return rate_bits + 2.0 * entropy_bits, entropy_bits


def tradeoff_point(lam: LambdaLike) -> CurvePoint:
    x = as_lambda(lam)
    r = rate_r1(x)
    s = entropy_s(x)
    b, e = resource_point(r, s)
    return CurvePoint(lam=x, rate_bits=r, entropy_bits=s, b_bits=b, e_ebits=e)


def default_lambda_grid(
    lambda_min: float = 1e-4, lambda_max: float = 50.0, points: int = 200
) -> List[float]:
    if points < 2:
        raise PreconditionError("a grade precisa de pelo menos 2 pontos")
    if not (0.0 < lambda_min < lambda_max):
        raise PreconditionError("grade exige 0 < lambda_min < lambda_max")
    return [float(v) for v in np.geomspace(lambda_min, lambda_max, points)]


def emit_curve(lambda_grid: Sequence[LambdaLike], *, workers: int = 1) -> List[CurvePoint]:
    """
    Tabela (R₁, S, b, e) na grade de λ, na ordem da grade.

    A grade precisa ser estritamente crescente e caber em [1e-6, 1e3].
    """
    grid = [float(g) for g in lambda_grid]
    if not grid:
        raise PreconditionError("grade de lambda vazia")
    for g in grid:
        LambdaParam(g)
        if g < LAMBDA_MIN or g > LAMBDA_MAX:
            raise PreconditionError(f"lambda {g!r} fora de [{LAMBDA_MIN}, {LAMBDA_MAX}]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError("grade de lambda precisa ser estritamente crescente")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(tradeoff_point, grid))
    else:
        points = [tradeoff_point(g) for g in grid]

    diag = curve_diagnostics(points)
    if not diag["ok"]:
        logger.warning("[CURVE] diagnostico falhou: %s", diag)
    return points


def curve_diagnostics(points: Sequence[CurvePoint]) -> Dict[str, Any]:
    """
    Checagens de forma:
      - S estritamente decrescente, R estritamente crescente
      - R(S) convexa (segundas diferenças ≥ -1e-9, na escala de R)
      - b ≥ 2e
    """
    s = np.array([p.entropy_bits for p in points])
    r = np.array([p.rate_bits for p in points])
    b = np.array([p.b_bits for p in points])
    e = np.array([p.e_ebits for p in points])

    s_dec = bool(np.all(np.diff(s) < 0.0)) if len(points) > 1 else True
    r_inc = bool(np.all(np.diff(r) > 0.0)) if len(points) > 1 else True

    min_second = 0.0
    if len(points) > 2:
        # em S crescente, as inclinações de R(S) precisam crescer
        s_asc, r_asc = s[::-1], r[::-1]
        slopes = np.diff(r_asc) / np.diff(s_asc)
        second = np.diff(slopes) * (s_asc[2:] - s_asc[:-2]) / 2.0
        min_second = float(second.min())
    convex = min_second >= -CONVEXITY_TOL

    floor_ok = bool(np.all(b >= 2.0 * e - 1e-15))
    return {
        "ok": s_dec and r_inc and convex and floor_ok,
        "entropy_decreasing": s_dec,
        "rate_increasing": r_inc,
        "convex": convex,
        "min_second_difference": min_second,
        "b_at_least_2e": floor_ok,
    }
