# analytic/quadrature.py
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate

from bloch.exceptions import NumericalError
from bloch.states import LN2, TWO_PI, BlochPoint, DensityMatrix, overlap

from .curve import LambdaLike, as_lambda, q_lambda_density_overlap

logger = logging.getLogger(__name__)

EPSABS_1D = 1e-12
EPSREL_1D = 1e-12
EPSABS_2D = 1e-10
# erro estimado aceitável antes de levantar NumericalError
MAX_ABSERR = 1e-8


def _overlap_log_density(u: float, x: float) -> float:
    # log f(u), f(u) = λ e^{λu}/(e^λ - 1) densidade do overlap em [0, 1]
    return math.log(x) + x * (u - 1.0) - math.log(-math.expm1(-x))


def _overlap_density(u: float, x: float) -> float:
    return math.exp(_overlap_log_density(u, x))


def _breakpoints(x: float) -> Optional[List[float]]:
    # para λ grande a massa fica numa faixa de largura ~1/λ perto de u = 1
    if x <= 50.0:
        return None
    return [max(0.0, 1.0 - 40.0 / x)]


def _quad(func, x: float, label: str) -> float:
    value, abserr = integrate.quad(
        func, 0.0, 1.0,
        epsabs=EPSABS_1D, epsrel=EPSREL_1D, limit=200, points=_breakpoints(x),
    )
    if not math.isfinite(value) or abserr > MAX_ABSERR:
        raise NumericalError(
            f"quadratura '{label}' não convergiu para λ={x!r} (erro {abserr:.3e})",
            achieved=abserr,
        )
    return value


# ------------------------------------------------------------------------------
# Oráculos por quadratura
# ------------------------------------------------------------------------------
def mutual_information_quadrature(lam: LambdaLike) -> float:
    """
    I(X;Y) para Q^λ com x uniforme, em bits.

    Pela isotropia só importa u = |⟨x|y⟩|², uniforme em [0, 1] sob y
    uniforme; a integral é 1-D: ∫ f log f du.
    """
    x = as_lambda(lam)
    nats = _quad(lambda u: _overlap_density(u, x) * _overlap_log_density(u, x), x, "mi")
    return max(nats, 0.0) / LN2


def q_lambda_normalization(lam: LambdaLike, x: Optional[BlochPoint] = None) -> float:
    """
    ∫ Q^λ(y|x) dy.

    Sem `x` integra em u; com `x` integra na esfera (θ, φ) ao redor do
    ponto dado.
    """
    lam_v = as_lambda(lam)
    if x is None:
        return _quad(lambda u: _overlap_density(u, lam_v), lam_v, "norm")
    return sphere_integral(lambda u: float(q_lambda_density_overlap(u, lam_v)), x)


def sphere_integral(func_of_overlap, x: BlochPoint, epsabs: float = EPSABS_2D) -> float:
    """∫ g(|⟨x|y⟩|²) dy sobre a esfera, em coordenadas de y."""
    anchor = x

    def integrand(phi: float, theta: float) -> float:
        y = BlochPoint(theta, phi)
        return func_of_overlap(overlap(anchor, y)) * math.sin(theta)

    value, abserr = integrate.dblquad(
        integrand, 0.0, math.pi, 0.0, TWO_PI, epsabs=epsabs, epsrel=1e-10,
    )
    if abserr > 100.0 * epsabs:
        raise NumericalError(f"quadratura esférica imprecisa (erro {abserr:.3e})", achieved=abserr)
    return value


def mutual_information_at(x: BlochPoint, lam: LambdaLike) -> float:
    """
    I(X;Y) fixando a entrada em `x` e integrando na esfera: D(Q^λ(·|x) ‖ 1/4π).

    Igual a mutual_information_quadrature para qualquer x.
    """
    lam_v = as_lambda(lam)
    nats = sphere_integral(
        lambda u: _overlap_density(u, lam_v) * _overlap_log_density(u, lam_v) / (4.0 * math.pi),
        x,
    )
    return max(nats, 0.0) / LN2


def posterior_state_with_diagnostics(lam: LambdaLike) -> Tuple[DensityMatrix, Dict[str, float]]:
    """
    ρ' = ∫ dx P(x|y=0) |x⟩⟨x| por quadratura, com y fixo no polo norte.

    Com x = (θ, φ), u = |⟨x|0⟩|² = cos²(θ/2). As entradas:
      - ρ00 = ∫ f(u) u du
      - ρ11 = ∫ f(u) (1 - u) du
      - ρ01 = ∫ f(u) √(u(1-u)) du · (1/2π)∫ e^{-iφ} dφ

    Retorna (ρ', debug) onde debug traz o traço antes de normalizar.
    """
    x = as_lambda(lam)
    f = lambda u: _overlap_density(u, x)  # noqa: E731

    norm = _quad(f, x, "trace")
    r00 = _quad(lambda u: f(u) * u, x, "rho00")
    r11 = _quad(lambda u: f(u) * (1.0 - u), x, "rho11")
    radial = _quad(lambda u: f(u) * math.sqrt(max(u * (1.0 - u), 0.0)), x, "rho01")

    phase_re, _ = integrate.quad(math.cos, 0.0, TWO_PI, epsabs=EPSABS_1D)
    phase_im, _ = integrate.quad(lambda t: -math.sin(t), 0.0, TWO_PI, epsabs=EPSABS_1D)
    r01 = radial * complex(phase_re, phase_im) / TWO_PI

    m = np.array([[r00, r01], [np.conj(r01), r11]], dtype=complex) / norm
    debug = {"lambda": x, "trace_before_normalization": norm, "offdiag_abs": abs(r01)}
    logger.debug("[QUAD] posterior λ=%.6g traço=%.15f |ρ01|=%.3e", x, norm, abs(r01))
    return DensityMatrix(m), debug


def posterior_state(lam: LambdaLike) -> DensityMatrix:
    """Estado posterior ρ' de Q^λ (autovalores p(λ) e 1 - p(λ))."""
    rho, _ = posterior_state_with_diagnostics(lam)
    return rho
