# optimizer/solver.py
from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr, softmax

from analytic.curve import (
    LAMBDA_MIN,
    entropy_s,
    lambda_for_entropy,
    lambda_for_multiplier,
    rate_r1,
)
from bloch.exceptions import NumericalError, PreconditionError
from bloch.partition import CapPartition
from bloch.states import IDENTITY_2, LN2, PAULI, density_stack

from .channel import (
    DiscreteChannel,
    ObjectiveReport,
    discretize_analytic_channel,
    evaluate,
    letter_vectors,
    mutual_information_nats,
    posterior_bloch_vectors,
    random_channel,
    uniform_channel,
)

logger = logging.getLogger(__name__)

REGULARIZATION = 1e-12
MONOTONE_TOL = 1e-9
ROW_SUM_TOL = 1e-10
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 20_000
DEFAULT_RESTARTS = 3

_RANDOM_INIT = re.compile(r"^random\((\d+)\)$")

Init = Union[DiscreteChannel, str]


@dataclass(frozen=True)
class StepResult:
    channel: DiscreteChannel
    residual: float
    relative_residual: float
    regularized: bool


# ------------------------------------------------------------------------------
# Núcleo vetorizado
# ------------------------------------------------------------------------------
def log_posteriors(r: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    log ρ_ŷ para a pilha de vetores de Bloch r (N, 3), via eigh em lote.

    Estados singulares são misturados com 1e-12·I/2 antes do log.
    """
    rho = density_stack(r)
    evals, evecs = np.linalg.eigh(rho)
    singular = evals[:, 0] < REGULARIZATION
    if np.any(singular):
        rho[singular] = (1.0 - REGULARIZATION) * rho[singular] + REGULARIZATION * IDENTITY_2 / 2.0
        evals[singular], evecs[singular] = np.linalg.eigh(rho[singular])
    logs = np.log(np.clip(evals, REGULARIZATION / 4.0, None))
    log_rho = np.einsum("nij,nj,nkj->nik", evecs, logs, evecs.conj())
    return log_rho, bool(np.any(singular))


def _update(q: np.ndarray, weights: np.ndarray, letters: np.ndarray, mu: float):
    """
    Uma atualização de ponto fixo:
      (a) marginal q̂ do canal atual
      (b) estados posteriores ρ_ŷ
      (c) Q̂(ŷ|x̂) ∝ q̂(ŷ) exp(μ tr(σ_x̂ log ρ_ŷ)), renormalizada por linha
    """
    marginal, r = posterior_bloch_vectors(q, weights, letters)
    log_rho, regularized = log_posteriors(r)

    # tr(σ_x L) = ½ tr L + ½ Σ_k v_k tr(σ_k L), com σ_x = (I + v·σ)/2
    trace_l = np.einsum("nii->n", log_rho).real
    pauli_l = np.einsum("kij,nji->nk", PAULI, log_rho).real
    exponent = 0.5 * (trace_l[None, :] + letters @ pauli_l.T)

    with np.errstate(divide="ignore"):
        log_marginal = np.log(marginal)
    new = softmax(log_marginal[None, :] + mu * exponent, axis=1)
    return new, regularized


def _lagrangian_nats(q: np.ndarray, weights: np.ndarray, letters: np.ndarray, mu: float) -> float:
    marginal, r = posterior_bloch_vectors(q, weights, letters)
    radius = np.clip(np.linalg.norm(r, axis=1), 0.0, 1.0)
    s_nats = entr((1.0 + radius) / 2.0) + entr((1.0 - radius) / 2.0)
    return mutual_information_nats(q, weights, marginal) + mu * float(marginal @ s_nats)


def _check_rows(q: np.ndarray, iteration: int) -> None:
    worst = float(np.max(np.abs(q.sum(axis=1) - 1.0)))
    if worst > ROW_SUM_TOL or np.any(q < 0.0):
        raise NumericalError(
            f"canal deixou de ser estocástico na iteração {iteration} (desvio {worst:.3e})",
            achieved=worst,
        )


def _check_multiplier(multiplier: float) -> float:
    mu = float(multiplier)
    if not math.isfinite(mu) or mu <= 0.0:
        raise PreconditionError(f"multiplicador precisa ser positivo: {multiplier!r}")
    return mu


# ------------------------------------------------------------------------------
# Operações
# ------------------------------------------------------------------------------
def fixed_point_step(ch: DiscreteChannel, multiplier: float) -> StepResult:
    """Aplica uma atualização e devolve o canal novo com o resíduo máximo."""
    mu = _check_multiplier(multiplier)
    new, regularized = _update(ch.q_matrix, ch.weights, ch.letters, mu)
    residual = float(np.max(np.abs(new - ch.q_matrix)))
    return StepResult(
        channel=DiscreteChannel(ch.partition, new, ch.states),
        residual=residual,
        relative_residual=residual / float(new.max()),
        regularized=regularized,
    )


def initial_channel(
    partition: CapPartition, init: Init, multiplier: float, *, states: str = "mean"
) -> Tuple[DiscreteChannel, str]:
    """
    Aceita:
      - DiscreteChannel sobre a mesma partição
      - "uniform"
      - "random(SEED)": linhas Dirichlet(1)
      - "analytic": Q^λ discretizado com λ tal que μ(λ) = multiplier
    """
    if isinstance(init, DiscreteChannel):
        if init.partition.cap_count != partition.cap_count:
            raise PreconditionError("canal inicial em outra partição")
        if init.states != states:
            init = DiscreteChannel(partition, init.q_matrix, states)
        return init, "channel"

    label = str(init).strip()
    if label == "uniform":
        return uniform_channel(partition, states=states), label
    if label == "analytic":
        lam = lambda_for_multiplier(multiplier)
        return discretize_analytic_channel(partition, lam, states=states), label
    match = _RANDOM_INIT.match(label)
    if match:
        return random_channel(partition, int(match.group(1)), states=states), label
    raise PreconditionError(f"init inválido: {init!r} (uniform, random(SEED), analytic)")


def fixed_point_solve(
    partition: CapPartition,
    multiplier: float,
    init: Init = "uniform",
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    *,
    states: str = "mean",
    debug: bool = False,
) -> Tuple[DiscreteChannel, ObjectiveReport]:
    """
    Minimiza I + μS alternando marginal, posteriores e linhas de Q̂.

    Para quando o resíduo (maior mudança entrada a entrada) fica abaixo de
    `tol` ou em `max_iters`. I + μS não pode subir mais que 1e-9 entre
    iterações: se subir levanta NumericalError.
    """
    mu = _check_multiplier(multiplier)
    if not math.isfinite(tol) or tol <= 0.0:
        raise PreconditionError(f"tol precisa ser positivo: {tol!r}")
    if int(max_iters) < 1:
        raise PreconditionError(f"max_iters precisa ser ≥ 1: {max_iters!r}")

    start, label = initial_channel(partition, init, mu, states=states)
    weights = partition.weights
    letters = letter_vectors(partition, states)

    q = np.array(start.q_matrix)
    j_prev = _lagrangian_nats(q, weights, letters, mu)
    j_start = j_prev
    residual = math.inf
    relative = math.inf
    regularized = False
    converged = False
    iterations = 0

    for iterations in range(1, int(max_iters) + 1):
        new, reg = _update(q, weights, letters, mu)
        regularized = regularized or reg
        residual = float(np.max(np.abs(new - q)))
        relative = residual / float(new.max())
        j = _lagrangian_nats(new, weights, letters, mu)

        if j > j_prev + MONOTONE_TOL * LN2:
            raise NumericalError(
                f"I + μS subiu na iteração {iterations}: {j_prev / LN2:.12f} → {j / LN2:.12f} bits",
                achieved=(j - j_prev) / LN2,
            )
        if debug:
            _check_rows(new, iterations)
        if iterations % 100 == 0:
            logger.debug(
                "[OPT] μ=%.6f it=%d J=%.12f bits res=%.3e", mu, iterations, j / LN2, residual
            )

        q, j_prev = new, j
        if residual < tol:
            converged = True
            break

    channel = DiscreteChannel(partition, q, states)
    i_bits, s_bits, lagrangian = evaluate(channel, mu)
    report = ObjectiveReport(
        multiplier=mu,
        mutual_info_bits=i_bits,
        posterior_entropy_bits=s_bits,
        lagrangian_value=lagrangian,
        iterations=iterations,
        converged=converged,
        residual=residual,
        relative_residual=relative,
        regularized=regularized,
        init=label,
        states=states,
        lagrangian_start=j_start / LN2,
    )
    if converged:
        logger.info(
            "[OPT] μ=%.6f convergiu em %d iterações: I=%.6f S=%.6f bits",
            mu, iterations, i_bits, s_bits,
        )
    else:
        logger.warning(
            "[OPT] μ=%.6f não convergiu em %d iterações (resíduo %.3e)", mu, iterations, residual
        )
    return channel, report


def restart_seeds(seed: int, count: int, restarts: int) -> List[List[int]]:
    """Sementes de reinício derivadas de SeedSequence(seed), uma lista por multiplicador."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        [int(s.generate_state(1, dtype=np.uint32)[0]) for s in child.spawn(restarts)]
        for child in children
    ]


def sweep_multiplier(
    partition: CapPartition,
    multiplier_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 20010601,
    *,
    restarts: int = DEFAULT_RESTARTS,
    states: str = "mean",
    workers: int = 1,
) -> List[ObjectiveReport]:
    """
    Uma execução por multiplicador, a melhor de `restarts` inicializações
    aleatórias pelo valor de I + μS. A ordem da saída segue a grade.
    """
    grid = [_check_multiplier(m) for m in multiplier_grid]
    if not grid:
        raise PreconditionError("grade de multiplicadores vazia")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError("grade de multiplicadores precisa ser estritamente crescente")
    if int(restarts) < 1:
        raise PreconditionError("restarts precisa ser ≥ 1")

    seeds = restart_seeds(seed, len(grid), int(restarts))

    def best_of(index: int) -> ObjectiveReport:
        best: Optional[ObjectiveReport] = None
        for s in seeds[index]:
            _, report = fixed_point_solve(
                partition, grid[index], f"random({s})", tol, max_iters, states=states
            )
            if best is None or report.lagrangian_value < best.lagrangian_value:
                best = report
        return best

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(best_of, range(len(grid))))
    return [best_of(i) for i in range(len(grid))]


def distance_to_curve(report: ObjectiveReport) -> float:
    """
    I - R₁(λ(S)) em bits: distância na direção de I até a curva analítica
    no mesmo S. Para S acima do alcance de λ a curva vale 0.
    """
    s = report.posterior_entropy_bits
    if s >= entropy_s(LAMBDA_MIN):
        return report.mutual_info_bits
    if s <= 0.0:
        raise PreconditionError("entropia posterior nula não tem ponto na curva")
    return report.mutual_info_bits - rate_r1(lambda_for_entropy(s))


def row_exponent_fit(ch: DiscreteChannel, row: int) -> Tuple[float, float, float]:
    """
    Ajuste afim de log Q̂(·|x̂) contra o overlap dos centróides.

    Retorna (inclinação, intercepto, maior resíduo absoluto).
    """
    if row < 0 or row >= ch.cap_count:
        raise PreconditionError(f"linha {row} fora de [0, {ch.cap_count})")
    cents = ch.partition.centroid_vectors
    u = (1.0 + np.clip(cents @ cents[row], -1.0, 1.0)) / 2.0
    with np.errstate(divide="ignore"):
        y = np.log(ch.q_matrix[row])
    ok = np.isfinite(y)
    slope, intercept = np.polyfit(u[ok], y[ok], 1)
    resid = y[ok] - (slope * u[ok] + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


def consistency_exponent(ch: DiscreteChannel, multiplier: float) -> float:
    """
    μ·ln((1-p)/p) com p o autovalor menor médio dos posteriores: o expoente
    que a linha atualizada deve mostrar em função do overlap.
    """
    radius = np.clip(np.linalg.norm(ch.posterior_vectors, axis=1), 0.0, 1.0 - 1e-15)
    r = float(ch.marginal @ radius)
    return float(multiplier) * math.log((1.0 + r) / (1.0 - r))
