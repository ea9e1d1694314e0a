# api/services.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Type

from rest_framework import serializers

from analytic.curve import (
    LAMBDA_MAX,
    LAMBDA_MIN,
    CurvePoint,
    curve_diagnostics,
    default_lambda_grid,
    emit_curve,
    entropy_s,
    lambda_for_entropy,
    p_lambda,
    rate_r1,
    resource_point,
)
from bloch.exceptions import PreconditionError
from bloch.partition import build_partition
from coding.simulation import estimate_posterior_entropy, lo_hemisphere_example
from coding.typicality import TypicalityParams
from optimizer.solver import (
    distance_to_curve,
    fixed_point_solve,
    fixed_point_step,
    initial_channel,
    sweep_multiplier,
)

from .serializers import (
    CurveParamsSerializer,
    InvertParamsSerializer,
    LoExampleParamsSerializer,
    OptimizeParamsSerializer,
    ResourcesParamsSerializer,
    SimulateParamsSerializer,
)

logger = logging.getLogger(__name__)

# ponto do teleporte: 2 bits e 1 ebit
TELEPORTATION_POINT = (2.0, 1.0)


@dataclass
class CommandResult:
    """
    Resultado de um comando.

    `payload` é o relatório (já com o eco da configuração); `ok=False`
    indica não convergência, e o relatório ainda assim é gravado.
    """

    command: str
    payload: Dict[str, Any]
    ok: bool = True
    points: List[CurvePoint] = field(default_factory=list)

    @property
    def config(self) -> Dict[str, Any]:
        return self.payload["config"]


def _format_errors(errors: Any) -> str:
    if isinstance(errors, Mapping):
        parts = []
        for key, value in errors.items():
            label = "" if key == "non_field_errors" else f"{key}: "
            parts.append(label + _format_errors(value))
        return "; ".join(parts)
    if isinstance(errors, (list, tuple)):
        return ", ".join(_format_errors(e) for e in errors)
    return str(errors)


def validate_params(serializer_class: Type[serializers.Serializer], data: Mapping[str, Any]) -> Dict[str, Any]:
    """Valida com o serializer e devolve os dados limpos; erro vira PreconditionError."""
    ser = serializer_class(data=dict(data))
    if not ser.is_valid():
        raise PreconditionError(_format_errors(ser.errors))
    return dict(ser.validated_data)


def _echo(command: str, params: Mapping[str, Any]) -> Dict[str, Any]:
    return {"command": command, **params}


def _safe_distance(report) -> Optional[float]:
    try:
        return distance_to_curve(report)
    except PreconditionError:
        return None


# ------------------------------------------------------------------------------
# Comandos
# ------------------------------------------------------------------------------
def run_curve(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(CurveParamsSerializer, data)
    grid = default_lambda_grid(params["lambda_min"], params["lambda_max"], params["points"])
    points = emit_curve(grid, workers=params["workers"])
    payload = {
        "config": _echo("curve", params),
        "diagnostics": curve_diagnostics(points),
        "points": [p.as_dict() for p in points],
    }
    return CommandResult("curve", payload, points=points)


def run_invert(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(InvertParamsSerializer, data)
    lam = lambda_for_entropy(params["entropy"])
    payload = {
        "config": _echo("invert", params),
        "lambda": lam.value,
        "saturated": lam.value in (LAMBDA_MIN, LAMBDA_MAX),
        "rate_bits": rate_r1(lam),
        "entropy_bits": entropy_s(lam),
        "p_lambda": p_lambda(lam),
    }
    return CommandResult("invert", payload)


def run_resources(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(ResourcesParamsSerializer, data)
    b, e = resource_point(params["rate"], params["entropy"])
    payload = {
        "config": _echo("resources", params),
        "b_bits": b,
        "e_ebits": e,
        "teleportation": {"b_bits": TELEPORTATION_POINT[0], "e_ebits": TELEPORTATION_POINT[1]},
    }
    return CommandResult("resources", payload)


def run_lo_example(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(LoExampleParamsSerializer, data)
    report = lo_hemisphere_example(params["samples"], params["seed"], workers=params["workers"])
    b, e = resource_point(1.0, report.exact)
    payload = {
        "config": _echo("lo-example", params),
        **report.as_dict(),
        "b_bits": b,
        "e_ebits": e,
    }
    return CommandResult("lo-example", payload)


def run_optimize(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(OptimizeParamsSerializer, data)
    partition = build_partition(params["caps"])
    echo = _echo("optimize", params)

    if params.get("mu") is not None:
        mu = params["mu"]
        start, _ = initial_channel(partition, params["init"], mu, states=params["states"])
        first = fixed_point_step(start, mu)
        _, report = fixed_point_solve(
            partition,
            mu,
            params["init"],
            params["tol"],
            params["max_iters"],
            states=params["states"],
        )
        payload = {
            "config": echo,
            "cap_count": partition.cap_count,
            "diameter_bound": partition.diameter_bound,
            "initial_residual": first.residual,
            "initial_relative_residual": first.relative_residual,
            "report": {**report.as_dict(), "distance_to_curve": _safe_distance(report)},
        }
        return CommandResult("optimize", payload, ok=report.converged)

    reports = sweep_multiplier(
        partition,
        params["mu_grid"],
        params["tol"],
        params["max_iters"],
        params["seed"],
        restarts=params["restarts"],
        states=params["states"],
        workers=params["workers"],
    )
    entropies = [r.posterior_entropy_bits for r in reports]
    payload = {
        "config": echo,
        "cap_count": partition.cap_count,
        "diameter_bound": partition.diameter_bound,
        "monotone_entropy": all(b <= a + 1e-9 for a, b in zip(entropies, entropies[1:])),
        "frontier": [
            {**r.as_dict(), "distance_to_curve": _safe_distance(r)} for r in reports
        ],
    }
    return CommandResult("optimize", payload, ok=all(r.converged for r in reports))


def run_simulate(data: Mapping[str, Any]) -> CommandResult:
    params = validate_params(SimulateParamsSerializer, data)
    lam = params["lam"]
    r1 = rate_r1(lam)
    rate = r1 + params["rate_margin"]
    if rate < 0.0:
        raise PreconditionError(f"taxa R₁ + margem negativa: {rate!r}")

    tp = TypicalityParams(
        params["delta"], build_partition(params["caps"]), params["n"], params["typicality"]
    )
    estimate = estimate_posterior_entropy(
        lam, tp, rate, params["samples"], params["seed"], workers=params["workers"]
    )
    payload = {
        "config": _echo("simulate", params),
        "rate_r1_bits": r1,
        **estimate.as_dict(),
    }
    if not estimate.valid:
        logger.warning("[SIM] nenhuma codificação bem sucedida; relatório marcado inválido")
    return CommandResult("simulate", payload, ok=estimate.valid)


COMMANDS = {
    "curve": run_curve,
    "invert": run_invert,
    "resources": run_resources,
    "lo-example": run_lo_example,
    "optimize": run_optimize,
    "simulate": run_simulate,
}


def run_command(command: str, data: Mapping[str, Any]) -> CommandResult:
    try:
        handler = COMMANDS[command]
    except KeyError:
        raise PreconditionError(f"comando desconhecido: {command!r}") from None
    logger.info("[RSP] %s %s", command, {k: v for k, v in data.items() if v is not None})
    return handler(data)
