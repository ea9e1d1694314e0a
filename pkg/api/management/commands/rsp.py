# api/management/commands/rsp.py
import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, NamedTuple

from decouple import RepositoryEnv
from django.core.management.base import BaseCommand, CommandError

from api.exporters import render_result, write_atomic
from api.serializers import FORMATS
from api.services import run_command
from bloch.exceptions import InvalidStateError, NumericalError, PreconditionError, ResourceLimitError

EXIT_PRECONDITION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de floats inválida: {text!r}") from None


class Option(NamedTuple):
    flag: str
    dest: str
    type: Callable[[str], Any]
    help: str

    @property
    def config_key(self) -> str:
        # --lambda-min → LAMBDA_MIN
        return self.flag.lstrip("-").upper().replace("-", "_")


SEED = Option("--seed", "seed", int, "Semente (inteiro de 64 bits sem sinal)")
WORKERS = Option("--workers", "workers", int, "Threads de trabalho")
OUT = Option("--out", "out", str, "Arquivo de saída (padrão: stdout)")

OPTIONS: Dict[str, List[Option]] = {
    "curve": [
        Option("--lambda-min", "lambda_min", float, "Menor λ da grade"),
        Option("--lambda-max", "lambda_max", float, "Maior λ da grade"),
        Option("--points", "points", int, "Pontos da grade (geométrica)"),
        Option("--format", "format", str, f"Formato: {', '.join(FORMATS)}"),
        WORKERS,
        OUT,
    ],
    "invert": [
        Option("--entropy", "entropy", float, "Entropia alvo S em bits, em (0, 1)"),
    ],
    "resources": [
        Option("--rate", "rate", float, "Taxa clássica R em bits"),
        Option("--entropy", "entropy", float, "Entropia S em bits"),
    ],
    "lo-example": [
        Option("--samples", "samples", int, "Amostras de Monte Carlo"),
        SEED,
        WORKERS,
    ],
    "optimize": [
        Option("--mu", "mu", float, "Multiplicador μ de I + μS"),
        Option("--mu-grid", "mu_grid", _float_list, "Grade crescente de μ separada por vírgulas"),
        Option("--caps", "caps", int, "Número de calotas"),
        Option("--tol", "tol", float, "Tolerância do resíduo"),
        Option("--max-iters", "max_iters", int, "Máximo de iterações"),
        Option("--restarts", "restarts", int, "Reinícios aleatórios por μ (grade)"),
        Option("--init", "init", str, "uniform, random(SEED) ou analytic"),
        Option("--states", "states", str, "Estados das letras: mean ou centroid"),
        SEED,
        WORKERS,
        OUT,
    ],
    "simulate": [
        Option("--lambda", "lam", float, "λ do canal"),
        Option("--n", "n", int, "Comprimento de bloco"),
        Option("--rate-margin", "rate_margin", float, "Taxa = R₁(λ) + margem, em bits"),
        Option("--caps", "caps", int, "Número de calotas"),
        Option("--delta", "delta", float, "Folga δ da tipicidade"),
        Option("--samples", "samples", int, "Blocos simulados"),
        Option("--typicality", "typicality", str, "weak ou strong"),
        SEED,
        WORKERS,
        OUT,
    ],
}

HELP = {
    "curve": "Emite a curva (R₁, S, b, e) em CSV, JSON ou SVG",
    "invert": "λ e R₁ para uma entropia alvo",
    "resources": "Ponto (b, e) de um protocolo baseado em teleporte",
    "lo-example": "Exemplo dos hemisférios: exato contra Monte Carlo",
    "optimize": "Resolve min I + μS nas calotas (um μ ou uma grade)",
    "simulate": "Simula o código aleatório e estima a entropia posterior",
}


def read_config_file(path: str, command: str) -> Dict[str, Any]:
    """Arquivo KEY=VALUE (formato .env). Só as chaves do comando entram; o ambiente não."""
    values = RepositoryEnv(path).data
    found: Dict[str, Any] = {}
    for opt in OPTIONS[command]:
        if opt.config_key not in values:
            continue
        raw = values[opt.config_key]
        try:
            found[opt.dest] = opt.type(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise PreconditionError(f"{opt.config_key} inválido no arquivo de configuração: {raw!r}") from exc
    return found


class Command(BaseCommand):
    help = "Tradeoff taxa × entropia da preparação remota de estados: curva, otimizador e simulação."

    _dispatched = False

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest="subcommand", required=True)
        for name, options in OPTIONS.items():
            p = sub.add_parser(name, help=HELP[name])
            p.add_argument(
                "--config", dest="config", default=None,
                help="Arquivo KEY=VALUE com valores padrão (as flags têm precedência)",
            )
            for opt in options:
                p.add_argument(opt.flag, dest=opt.dest, type=opt.type, default=None, help=opt.help)

    def run_from_argv(self, argv):
        # erro de uso do argparse sai com 2; aqui uso é código 1
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f"CommandError: {exc}")
            sys.exit(EXIT_PRECONDITION)
        except SystemExit as exc:
            if exc.code == 2 and not self._dispatched:
                sys.exit(EXIT_PRECONDITION)
            raise

    def _collect(self, command: str, opts: Dict[str, Any]) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if opts.get("config"):
            try:
                data.update(read_config_file(opts["config"], command))
            except OSError as exc:
                raise CommandError(f"falha ao ler {opts['config']}: {exc}", returncode=EXIT_IO)
            except PreconditionError as exc:
                raise CommandError(str(exc), returncode=EXIT_PRECONDITION)
        for opt in OPTIONS[command]:
            if opts.get(opt.dest) is not None:
                data[opt.dest] = opts[opt.dest]
        return data

    def handle(self, *args, **opts):
        self._dispatched = True
        if opts.get("verbosity", 1) >= 2:
            logging.getLogger().setLevel(logging.DEBUG)

        command = opts["subcommand"]
        data = self._collect(command, opts)
        out = data.pop("out", None)

        try:
            result = run_command(command, data)
        except (PreconditionError, InvalidStateError, ResourceLimitError) as exc:
            raise CommandError(str(exc), returncode=EXIT_PRECONDITION)
        except NumericalError as exc:
            raise CommandError(f"{exc} (atingido: {exc.achieved!r})", returncode=EXIT_NUMERICAL)

        text = render_result(result, result.config.get("format"))
        try:
            if out:
                write_atomic(out, text)
                self.stdout.write(self.style.SUCCESS(f"{command}: relatório gravado em {out}"))
            else:
                self.stdout.write(text, ending="")
        except OSError as exc:
            raise CommandError(f"falha ao gravar {out}: {exc}", returncode=EXIT_IO)

        if not result.ok:
            raise CommandError(
                f"{command}: não convergiu (relatório gravado)", returncode=EXIT_NUMERICAL
            )
