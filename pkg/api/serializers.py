# api/serializers.py
from django.conf import settings
from rest_framework import serializers

from analytic.curve import LAMBDA_MAX, LAMBDA_MIN
from coding.typicality import TYPICALITY_MODES
from optimizer.channel import LETTER_STATES

MAX_SEED = 2 ** 64 - 1
FORMATS = ("csv", "json", "svg")


class RSPParamsSerializer(serializers.Serializer):
    """
    Base dos parâmetros de comando.

    `setting_defaults` liga campo → chave de settings.RSP; o valor de settings
    entra só quando o campo não veio (ou veio None) nos dados.
    """

    setting_defaults = {}

    def __init__(self, *args, data=None, **kwargs):
        if data is not None:
            merged = {
                field: settings.RSP[key]
                for field, key in self.setting_defaults.items()
                if key in settings.RSP
            }
            merged.update({k: v for k, v in dict(data).items() if v is not None})
            data = merged
        super().__init__(*args, data=data, **kwargs)


class SeededSerializer(RSPParamsSerializer):
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED)
    workers = serializers.IntegerField(min_value=1, max_value=64)


# ------------------------------------------------------------------------------
# curve / invert / resources
# ------------------------------------------------------------------------------
class CurveParamsSerializer(RSPParamsSerializer):
    setting_defaults = {
        "lambda_min": "LAMBDA_MIN",
        "lambda_max": "LAMBDA_MAX",
        "points": "CURVE_POINTS",
        "workers": "WORKERS",
    }

    lambda_min = serializers.FloatField(min_value=LAMBDA_MIN, max_value=LAMBDA_MAX)
    lambda_max = serializers.FloatField(min_value=LAMBDA_MIN, max_value=LAMBDA_MAX)
    points = serializers.IntegerField(min_value=2, max_value=100_000)
    format = serializers.ChoiceField(choices=FORMATS, default="csv")
    workers = serializers.IntegerField(min_value=1, max_value=64)

    def validate(self, attrs):
        if attrs["lambda_min"] >= attrs["lambda_max"]:
            raise serializers.ValidationError("lambda_min precisa ser menor que lambda_max.")
        return attrs


class InvertParamsSerializer(RSPParamsSerializer):
    entropy = serializers.FloatField(min_value=0.0, max_value=1.0)


class ResourcesParamsSerializer(RSPParamsSerializer):
    # padrão: o protocolo dos hemisférios (1 bit, S ≈ 0.8113)
    rate = serializers.FloatField(min_value=0.0, default=1.0)
    entropy = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.8112781244591328)


# ------------------------------------------------------------------------------
# lo-example / optimize / simulate
# ------------------------------------------------------------------------------
class LoExampleParamsSerializer(SeededSerializer):
    setting_defaults = {"samples": "LO_SAMPLES", "seed": "DEFAULT_SEED", "workers": "WORKERS"}

    samples = serializers.IntegerField(min_value=1000)


class OptimizeParamsSerializer(SeededSerializer):
    setting_defaults = {
        "caps": "CAPS_OPTIMIZE",
        "tol": "TOL",
        "max_iters": "MAX_ITERS",
        "restarts": "RESTARTS",
        "seed": "DEFAULT_SEED",
        "workers": "WORKERS",
    }

    mu = serializers.FloatField(min_value=0.0, required=False)
    mu_grid = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), required=False, allow_empty=False
    )
    caps = serializers.IntegerField(min_value=2, max_value=20_000)
    tol = serializers.FloatField(min_value=0.0)
    max_iters = serializers.IntegerField(min_value=1)
    restarts = serializers.IntegerField(min_value=1)
    init = serializers.CharField(default="uniform")
    states = serializers.ChoiceField(choices=LETTER_STATES, default="mean")

    def validate(self, attrs):
        has_mu = attrs.get("mu") is not None
        has_grid = bool(attrs.get("mu_grid"))
        if has_mu == has_grid:
            raise serializers.ValidationError("Informe exatamente um entre mu e mu_grid.")
        if attrs["tol"] <= 0.0:
            raise serializers.ValidationError({"tol": "tol precisa ser positivo."})
        if has_mu and attrs["mu"] <= 0.0:
            raise serializers.ValidationError({"mu": "mu precisa ser positivo."})
        return attrs


class SimulateParamsSerializer(SeededSerializer):
    setting_defaults = {
        "lam": "SIM_LAMBDA",
        "n": "SIM_N",
        "rate_margin": "SIM_RATE_MARGIN",
        "caps": "CAPS_SIMULATE",
        "delta": "DELTA",
        "samples": "SIM_SAMPLES",
        "typicality": "TYPICALITY",
        "seed": "DEFAULT_SEED",
        "workers": "WORKERS",
    }

    lam = serializers.FloatField(min_value=LAMBDA_MIN, max_value=LAMBDA_MAX)
    n = serializers.IntegerField(min_value=1, max_value=64)
    rate_margin = serializers.FloatField()
    caps = serializers.IntegerField(min_value=2, max_value=20_000)
    delta = serializers.FloatField(min_value=0.0)
    samples = serializers.IntegerField(min_value=1000)
    typicality = serializers.ChoiceField(choices=TYPICALITY_MODES)

    def validate(self, attrs):
        if attrs["delta"] <= 0.0:
            raise serializers.ValidationError({"delta": "delta precisa ser positivo."})
        return attrs
