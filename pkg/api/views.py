from rest_framework import permissions, status
from rest_framework.response import Response
from rest_framework.views import APIView

from bloch.exceptions import RSPError

from .services import run_curve, run_invert, run_resources


class RSPQueryView(APIView):
    """
    GET com os parâmetros na query string; devolve o mesmo JSON que o
    comando `rsp` grava. Sem estado e sem autenticação.
    """

    permission_classes = [permissions.AllowAny]
    authentication_classes = []
    runner = None

    def get(self, request):
        try:
            result = self.runner(request.query_params.dict())
        except RSPError as e:
            return Response({"detail": str(e)}, status=status.HTTP_400_BAD_REQUEST)
        return Response(result.payload, status=status.HTTP_200_OK)


class CurveView(RSPQueryView):
    """
    GET /api/curve/?lambda_min=0.001&lambda_max=50&points=200

    Retorna config, diagnostics e points (lambda, rate_bits, entropy_bits, b_bits, e_ebits).
    """

    runner = staticmethod(run_curve)


class InvertView(RSPQueryView):
    """GET /api/invert/?entropy=0.9"""

    runner = staticmethod(run_invert)


class ResourcesView(RSPQueryView):
    """GET /api/resources/?rate=1&entropy=0.8113"""

    runner = staticmethod(run_resources)
