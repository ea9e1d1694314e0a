from django.urls import path

from . import views

# ------------------------------------------------------------------------------
# URL patterns
# ------------------------------------------------------------------------------
urlpatterns = [
    path("curve/", views.CurveView.as_view(), name="rsp-curve"),
    path("invert/", views.InvertView.as_view(), name="rsp-invert"),
    path("resources/", views.ResourcesView.as_view(), name="rsp-resources"),
]
