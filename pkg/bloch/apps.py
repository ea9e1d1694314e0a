from django.apps import AppConfig


class BlochConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'bloch'
    verbose_name = 'Esfera de Bloch'
