"""
Django settings for setup project.

Generated by 'django-admin startproject' using Django 4.2.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path

from decouple import Csv, config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Quick-start development settings - unsuitable for production
# See https://docs.djangoproject.com/en/4.2/howto/deployment/checklist/

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config(
    "SECRET_KEY", default="django-insecure-rsp-local-only-5q!w8k2#n0v@z3m7x1c6b9"
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config("DEBUG", default=True, cast=bool)

ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="localhost,127.0.0.1", cast=Csv())


# Application definition

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.staticfiles',

    # App de terceiros
    'rest_framework',
    'drf_yasg',

    # Meus apps
    'bloch',
    'analytic',
    'optimizer',
    'coding',
    'api',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'setup.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'setup.wsgi.application'


# Database
# Nenhum app usa o banco; o sqlite fica só para os checks do Django.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'pt-BR'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.AllowAny',
    ),
    'UNAUTHENTICATED_USER': None,
}


# ------------------------------------------------------------------------------
# rsp: padrões dos comandos (flag > arquivo --config > estes valores)
# ------------------------------------------------------------------------------
RSP = {
    "DEFAULT_SEED": config("RSP_DEFAULT_SEED", default=20010601, cast=int),
    "WORKERS": config("RSP_WORKERS", default=1, cast=int),
    "CURVE_POINTS": config("RSP_CURVE_POINTS", default=200, cast=int),
    "LAMBDA_MIN": config("RSP_LAMBDA_MIN", default=1e-4, cast=float),
    "LAMBDA_MAX": config("RSP_LAMBDA_MAX", default=50.0, cast=float),
    "CAPS_OPTIMIZE": config("RSP_CAPS_OPTIMIZE", default=500, cast=int),
    "CAPS_SIMULATE": config("RSP_CAPS_SIMULATE", default=48, cast=int),
    "TOL": config("RSP_TOL", default=1e-9, cast=float),
    "MAX_ITERS": config("RSP_MAX_ITERS", default=20_000, cast=int),
    "RESTARTS": config("RSP_RESTARTS", default=3, cast=int),
    "DELTA": config("RSP_DELTA", default=0.1, cast=float),
    "LO_SAMPLES": config("RSP_LO_SAMPLES", default=1_000_000, cast=int),
    "SIM_SAMPLES": config("RSP_SIM_SAMPLES", default=100_000, cast=int),
    "SIM_LAMBDA": config("RSP_SIM_LAMBDA", default=2.0, cast=float),
    "SIM_N": config("RSP_SIM_N", default=8, cast=int),
    "SIM_RATE_MARGIN": config("RSP_SIM_RATE_MARGIN", default=0.2, cast=float),
    "TYPICALITY": config("RSP_TYPICALITY", default="weak"),
}

RSP_LOG_LEVEL = config("RSP_LOG_LEVEL", default="INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "%(asctime)s %(levelname)s %(name)s %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": RSP_LOG_LEVEL,
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
