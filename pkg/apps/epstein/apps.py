from django.apps import AppConfig


class EpsteinConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.epstein"
