from django.apps import AppConfig


class CasimirConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.casimir"
