from django.apps import AppConfig


class CutofflabConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.cutofflab"
    verbose_name = "Cutoff regularization lab"
