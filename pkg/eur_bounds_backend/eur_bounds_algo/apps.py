from django.apps import AppConfig


class EurBoundsAlgoConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "eur_bounds_algo"
    verbose_name = "Entropic uncertainty bounds"
