from django.apps import AppConfig


class PhaseplaneConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'phaseplane'
