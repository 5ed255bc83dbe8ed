from django.apps import AppConfig


class ShootingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'shooting'
