from django.apps import AppConfig


class DimensionConfig(AppConfig):
    name = "dimension"
