from django.apps import AppConfig


class DegenerationConfig(AppConfig):
    name = "degeneration"
