from django.apps import AppConfig


class HyperbolicConfig(AppConfig):
    name = "hyperbolic"
