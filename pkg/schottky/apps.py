from django.apps import AppConfig


class SchottkyConfig(AppConfig):
    name = "schottky"
