"""Pytest wiring: same environment as `python manage.py test`."""
import os

import django
import dotenv

BASE_DIR = os.path.dirname(os.path.abspath(__file__))

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "schottkydim.settings")
for dotenv_file in [".env.test.user", ".env.test"]:
    if os.path.isfile(os.path.join(BASE_DIR, dotenv_file)):
        dotenv.load_dotenv(os.path.join(BASE_DIR, dotenv_file))
        break

django.setup()
