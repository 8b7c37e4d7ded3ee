import shlex
import subprocess
import sys

from django.core.management.base import BaseCommand
from django.utils import autoreload

CELERY_WORKER_CMD = "celery -A schottkydim worker -l info"


def restart_celery():
    cmd = f'pkill -f "{CELERY_WORKER_CMD}"'
    if sys.platform == "win32":
        cmd = "taskkill /f /t /im celery.exe"

    subprocess.call(shlex.split(cmd))
    subprocess.call(shlex.split(CELERY_WORKER_CMD))


class Command(BaseCommand):
    help = "Starts a celery worker for sweep tasks, restarting it on code changes"

    def handle(self, *args, **options):
        self.stdout.write("Starting celery worker with autoreload...")
        autoreload.run_with_reloader(restart_celery)
