import logging
from concurrent.futures import ThreadPoolExecutor

from celery import group
from django.conf import settings

logger = logging.getLogger(__name__)


def _apply(signature):
    return signature.apply().get()


def run_tasks(signatures, threads=1):
    """Results of celery signatures, in input order.

    Eager configurations run the tasks in-process on `threads` threads;
    otherwise they go to the broker as one group."""
    signatures = list(signatures)
    if not signatures:
        return []
    if not settings.CELERY_TASK_ALWAYS_EAGER:
        logger.info(f"dispatching {len(signatures)} tasks to the broker")
        return group(signatures).apply_async().get()
    if threads <= 1:
        return [_apply(signature) for signature in signatures]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_apply, signatures))
