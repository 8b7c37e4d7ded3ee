import logging

from celery import shared_task

from dimension.continuity import continuity_point
from schottky.families import build_representation
from schottkydim.settings import TaskPriority
from trees.presets import tree_from_descriptor

from .pipeline import ell_search, headline_row

logger = logging.getLogger(__name__)


@shared_task(priority=TaskPriority.MED.value)
def headline_row_task(member, max_depth=None, tol=None):
    try:
        return headline_row(member, max_depth, tol)
    except Exception as e:
        logger.exception(f"headline_row_task failed with error: {e}")
        raise


@shared_task(priority=TaskPriority.LOW.value)
def ell_search_task(member, tree, options):
    """ell(theta) for one family member given by its descriptor."""
    try:
        rep = build_representation(member)
        return ell_search(tree_from_descriptor(tree), rep, **options)
    except Exception as e:
        logger.exception(f"ell_search_task failed with error: {e}")
        raise


@shared_task(priority=TaskPriority.HIGH.value)
def continuity_point_task(
    descriptor, eps, directions=None, mode="generators", max_depth=None, tol=None
):
    try:
        rep = build_representation(descriptor)
        return continuity_point(rep, eps, directions, mode, max_depth, tol)
    except Exception as e:
        logger.exception(f"continuity_point_task failed with error: {e}")
        raise
