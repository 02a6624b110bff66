"""Convergence studies, structural checks and the acceptance battery."""
from .harness import *  # noqa: F401,F403
from .harness import __all__ as _harness_all
from .suite import run_suite

__all__ = [*_harness_all, "run_suite"]
