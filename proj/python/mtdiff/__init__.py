"""Clustered multitask diffusion LMS: simulator and mean-square performance models."""

import os
from pathlib import Path

_bundled = Path(__file__).with_name("data")
if "MTDIFF_DATA_DIR" not in os.environ and _bundled.is_dir():
    os.environ["MTDIFF_DATA_DIR"] = str(_bundled)

from ._core import *  # noqa: E402,F401,F403
from ._core import __doc__  # noqa: E402,F401

__version__ = "0.1.0"
