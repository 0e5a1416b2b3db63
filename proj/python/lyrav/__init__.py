"""Cross-genre lyric authorship verification toolkit."""

from lyrav._lyrav import *  # noqa: F401,F403
from lyrav._lyrav import __doc__  # noqa: F401

__version__ = "0.1.0"
