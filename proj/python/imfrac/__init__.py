from ._imfrac import *  # noqa: F401,F403
