"""Figure rendering for oscillab CSV artifacts.

Consumes only the public CSV/JSON schemas of the oscillab CLI; no physics
is recomputed here.
"""

__version__ = "0.1.0"

from .render import FigureSpec, render  # noqa: F401
