"""Multi-chunk program repair engine.

Binds a bug's chunks into a buggy block, obtains candidate fixed blocks
from a pluggable generator, optimizes the patch space by filtering,
ranking, and capped best-first combination, and validates combined
patches against the subject project's build and test commands.
"""

__version__ = "0.1.0"
