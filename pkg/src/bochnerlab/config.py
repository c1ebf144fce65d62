"""Process-wide resource limits.

The defaults bound memory (dyadic resolution) and runtime (sign-pattern
enumeration, exhaustive subset search). The CLI overrides them from flags.
"""

DEFAULT_MAX_LEVEL = 20
DEFAULT_BLOCK_CAP = 20
DEFAULT_MAX_SUBSETS = 1 << 16

_limits = {
    "max_level": DEFAULT_MAX_LEVEL,
    "block_cap": DEFAULT_BLOCK_CAP,
    "max_subsets": DEFAULT_MAX_SUBSETS,
}


class ResolutionError(ValueError):
    """A dyadic level exceeds the configured maximum resolution."""


def max_level():
    return _limits["max_level"]


def block_cap():
    return _limits["block_cap"]


def max_subsets():
    return _limits["max_subsets"]


def configure(*, max_level=None, block_cap=None, max_subsets=None):
    """Override limits; ``None`` leaves a limit unchanged.

    Returns the previous settings so callers can restore them.
    """
    previous = dict(_limits)
    if max_level is not None:
        if max_level < 0:
            raise ValueError("max_level must be non-negative")
        _limits["max_level"] = int(max_level)
    if block_cap is not None:
        if block_cap < 1:
            raise ValueError("block_cap must be positive")
        _limits["block_cap"] = int(block_cap)
    if max_subsets is not None:
        _limits["max_subsets"] = int(max_subsets)
    return previous


def check_level(level):
    if level < 0:
        raise ValueError(f"negative dyadic level {level}")
    if level > _limits["max_level"]:
        raise ResolutionError(
            f"dyadic level {level} exceeds max level {_limits['max_level']}")
    return level
