"""Default parameters and the enum helpers used by every configurable object."""

from enum import Enum

# Detection defaults. T is a fraction of max(width, height) of the layout.
DEFAULT_T_FRAC = 0.03
DEFAULT_K_MIN = 0.4
DEFAULT_EPSILON = 0.001

# Optimizer defaults
DEFAULT_DIMS = 1
DEFAULT_MAX_ITERS = 500
DEFAULT_REL_TOL = 1e-6
DEFAULT_SEED = 0

# Dense M x M matrices are refused above this many edges
MAX_DENSE_EDGES = 20_000

# SVG output
SVG_PRECISION = 3
SVG_PADDING = 0.05


class ConfigValueMixin:
    NO_VALUE = object()

    @classmethod
    def get(cls, item, default=NO_VALUE):
        """Look up a member by name, case insensitive. Dashes and underscores are interchangeable."""
        if isinstance(item, cls):
            return item
        valid_items = {enum.name.lower() for enum in cls}
        key = str(item).lower().replace("-", "_")
        if key not in valid_items and default is cls.NO_VALUE:
            raise KeyError(f"{item} is not a valid {cls.__name__}. Must be one of {sorted(valid_items)} (case insensitive)")
        elif key not in valid_items:
            return default

        return cls[key.upper()]

    @classmethod
    def choices(cls):
        return [enum.name.lower().replace("_", "-") for enum in cls]


class InitMode(ConfigValueMixin, Enum):
    ENDPOINT_PROJECTION = "endpoint-projection"
    SEEDED_RANDOM = "seeded-random"


class SampleMode(ConfigValueMixin, Enum):
    CONTROLS = "controls"
    MIDPOINTS = "midpoints"


class ColoringMethod(ConfigValueMixin, Enum):
    PEACOCK = "peacock"
    BASELINE = "baseline"


class FixtureStyle(ConfigValueMixin, Enum):
    ORDERED = "ordered"
    CROSSING = "crossing"
