"""Figure renderer for workload-characterization JSON outputs."""

from .render import CATEGORY_COLORS, PlotSpec, group_overlays, render_kiviat, render_lmae
from .schema import KiviatTable, LmaeProfile, SchemaError, load_kiviat, load_lmae_profiles

__version__ = "0.1.0"

__all__ = [
    "CATEGORY_COLORS",
    "KiviatTable",
    "LmaeProfile",
    "PlotSpec",
    "SchemaError",
    "group_overlays",
    "load_kiviat",
    "load_lmae_profiles",
    "render_kiviat",
    "render_lmae",
]
