"""Figure-panel rendering for dimertrap CSV time series."""

from .panel import PanelError, PanelSpec, Series, render

__all__ = ["PanelError", "PanelSpec", "Series", "render"]
