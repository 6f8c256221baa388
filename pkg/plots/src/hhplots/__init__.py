from .render import PlotSpec, render_threshold, save

__all__ = ["PlotSpec", "render_threshold", "save"]
