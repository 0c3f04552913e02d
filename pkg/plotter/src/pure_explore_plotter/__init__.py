from .cli import PlotSpec, PlotterError, main, render

__version__ = "0.1.0"

__all__ = ["PlotSpec", "PlotterError", "main", "render", "__version__"]
