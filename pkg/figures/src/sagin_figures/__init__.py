from .plots import FIGURES, PlotSpec, SchemaError, load_rows, render, render_all

__version__ = "0.1.0"
