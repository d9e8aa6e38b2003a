"""Figure rendering for the wireless-optimization and federated-learning
result CSVs. Pure reader: consumes the CSV files, never the library that
produced them."""

from .figures import FigureSpec, load_csv, plot_fl, plot_traces

__version__ = "0.1.0"
