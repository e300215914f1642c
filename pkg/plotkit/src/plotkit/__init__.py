"""Figure rendering for risforge CSV outputs."""

from .figures import (
    FIGURE_KINDS,
    KAPPA_COLUMNS,
    SER_COLUMNS,
    FigureSpec,
    PlotkitError,
    SchemaError,
    load_kappa,
    load_ser,
    plot_kappa,
    plot_ser,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "KAPPA_COLUMNS",
    "SER_COLUMNS",
    "FigureSpec",
    "PlotkitError",
    "SchemaError",
    "load_kappa",
    "load_ser",
    "plot_kappa",
    "plot_ser",
    "render",
    "__version__",
]
