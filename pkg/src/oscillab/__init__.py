"""oscillab: constructs oscillatory solutions of hyperbolic-parabolic systems,
extracts Young-measure statistics, and cross-checks effective kinetic models
against direct fine-scale simulation."""

__version__ = "0.1.0"
