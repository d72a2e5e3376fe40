# Arithmetic Method Regression toolkit

__version__ = "1.0.0"
