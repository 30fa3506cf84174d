"""Quasi-sets, clouds and non-Hausdorff q-topologies, plus a two-well
quantum simulator contrasting separated classical individuals with
indiscernible quantum systems."""

from .errors import DomainError, NumericError, ResourceError, SchemaError

__version__ = "0.1.0"

__all__ = ["DomainError", "NumericError", "ResourceError", "SchemaError", "__version__"]
