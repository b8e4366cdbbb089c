"""Circle-method computations for Goldbach's problem with summands in progressions."""

from .progression import ResidueClass
from .sieve import LambdaTable, build_lambda_table

__version__ = "0.1.0"

__all__ = ["LambdaTable", "ResidueClass", "build_lambda_table", "__version__"]
