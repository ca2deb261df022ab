"""matool: radial Monge-Ampere shooting, continuation and classification toolkit."""

__version__ = "0.1.0"
