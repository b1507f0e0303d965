"""Classical values of stabilizer-testing nonlocal games."""

__version__ = "0.1.0"
