"""Circuit-model order finding read out only through weak measurements."""

__version__ = "0.1.0"
