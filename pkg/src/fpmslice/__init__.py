"""Context slicing over an extended code property graph, for triaging static-analysis warnings."""

__version__ = "0.1.0"
