"""Circuit synthesis for quantum state preparation and diagonal unitaries."""

__version__ = "0.1.0"
