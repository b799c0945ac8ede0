"""Linear-cluster state preparation, readout mitigation and GME certification."""

__version__ = "0.1.0"
