"""ICA decomposition of embeddings and higher-order correlation analysis."""
__version__ = "0.1.0"
