"""Log verbosity level prediction with gated graph neural networks over program graphs."""
