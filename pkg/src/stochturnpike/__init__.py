"""PCE transcription, solution and turnpike analysis of stochastic LQ OCPs."""
__version__ = "0.1.0"
