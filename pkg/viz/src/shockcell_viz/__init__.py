"""Post-processing and figure rendering for shockcell run outputs."""

__version__ = "1.0.0"
