"""Random subgraphs of Kneser graphs: exact solvers, hitting times and structural checks."""
__version__ = "0.1.0"
