"""Multi-agent GA knapsack simulator for shared-resource depletion experiments."""

__version__ = "0.1.0"
