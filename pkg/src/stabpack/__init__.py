"""stabpack: exact packing (maximum independent set) toolkit for axis-parallel
boxes and balls, with stabbing-number machinery, separator-based exact solvers,
grid permutation routing, and hardness-instance generators."""

__version__ = "0.1.0"
