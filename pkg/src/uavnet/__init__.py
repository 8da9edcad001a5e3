"""UAV traffic network: route graph, node de-confliction geometry, FCFS scheduling."""

__version__ = "0.1.0"
