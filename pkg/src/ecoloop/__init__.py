"""Energy-aware self-adaptive control loop for forecasting pipelines.

The package wraps a spectrum of time-series forecasters in a
monitor/analyze/plan/execute loop backed by a shared knowledge base:
per-interval metrics feed boundary checks (performance, energy, data
drift), a planner maps violations to switch/retrain/reuse actions, and
an executor enacts them while versioning retrained models together with
the distribution of the data they were trained on.
"""

__version__ = "0.1.0"
