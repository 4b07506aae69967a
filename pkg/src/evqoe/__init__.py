"""EV charging QoE analytics: session ingest, per-site metrics, M/G/k
waiting-time simulation, demand gap reconstruction, and fractional-order
seasonal demand forecasting."""

__version__ = "0.1.0"
