"""
Package for the measurement methodology

Long traces are not simulated as a whole. Batches of consecutive packets are sampled at a fixed
stride and every batch starts from an empty, idle pipeline. Per-batch results are reduced with
percentiles, minima and maxima.

---

Contains the following modules:

- ``pipelock.experiment.batching`` - batch sampling, percentiles and the sampled trace cache
- ``pipelock.experiment.runner`` - locking experiments over the sampled batches
- ``pipelock.experiment.budget`` - the largest pipeline depth that sustains a throughput
- ``pipelock.experiment.silicon`` - memory and comparator cost of the locking architecture

---
"""
from __future__ import annotations

__all__ = [
    "batching",
    "budget",
    "runner",
    "silicon",
]
