"""Self-tuning intrusion-detection pipeline for tabular flow data.

Offline model selection with swarm-searched hyperparameters, streaming
learners with drift adaptation, and an evasion attack/defense exercise.
"""

__version__ = "0.1.0"
