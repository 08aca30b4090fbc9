"""tactisim: haptic force estimation and delay-bound-relaxed network simulation.

Subpackages and modules:

- ``traces``: load, synthesize, trim, and window haptic force/command traces
- ``deadband``: Weber-law perceptual deadband encoder/decoder
- ``estimator``: numpy inference engine for the dual-branch force estimator
- ``queueing``: closed-form delay-violation model and batch planning
- ``netsim``: deterministic RB-pool downlink simulator and capacity search
- ``cli``: experiment runner writing reproducible CSVs
"""

from . import deadband, errors, estimator, netsim, queueing, traces

__version__ = "0.1.0"

__all__ = ["deadband", "errors", "estimator", "netsim", "queueing", "traces",
           "__version__"]
