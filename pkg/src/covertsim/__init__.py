"""covertsim: multi-warden covert communication simulator.

Library layers: numerics -> channel -> detection -> neuralnet ->
adversarial -> evaluation, with a batch CLI on top.
"""

__version__ = "0.1.0"
