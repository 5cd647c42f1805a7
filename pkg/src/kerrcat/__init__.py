"""Open-system simulation and fault-tolerance analysis for stabilized
Kerr-cat qubits: driven-oscillator gate simulations, channel tomography,
noise-bias metrics, concatenated-code analytics, and measurement-code
decoders."""

__version__ = "0.1.0"
