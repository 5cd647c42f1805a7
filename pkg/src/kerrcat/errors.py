"""Exception types shared across the package."""


class KerrcatError(Exception):
    """Base class for all package-specific errors."""


class TailMassExceeded(KerrcatError):
    """Fock cutoff too small for the requested coherent amplitude."""


class ParityMixing(KerrcatError):
    """Hamiltonian does not commute with photon-number parity."""


class StepFailure(KerrcatError):
    """Adaptive integrator failed to find an acceptable step."""


class NormDrift(KerrcatError):
    """State norm not preserved within the configured limit."""


class TraceDrift(KerrcatError):
    """Density-matrix trace not preserved within the configured limit."""


class LinearityViolation(KerrcatError):
    """Channel executor failed the linearity spot check."""


class SingularIdeal(KerrcatError):
    """Ideal transfer matrix is not invertible."""


class UnphysicalChannel(KerrcatError):
    """Chi matrix has a negative eigenvalue beyond the clip tolerance."""


class ValidityDomain(KerrcatError):
    """Parameters outside the validity domain of an analytic formula."""


class OddRowWeight(KerrcatError):
    """A parity check has odd weight on the data qubits."""


class DependentRows(KerrcatError):
    """Parity-check rows are linearly dependent over GF(2)."""


class TooLarge(KerrcatError):
    """Problem size exceeds the exhaustive-enumeration limit."""


class Infeasible(KerrcatError):
    """No code parameters under the caps meet the target."""


class NoThreshold(KerrcatError):
    """No threshold exists under the given caps."""


class OriginSingularity(KerrcatError):
    """Odd-parity Berry connection evaluated at its singular point."""


class UnknownScenario(KerrcatError):
    """Scenario id not present in the registry."""


class SchemaViolation(KerrcatError):
    """Scenario configuration failed schema validation."""
