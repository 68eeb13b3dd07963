"""
Error types for the Bananaworld Correlation Analyzer
Every domain failure raised by the library derives from BananaworldError
"""

from typing import List, Optional


class BananaworldError(Exception):
    """Base class for all domain errors"""

    def to_dict(self) -> dict:
        """Structured form used by the command line reports"""
        return {"type": type(self).__name__, "message": str(self)}


class InvalidArrayError(BananaworldError):
    """Correlation array failed validation"""

    def __init__(self, message: str, violations: Optional[List] = None):
        super().__init__(message)
        self.violations = list(violations or [])

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload["violations"] = [v.describe() for v in self.violations]
        return payload


class RepresentationError(BananaworldError):
    """Rational and float scalars mixed where one representation is required"""


class InvalidModelError(BananaworldError):
    """LHV model weights or support are not a valid distribution"""


class QuantumStateError(BananaworldError):
    """State vector, measurement or basis request is malformed"""


class InedibleBunchError(BananaworldError):
    """Klyachko bunch peeled on a non-adjacent pair"""


class BunchStateError(BananaworldError):
    """Klyachko bunch has already been peeled"""


class SamplingError(BananaworldError):
    """Sampler parameters are out of range"""


class SerializationError(BananaworldError):
    """JSON or CSV payload cannot be decoded"""


class ConfigError(BananaworldError):
    """Configuration file is unreadable or holds bad values"""


class VerificationError(BananaworldError):
    """A computed decomposition or certificate failed its own check"""
