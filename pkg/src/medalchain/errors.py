"""Domain error taxonomy.

Every error's class name doubles as its machine-readable code: the HTTP
gateway and the CLI report `exc.code` verbatim, so tests, the API, and the
console share one vocabulary.
"""


class MedalChainError(Exception):
    """Base class for all domain errors."""

    status = 400  # default HTTP status for the gateway mapping

    @property
    def code(self) -> str:
        return type(self).__name__


# --- canonical encoding ---------------------------------------------------

class UnsupportedValue(MedalChainError):
    """Value kind not allowed in hashed content (floats, None, ...)."""


class NonCanonical(MedalChainError):
    """Bytes are not a canonical encoding (bad JSON, reordered keys, ...)."""


# --- ledger ----------------------------------------------------------------

class IndexOutOfRange(MedalChainError):
    pass


class NonceExhausted(MedalChainError):
    pass


class DifficultyOutOfRange(MedalChainError):
    pass


class EmptyBlock(MedalChainError):
    pass


# --- registry ---------------------------------------------------------------

class SchemaViolation(MedalChainError):
    pass


class UnknownIssuer(MedalChainError):
    status = 404


class UnknownDefinition(MedalChainError):
    status = 404


class UnknownToken(MedalChainError):
    status = 404


class DuplicateAward(MedalChainError):
    status = 409


class BadGrade(MedalChainError):
    pass


class IssuerMismatch(MedalChainError):
    pass


class Unauthorized(MedalChainError):
    status = 401


class IllegalTransition(MedalChainError):
    status = 409


# --- contract engine ---------------------------------------------------------

class UnknownContract(MedalChainError):
    status = 404


class InactiveContract(MedalChainError):
    pass


class NotEligible(MedalChainError):
    pass


class VoteNotPassing(MedalChainError):
    pass


class VoteSubjectMismatch(MedalChainError):
    pass


class StaleVersion(MedalChainError):
    status = 409


# --- blind voting -------------------------------------------------------------

class KeyTooSmall(MedalChainError):
    pass


class BadBlindingFactor(MedalChainError):
    pass


class MessageOutOfRange(MedalChainError):
    pass


class AlreadyIssued(MedalChainError):
    status = 409


class InvalidSignature(MedalChainError):
    pass


class DuplicateSerial(MedalChainError):
    status = 409


class UnknownOption(MedalChainError):
    pass


class RoundClosed(MedalChainError):
    status = 409


class UnknownRound(MedalChainError):
    status = 404


# --- certification flow --------------------------------------------------------

class UnknownApplication(MedalChainError):
    status = 404


class ForeignDefinition(MedalChainError):
    pass


class DanglingSample(MedalChainError):
    pass


class IncompleteReview(MedalChainError):
    pass


class NotApproved(MedalChainError):
    status = 409


# --- network simulation ----------------------------------------------------------

class UnknownNode(MedalChainError):
    status = 404


class NoValidCandidate(MedalChainError):
    pass


class BadPartition(MedalChainError):
    pass


# --- gateway / storage -------------------------------------------------------------

class CorruptLog(MedalChainError):
    def __init__(self, message: str = "", offset: int = -1):
        super().__init__(message)
        self.offset = offset


class IncompatibleVersion(MedalChainError):
    pass


class UnknownActor(MedalChainError):
    status = 401
