"""Exception hierarchy shared across the package."""


class SigcodeError(Exception):
    """Base class for all package errors."""


class MalformedInput(SigcodeError):
    """An input value violates a structural precondition."""


class ChainExhausted(SigcodeError):
    """The chain index would exceed the configured maximum length."""


class MalformedCode(SigcodeError):
    """A transcribed code is not structurally decodable."""


class ChecksumMismatch(MalformedCode):
    """Numeric code failed its check digit: probable transcription error."""


class UnrecoverableWord(MalformedCode):
    """A word token has no unique wordlist match within edit distance 2."""


class DuplicateRegistration(SigcodeError):
    """A voter with the same canonical registration fields already exists."""


class UnknownVoter(SigcodeError):
    """No voter record for the given voter id."""


class UnknownElection(SigcodeError):
    """The election id is not accepted by this registrar."""


class StoreCorrupt(SigcodeError):
    """Persisted store could not be parsed.

    Carries the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ConfigMismatch(SigcodeError):
    """Two scenario outcomes have incompatible dimensions."""
