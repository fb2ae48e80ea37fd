"""Hash-chain signature codes for absentee ballot envelopes.

Subsystems:
    codegen    secret derivation, hash chains, numeric/word encodings
    registrar  voter records, secret rotation, chain positions, audit log
    validation envelope dispositions and batch reports
    simulator  seeded threat-model scenarios
    service    HTTP API (FastAPI)
    cli        operator command line
"""

from .codegen import (
    ChainValue,
    CodeFormat,
    FormatKind,
    MatchVerdict,
    NUMERIC_14,
    NUMERIC_20,
    RenderedCode,
    SharedSecret,
    WORDS_6,
    chain_value,
    decode_numeric,
    decode_words,
    derive_secret,
    encode_numeric,
    encode_words,
    match_code,
)
from .errors import (
    ChainExhausted,
    ChecksumMismatch,
    ConfigMismatch,
    DuplicateRegistration,
    MalformedCode,
    MalformedInput,
    SigcodeError,
    StoreCorrupt,
    UnknownElection,
    UnknownVoter,
    UnrecoverableWord,
)
from .registrar import Registrar, RegistrationFields, VoterRecord
from .validation import (
    BatchReport,
    Disposition,
    EnvelopeRecord,
    ValidationResult,
    validate_batch,
    validate_envelope,
)

__version__ = "0.1.0"
