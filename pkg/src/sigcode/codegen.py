"""Deterministic code generation core.

Secrets are derived from registration data plus a nonce; per-election hash
chains are seeded from the secret; chain values render as check-digited
numeric strings or short word sentences that survive single transcription
errors.

Domain separation prefixes (one byte, prepended to every hash input):
    0x00  secret derivation
    0x01  chain seed (secret + election id)
    0x02  chain step
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import ChainExhausted, MalformedCode, MalformedInput, ChecksumMismatch
from .wordlist import BITS_PER_WORD, Wordlist, default_wordlist

SECRET_LEN = 32
DEFAULT_MAX_CHAIN_LENGTH = 1024

_PREFIX_SECRET = b"\x00"
_PREFIX_SEED = b"\x01"
_PREFIX_STEP = b"\x02"

NUMERIC_LENGTHS = (14, 20)
WORD_COUNTS = (4, 5, 6)

# Damm quasigroup of order 10 (weak totally anti-symmetric, zero diagonal).
# A check digit from this table detects every single-digit substitution and
# every adjacent transposition.
DAMM_TABLE = (
    (0, 3, 1, 7, 5, 9, 8, 6, 4, 2),
    (7, 0, 9, 2, 1, 5, 4, 8, 6, 3),
    (4, 2, 0, 6, 8, 7, 1, 3, 5, 9),
    (1, 7, 5, 0, 9, 8, 3, 4, 2, 6),
    (6, 1, 2, 3, 0, 4, 5, 9, 7, 8),
    (3, 6, 7, 4, 2, 0, 9, 5, 8, 1),
    (5, 8, 6, 9, 7, 2, 0, 1, 3, 4),
    (8, 9, 4, 5, 3, 6, 2, 0, 1, 7),
    (9, 4, 3, 8, 6, 1, 7, 2, 0, 5),
    (2, 5, 8, 1, 4, 3, 6, 7, 9, 0),
)


@dataclass(frozen=True)
class SharedSecret:
    """32-byte voter/registrar shared key with a rotation version."""

    value: bytes
    version: int = 1
    created_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )

    def __post_init__(self):
        if len(self.value) != SECRET_LEN:
            raise MalformedInput(
                f"secret must be {SECRET_LEN} bytes, got {len(self.value)}"
            )
        if self.version < 1:
            raise MalformedInput("secret version must be >= 1")


@dataclass(frozen=True)
class ChainValue:
    """The 256-bit chain element at (election_id, index)."""

    value: bytes
    index: int
    election_id: str


class FormatKind(Enum):
    NUMERIC = "NUMERIC"
    WORDS = "WORDS"


@dataclass(frozen=True)
class CodeFormat:
    """Rendering format: NUMERIC with 14 or 20 digits, or WORDS with 4-6 words."""

    kind: FormatKind
    length: int

    def __post_init__(self):
        if self.kind is FormatKind.NUMERIC and self.length not in NUMERIC_LENGTHS:
            raise MalformedInput(
                f"numeric length must be one of {NUMERIC_LENGTHS}, got {self.length}"
            )
        if self.kind is FormatKind.WORDS and self.length not in WORD_COUNTS:
            raise MalformedInput(
                f"word count must be one of {WORD_COUNTS}, got {self.length}"
            )

    @classmethod
    def parse(cls, text: str) -> "CodeFormat":
        """Parse forms like "NUMERIC-20" or "WORDS-6" (case-insensitive)."""
        try:
            kind_s, _, length_s = text.strip().upper().partition("-")
            return cls(FormatKind(kind_s), int(length_s))
        except (ValueError, KeyError) as e:
            raise MalformedInput(f"unparseable code format {text!r}") from e

    def __str__(self) -> str:
        return f"{self.kind.value}-{self.length}"


NUMERIC_14 = CodeFormat(FormatKind.NUMERIC, 14)
NUMERIC_20 = CodeFormat(FormatKind.NUMERIC, 20)
WORDS_6 = CodeFormat(FormatKind.WORDS, 6)


@dataclass(frozen=True)
class RenderedCode:
    """A chain value rendered for human transcription."""

    text: str
    format: CodeFormat
    election_id: str
    index: int


class MatchVerdict(Enum):
    MATCH = "MATCH"
    MISMATCH = "MISMATCH"
    TRANSCRIPTION_ERROR = "TRANSCRIPTION_ERROR"


def derive_secret(registration_blob: bytes, nonce: bytes) -> SharedSecret:
    """Derive a version-1 shared secret from registration data and a nonce.

    The nonce must come from a cryptographically secure source; only its
    presence is checked here.
    """
    if not registration_blob:
        raise MalformedInput("registration blob must be non-empty")
    if not nonce:
        raise MalformedInput("nonce must be non-empty")
    digest = hashlib.sha256(_PREFIX_SECRET + registration_blob + nonce).digest()
    return SharedSecret(value=digest, version=1)


def chain_value(
    secret: SharedSecret,
    election_id: str,
    index: int,
    max_chain_length: int = DEFAULT_MAX_CHAIN_LENGTH,
) -> ChainValue:
    """Chain element at `index` for this secret and election.

    Element 0 hashes the secret together with the election id; element i+1
    hashes element i. Valid indices are 0 .. max_chain_length - 1.
    """
    if not election_id:
        raise MalformedInput("election_id must be non-empty")
    if index < 0:
        raise MalformedInput("chain index must be >= 0")
    if index >= max_chain_length:
        raise ChainExhausted(
            f"index {index} exceeds max chain length {max_chain_length}"
        )
    v = hashlib.sha256(
        _PREFIX_SEED + secret.value + election_id.encode("utf-8")
    ).digest()
    for _ in range(index):
        v = hashlib.sha256(_PREFIX_STEP + v).digest()
    return ChainValue(value=v, index=index, election_id=election_id)


def damm_check_digit(digits: str) -> int:
    """Damm check digit over a decimal digit string."""
    interim = 0
    for ch in digits:
        interim = DAMM_TABLE[interim][int(ch)]
    return interim


def damm_verify(digits: str) -> bool:
    """True when the trailing digit is a valid Damm check digit."""
    return damm_check_digit(digits) == 0


def _group4(digits: str) -> str:
    return "-".join(digits[i : i + 4] for i in range(0, len(digits), 4))


def encode_numeric(value: ChainValue, length: int) -> RenderedCode:
    """Render a chain value as `length` decimal digits with a check digit.

    The payload is the big-endian integer value of the hash reduced modulo
    10^(length-1); the final digit is the Damm check digit; groups of four
    digits are hyphen-separated.
    """
    if length not in NUMERIC_LENGTHS:
        raise MalformedInput(f"numeric length must be one of {NUMERIC_LENGTHS}")
    payload = int.from_bytes(value.value, "big") % 10 ** (length - 1)
    digits = str(payload).zfill(length - 1)
    digits += str(damm_check_digit(digits))
    return RenderedCode(
        text=_group4(digits),
        format=CodeFormat(FormatKind.NUMERIC, length),
        election_id=value.election_id,
        index=value.index,
    )


def decode_numeric(text: str) -> str:
    """Recover the payload digits of a transcribed numeric code.

    Strips hyphens and whitespace, requires 14 or 20 digits total, and
    verifies the Damm check digit. Returns the payload (all digits except
    the check digit).
    """
    digits = text.replace("-", "")
    digits = "".join(digits.split())
    if not digits.isdigit() or not digits.isascii():
        raise MalformedCode(f"numeric code contains non-digit characters: {text!r}")
    if len(digits) not in NUMERIC_LENGTHS:
        raise MalformedCode(
            f"numeric code must have 14 or 20 digits, got {len(digits)}"
        )
    if not damm_verify(digits):
        raise ChecksumMismatch("check digit failed: probable transcription error")
    return digits[:-1]


def _word_indices(value: ChainValue, n_words: int) -> list[int]:
    bits = int.from_bytes(value.value, "big")
    total_bits = len(value.value) * 8
    out = []
    for k in range(n_words):
        shift = total_bits - BITS_PER_WORD * (k + 1)
        out.append((bits >> shift) & (2**BITS_PER_WORD - 1))
    return out


def encode_words(
    value: ChainValue, n_words: int, wordlist: Wordlist | None = None
) -> RenderedCode:
    """Render the leading 11*n_words bits of a chain value as a word sentence."""
    if n_words not in WORD_COUNTS:
        raise MalformedInput(f"word count must be one of {WORD_COUNTS}")
    wl = wordlist or default_wordlist()
    text = " ".join(wl[i] for i in _word_indices(value, n_words))
    return RenderedCode(
        text=text,
        format=CodeFormat(FormatKind.WORDS, n_words),
        election_id=value.election_id,
        index=value.index,
    )


@dataclass(frozen=True)
class DecodedWords:
    """Result of decoding a word sentence: 11-bit indices plus repair count."""

    indices: tuple[int, ...]
    corrections: int

    @property
    def payload(self) -> bytes:
        """Canonical byte string of the concatenated indices (for comparison)."""
        return b"".join(i.to_bytes(2, "big") for i in self.indices)


def decode_words(text: str, wordlist: Wordlist | None = None) -> DecodedWords:
    """Decode a transcribed word sentence, repairing single-word typos.

    Each token must match the wordlist exactly or have a unique nearest
    entry at Damerau-Levenshtein distance <= 2.
    """
    wl = wordlist or default_wordlist()
    tokens = text.lower().split()
    if len(tokens) not in WORD_COUNTS:
        raise MalformedCode(
            f"word code must have 4, 5 or 6 words, got {len(tokens)}"
        )
    indices = []
    corrections = 0
    for token in tokens:
        idx, fixed = wl.lookup(token)
        indices.append(idx)
        corrections += fixed
    return DecodedWords(indices=tuple(indices), corrections=corrections)


def render(
    value: ChainValue, fmt: CodeFormat, wordlist: Wordlist | None = None
) -> RenderedCode:
    """Render a chain value in the requested format."""
    if fmt.kind is FormatKind.NUMERIC:
        return encode_numeric(value, fmt.length)
    return encode_words(value, fmt.length, wordlist)


def numeric_payload(value: ChainValue, length: int) -> str:
    """Payload digits (no check digit, no hyphens) of the numeric rendering."""
    return encode_numeric(value, length).text.replace("-", "")[:-1]


def match_code(
    transcribed: str,
    expected: ChainValue,
    fmt: CodeFormat,
    wordlist: Wordlist | None = None,
) -> MatchVerdict:
    """Compare a transcribed code against the expected chain value.

    Decode failures (bad checksum, unrecoverable word, wrong shape) are
    TRANSCRIPTION_ERROR; payload comparison is constant-time.
    """
    try:
        if fmt.kind is FormatKind.NUMERIC:
            got = decode_numeric(transcribed).encode("ascii")
            want = numeric_payload(expected, fmt.length).encode("ascii")
        else:
            wl = wordlist or default_wordlist()
            got = decode_words(transcribed, wl).payload
            want = DecodedWords(
                indices=tuple(_word_indices(expected, fmt.length)), corrections=0
            ).payload
    except MalformedCode:
        return MatchVerdict.TRANSCRIPTION_ERROR
    if hmac.compare_digest(got, want):
        return MatchVerdict.MATCH
    return MatchVerdict.MISMATCH
