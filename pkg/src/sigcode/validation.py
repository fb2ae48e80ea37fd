"""Envelope validation: classify transcribed codes against voter chains.

A matched code is consumed (the chain index moves past it), a stale code is
labeled EXPIRED or STALE_SECRET so the voter notification can say why, and
everything else is INVALID, MALFORMED or UNKNOWN_VOTER.
"""

from __future__ import annotations

import csv
import hmac
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, TextIO

from . import codegen
from .codegen import DecodedWords, FormatKind
from .errors import (
    ChecksumMismatch,
    MalformedCode,
    MalformedInput,
    UnknownElection,
    UnknownVoter,
)
from .registrar import Registrar

DEFAULT_WINDOW = 3
DEFAULT_BACK_SCAN = 8

CSV_HEADER = ["envelope_id", "voter_id", "election_id", "code_text", "received_at"]


class Disposition(Enum):
    VALID = "VALID"
    EXPIRED = "EXPIRED"
    STALE_SECRET = "STALE_SECRET"
    INVALID = "INVALID"
    MALFORMED = "MALFORMED"
    UNKNOWN_VOTER = "UNKNOWN_VOTER"


@dataclass(frozen=True)
class EnvelopeRecord:
    envelope_id: str
    voter_id: str
    election_id: str
    code_text: str
    received_at: datetime


@dataclass(frozen=True)
class ValidationResult:
    envelope_id: str
    voter_id: str
    status: Disposition
    matched_index: int | None = None
    corrections: int = 0
    reason: str = ""


@dataclass
class BatchReport:
    results: list[ValidationResult] = field(default_factory=list)
    counts: dict[str, int] = field(
        default_factory=lambda: {d.value: 0 for d in Disposition}
    )

    def add(self, result: ValidationResult) -> None:
        self.results.append(result)
        self.counts[result.status.value] += 1

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def all_valid(self) -> bool:
        return self.total == self.counts[Disposition.VALID.value]


def _detect_format_kind(code_text: str) -> FormatKind:
    stripped = code_text.strip()
    if not stripped:
        raise MalformedCode("empty code")
    if all(c.isdigit() or c in "- " for c in stripped):
        return FormatKind.NUMERIC
    if all(c.isalpha() or c.isspace() for c in stripped):
        return FormatKind.WORDS
    raise MalformedCode("code mixes digits and letters; cannot detect format")


@dataclass(frozen=True)
class _Decoded:
    kind: FormatKind
    payload: bytes  # canonical bytes used for constant-time comparison
    length: int  # digit count or word count
    corrections: int


def _decode(code_text: str, registrar: Registrar) -> _Decoded:
    kind = _detect_format_kind(code_text)
    if kind is FormatKind.NUMERIC:
        payload = codegen.decode_numeric(code_text)
        return _Decoded(
            kind=kind,
            payload=payload.encode("ascii"),
            length=len(payload) + 1,
            corrections=0,
        )
    decoded = codegen.decode_words(code_text, registrar.wordlist)
    return _Decoded(
        kind=kind,
        payload=decoded.payload,
        length=len(decoded.indices),
        corrections=decoded.corrections,
    )


def _expected_payload(decoded: _Decoded, value: codegen.ChainValue) -> bytes:
    if decoded.kind is FormatKind.NUMERIC:
        return codegen.numeric_payload(value, decoded.length).encode("ascii")
    return DecodedWords(
        indices=tuple(codegen._word_indices(value, decoded.length)), corrections=0
    ).payload


def _scan(
    decoded: _Decoded,
    secret: codegen.SharedSecret,
    election_id: str,
    indices: Iterable[int],
    max_chain_length: int,
) -> int | None:
    """Smallest index in `indices` whose rendering matches the decoded payload."""
    for j in indices:
        if j < 0 or j >= max_chain_length:
            continue
        value = codegen.chain_value(secret, election_id, j, max_chain_length)
        if hmac.compare_digest(decoded.payload, _expected_payload(decoded, value)):
            return j
    return None


def validate_envelope(
    registrar: Registrar,
    envelope: EnvelopeRecord,
    window: int = DEFAULT_WINDOW,
    back_scan: int = DEFAULT_BACK_SCAN,
) -> ValidationResult:
    """Classify one envelope and apply its outcome to the registrar.

    Scan order: [current, current+window] for VALID (consumes the code),
    then [current-back_scan, current-1] for EXPIRED, then the prior
    secret's indices [0, back_scan] for STALE_SECRET. Exactly one audit
    event is appended regardless of outcome.
    """
    if window < 0 or back_scan < 0:
        raise MalformedInput("window and back_scan must be >= 0")

    def finish(result: ValidationResult) -> ValidationResult:
        registrar.record_validation(
            envelope.voter_id,
            envelope.election_id,
            envelope.envelope_id,
            result.status.value,
            result.matched_index,
        )
        return result

    try:
        record = registrar._require_voter(envelope.voter_id)
        registrar._require_election(envelope.election_id)
    except (UnknownVoter, UnknownElection) as e:
        return finish(
            ValidationResult(
                envelope_id=envelope.envelope_id,
                voter_id=envelope.voter_id,
                status=Disposition.UNKNOWN_VOTER,
                reason=str(e),
            )
        )

    try:
        decoded = _decode(envelope.code_text, registrar)
    except ChecksumMismatch as e:
        return finish(
            ValidationResult(
                envelope_id=envelope.envelope_id,
                voter_id=envelope.voter_id,
                status=Disposition.MALFORMED,
                reason=str(e),
            )
        )
    except MalformedCode as e:
        return finish(
            ValidationResult(
                envelope_id=envelope.envelope_id,
                voter_id=envelope.voter_id,
                status=Disposition.MALFORMED,
                reason=str(e),
            )
        )

    state = registrar.chain_state(envelope.voter_id, envelope.election_id)
    cur = state.current_index
    max_len = registrar.max_chain_length

    matched = _scan(
        decoded, record.secret, envelope.election_id,
        range(cur, cur + window + 1), max_len,
    )
    if matched is not None:
        return finish(
            ValidationResult(
                envelope_id=envelope.envelope_id,
                voter_id=envelope.voter_id,
                status=Disposition.VALID,
                matched_index=matched,
                corrections=decoded.corrections,
                reason=f"matched chain index {matched}",
            )
        )

    matched = _scan(
        decoded, record.secret, envelope.election_id,
        range(max(0, cur - back_scan), cur), max_len,
    )
    if matched is not None:
        return finish(
            ValidationResult(
                envelope_id=envelope.envelope_id,
                voter_id=envelope.voter_id,
                status=Disposition.EXPIRED,
                matched_index=matched,
                corrections=decoded.corrections,
                reason=(
                    f"code at index {matched} was superseded; "
                    f"chain is at index {cur}"
                ),
            )
        )

    if record.prior_secret is not None:
        matched = _scan(
            decoded, record.prior_secret, envelope.election_id,
            range(0, back_scan + 1), max_len,
        )
        if matched is not None:
            return finish(
                ValidationResult(
                    envelope_id=envelope.envelope_id,
                    voter_id=envelope.voter_id,
                    status=Disposition.STALE_SECRET,
                    matched_index=matched,
                    corrections=decoded.corrections,
                    reason="code was generated under a rotated (old) secret",
                )
            )

    return finish(
        ValidationResult(
            envelope_id=envelope.envelope_id,
            voter_id=envelope.voter_id,
            status=Disposition.INVALID,
            corrections=decoded.corrections,
            reason="well-formed code does not match any scanned chain index",
        )
    )


def validate_batch(
    registrar: Registrar,
    envelopes: Iterable[EnvelopeRecord],
    window: int = DEFAULT_WINDOW,
    back_scan: int = DEFAULT_BACK_SCAN,
) -> BatchReport:
    """Validate envelopes in received order (ties broken by envelope id).

    A repeated envelope_id is reported MALFORMED; it never reaches the chain.
    """
    ordered = sorted(envelopes, key=lambda e: (e.received_at, e.envelope_id))
    report = BatchReport()
    seen: set[str] = set()
    for envelope in ordered:
        if envelope.envelope_id in seen:
            report.add(
                ValidationResult(
                    envelope_id=envelope.envelope_id,
                    voter_id=envelope.voter_id,
                    status=Disposition.MALFORMED,
                    reason="duplicate envelope id",
                )
            )
            continue
        seen.add(envelope.envelope_id)
        report.add(validate_envelope(registrar, envelope, window, back_scan))
    return report


def notification_list(report: BatchReport) -> list[tuple[str, str, str]]:
    """(voter_id, status, reason) for every envelope that will not be counted."""
    out = []
    for r in report.results:
        if r.status is Disposition.VALID:
            continue
        out.append((r.voter_id, r.status.value, _notification_reason(r)))
    return out


def _notification_reason(result: ValidationResult) -> str:
    status = result.status
    if status is Disposition.EXPIRED:
        return (
            "Your ballot envelope carried a signature code that has since been "
            "replaced. If you did not request a new code, contact your clerk."
        )
    if status is Disposition.STALE_SECRET:
        return (
            "Your signature code was generated before your credentials were "
            "reissued. Please generate a fresh code and request a replacement ballot."
        )
    if status is Disposition.MALFORMED:
        return (
            "The signature code on your envelope could not be read "
            f"({result.reason}). This usually indicates a transcription error; "
            "please re-copy the code carefully."
        )
    if status is Disposition.UNKNOWN_VOTER:
        return "No registration record matches this envelope."
    return (
        "The signature code on your envelope does not match our records. "
        "Your ballot will not be counted."
    )


# -- batch file and report formats ---------------------------------------------


def read_envelope_csv(stream: TextIO) -> list[EnvelopeRecord]:
    """Parse the envelope batch CSV (RFC 4180, fixed header).

    Raises MalformedInput with a line number on any structural problem.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedInput("line 1: empty batch file") from None
    if header != CSV_HEADER:
        raise MalformedInput(
            f"line 1: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"
        )
    envelopes = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedInput(f"line {lineno}: expected {len(CSV_HEADER)} fields")
        envelope_id, voter_id, election_id, code_text, received_at = row
        try:
            ts = datetime.fromisoformat(received_at.replace("Z", "+00:00"))
        except ValueError:
            raise MalformedInput(
                f"line {lineno}: bad received_at timestamp {received_at!r}"
            ) from None
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        envelopes.append(
            EnvelopeRecord(
                envelope_id=envelope_id,
                voter_id=voter_id,
                election_id=election_id,
                code_text=code_text,
                received_at=ts,
            )
        )
    return envelopes


def write_envelope_csv(stream: TextIO, envelopes: Iterable[EnvelopeRecord]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for e in envelopes:
        writer.writerow(
            [e.envelope_id, e.voter_id, e.election_id, e.code_text,
             e.received_at.astimezone(timezone.utc).isoformat()]
        )


def render_report(report: BatchReport) -> str:
    """Stable plain-text report: one tab-separated record per envelope plus summary.

    The byte output is identical for identical inputs; the CLI and the HTTP
    service both emit exactly this.
    """
    lines = ["sigcode-report v1"]
    lines.append("envelope_id\tstatus\tmatched_index\tcorrections\treason")
    for r in report.results:
        matched = "" if r.matched_index is None else str(r.matched_index)
        lines.append(
            f"{r.envelope_id}\t{r.status.value}\t{matched}\t{r.corrections}\t{r.reason}"
        )
    lines.append("")
    lines.append("summary")
    for d in Disposition:
        lines.append(f"{d.value}\t{report.counts[d.value]}")
    lines.append(f"total\t{report.total}")
    return "\n".join(lines) + "\n"
