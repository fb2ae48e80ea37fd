"""Authoritative voter store: secrets, per-election chain positions, audit log.

The audit log is the source of truth for every mutation; replaying it over
an empty store reproduces the final state (event timestamps double as the
created/advanced timestamps, so replay is exact).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from . import codegen
from .codegen import ChainValue, CodeFormat, RenderedCode, SharedSecret
from .errors import (
    ChainExhausted,
    DuplicateRegistration,
    MalformedInput,
    StoreCorrupt,
    UnknownElection,
    UnknownVoter,
)
from .wordlist import Wordlist, default_wordlist

STORE_FORMAT_VERSION = 1


class VoterStatus(Enum):
    ACTIVE = "ACTIVE"
    SUSPENDED = "SUSPENDED"


class Actor(Enum):
    VOTER = "VOTER"
    OFFICIAL = "OFFICIAL"
    SYSTEM = "SYSTEM"


class Action(Enum):
    REGISTER = "REGISTER"
    ROTATE = "ROTATE"
    ADVANCE = "ADVANCE"
    VALIDATE = "VALIDATE"


@dataclass(frozen=True)
class RegistrationFields:
    name: str
    address: str
    dob: str

    def __post_init__(self):
        for label, value in (("name", self.name), ("address", self.address), ("dob", self.dob)):
            if not value or not value.strip():
                raise MalformedInput(f"registration field {label!r} must be non-empty")

    def canonical_blob(self) -> bytes:
        """Canonical byte serialization used for secret derivation and dedup."""
        parts = [" ".join(v.strip().lower().split()) for v in (self.name, self.address, self.dob)]
        return "\x1f".join(parts).encode("utf-8")


@dataclass
class ChainState:
    current_index: int = 0
    last_validated_index: int | None = None
    advanced_at: datetime | None = None


@dataclass
class VoterRecord:
    voter_id: str
    fields: RegistrationFields
    secret: SharedSecret
    prior_secret: SharedSecret | None = None
    elections: dict[str, ChainState] = field(default_factory=dict)
    status: VoterStatus = VoterStatus.ACTIVE


@dataclass(frozen=True)
class AuditEvent:
    sequence: int
    timestamp: datetime
    actor: Actor
    action: Action
    voter_id: str
    detail: str  # compact JSON; carries enough to replay the mutation

    def to_line(self) -> str:
        return "\t".join(
            (
                str(self.sequence),
                self.timestamp.isoformat(),
                self.actor.value,
                self.action.value,
                self.voter_id,
                self.detail,
            )
        )

    @classmethod
    def from_line(cls, line: str) -> "AuditEvent":
        seq, ts, actor, action, voter_id, detail = line.split("\t", 5)
        return cls(
            sequence=int(seq),
            timestamp=datetime.fromisoformat(ts),
            actor=Actor(actor),
            action=Action(action),
            voter_id=voter_id,
            detail=detail,
        )


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Registrar:
    """Voter records plus append-only audit log.

    Mutations on one voter are serialized behind a lock; reads never
    mutate. `nonce_source` and `clock` are injectable for deterministic
    tests and simulations.
    """

    def __init__(
        self,
        nonce_source: Callable[[int], bytes] = os.urandom,
        clock: Callable[[], datetime] = _utcnow,
        max_chain_length: int = codegen.DEFAULT_MAX_CHAIN_LENGTH,
        elections: Iterable[str] | None = None,
        wordlist: Wordlist | None = None,
    ):
        self.nonce_source = nonce_source
        self.clock = clock
        self.max_chain_length = max_chain_length
        # None means any election id is accepted (chain starts lazily at 0)
        self.known_elections: set[str] | None = (
            set(elections) if elections is not None else None
        )
        self.wordlist = wordlist or default_wordlist()
        self.voters: dict[str, VoterRecord] = {}
        self.audit_log: list[AuditEvent] = []
        self._canonical: dict[bytes, str] = {}
        self._next_voter = 1
        self._next_seq = 1
        self._lock = threading.RLock()

    # -- audit ------------------------------------------------------------

    def _append_event(
        self, actor: Actor, action: Action, voter_id: str, detail: dict
    ) -> AuditEvent:
        event = AuditEvent(
            sequence=self._next_seq,
            timestamp=self.clock(),
            actor=actor,
            action=action,
            voter_id=voter_id,
            detail=json.dumps(detail, sort_keys=True, separators=(",", ":")),
        )
        self._next_seq += 1
        self.audit_log.append(event)
        return event

    # -- voter lifecycle ---------------------------------------------------

    def register_voter(
        self, fields: RegistrationFields, actor: Actor = Actor.OFFICIAL
    ) -> VoterRecord:
        """Create a voter with a fresh derived secret.

        Raises DuplicateRegistration when the canonical registration fields
        are already on file.
        """
        with self._lock:
            blob = fields.canonical_blob()
            if blob in self._canonical:
                raise DuplicateRegistration(
                    f"fields already registered as voter {self._canonical[blob]}"
                )
            nonce = self.nonce_source(32)
            voter_id = f"V{self._next_voter:06d}"
            self._next_voter += 1
            event = self._append_event(
                actor,
                Action.REGISTER,
                voter_id,
                {
                    "name": fields.name,
                    "address": fields.address,
                    "dob": fields.dob,
                    "nonce": nonce.hex(),
                },
            )
            secret = SharedSecret(
                value=codegen.derive_secret(blob, nonce).value,
                version=1,
                created_at=event.timestamp,
            )
            record = VoterRecord(voter_id=voter_id, fields=fields, secret=secret)
            self.voters[voter_id] = record
            self._canonical[blob] = voter_id
            return record

    def rotate_secret(self, voter_id: str, actor: Actor = Actor.VOTER) -> SharedSecret:
        """Issue a new secret; old one is retained for STALE_SECRET labeling.

        All chain positions reset to index 0.
        """
        with self._lock:
            record = self._require_voter(voter_id)
            nonce = self.nonce_source(32)
            event = self._append_event(
                actor, Action.ROTATE, voter_id, {"nonce": nonce.hex()}
            )
            new = SharedSecret(
                value=codegen.derive_secret(record.fields.canonical_blob(), nonce).value,
                version=record.secret.version + 1,
                created_at=event.timestamp,
            )
            record.prior_secret = record.secret
            record.secret = new
            record.elections = {}
            return new

    def advance_index(
        self, voter_id: str, election_id: str, actor: Actor = Actor.VOTER
    ) -> int:
        """Move the voter's chain forward one step, expiring the current code."""
        with self._lock:
            record = self._require_voter(voter_id)
            self._require_election(election_id)
            state = record.elections.setdefault(election_id, ChainState())
            if state.current_index + 1 >= self.max_chain_length:
                raise ChainExhausted(
                    f"chain for {voter_id}/{election_id} is exhausted at "
                    f"index {state.current_index}"
                )
            event = self._append_event(
                actor,
                Action.ADVANCE,
                voter_id,
                {"election_id": election_id, "new_index": state.current_index + 1},
            )
            state.current_index += 1
            state.advanced_at = event.timestamp
            return state.current_index

    # -- reads --------------------------------------------------------------

    def current_chain_value(self, voter_id: str, election_id: str) -> ChainValue:
        record = self._require_voter(voter_id)
        self._require_election(election_id)
        state = record.elections.get(election_id, ChainState())
        return codegen.chain_value(
            record.secret, election_id, state.current_index, self.max_chain_length
        )

    def current_code(
        self, voter_id: str, election_id: str, fmt: CodeFormat
    ) -> RenderedCode:
        """Render the voter's current code. Read-only: never moves the index."""
        return codegen.render(
            self.current_chain_value(voter_id, election_id), fmt, self.wordlist
        )

    def chain_state(self, voter_id: str, election_id: str) -> ChainState:
        record = self._require_voter(voter_id)
        return record.elections.get(election_id, ChainState())

    def _require_voter(self, voter_id: str) -> VoterRecord:
        record = self.voters.get(voter_id)
        if record is None:
            raise UnknownVoter(f"no voter {voter_id!r}")
        if record.status is not VoterStatus.ACTIVE:
            raise UnknownVoter(f"voter {voter_id!r} is {record.status.value}")
        return record

    def _require_election(self, election_id: str) -> None:
        if not election_id:
            raise UnknownElection("election id must be non-empty")
        if self.known_elections is not None and election_id not in self.known_elections:
            raise UnknownElection(f"unknown election {election_id!r}")

    # -- validation hook ------------------------------------------------------

    def record_validation(
        self,
        voter_id: str,
        election_id: str,
        envelope_id: str,
        status: str,
        matched_index: int | None,
    ) -> None:
        """Apply one envelope's outcome: consume the index on VALID, audit always."""
        with self._lock:
            self._append_event(
                Actor.SYSTEM,
                Action.VALIDATE,
                voter_id,
                {
                    "election_id": election_id,
                    "envelope_id": envelope_id,
                    "status": status,
                    "matched_index": matched_index,
                },
            )
            if status == "VALID":
                record = self.voters[voter_id]
                state = record.elections.setdefault(election_id, ChainState())
                state.last_validated_index = matched_index
                state.current_index = matched_index + 1

    # -- audit replay ----------------------------------------------------------

    @classmethod
    def replay(cls, events: Iterable[AuditEvent], **kwargs) -> "Registrar":
        """Rebuild a registrar from its audit log alone."""
        reg = cls(**kwargs)
        for event in events:
            detail = json.loads(event.detail)
            reg.clock, saved_clock = (lambda ts=event.timestamp: ts), reg.clock
            try:
                if event.action is Action.REGISTER:
                    fields = RegistrationFields(
                        detail["name"], detail["address"], detail["dob"]
                    )
                    reg.nonce_source, saved_nonce = (
                        lambda n, h=detail["nonce"]: bytes.fromhex(h)
                    ), reg.nonce_source
                    try:
                        reg.register_voter(fields)
                    finally:
                        reg.nonce_source = saved_nonce
                elif event.action is Action.ROTATE:
                    reg.nonce_source, saved_nonce = (
                        lambda n, h=detail["nonce"]: bytes.fromhex(h)
                    ), reg.nonce_source
                    try:
                        reg.rotate_secret(event.voter_id, actor=event.actor)
                    finally:
                        reg.nonce_source = saved_nonce
                elif event.action is Action.ADVANCE:
                    reg.advance_index(
                        event.voter_id, detail["election_id"], actor=event.actor
                    )
                elif event.action is Action.VALIDATE:
                    reg.record_validation(
                        event.voter_id,
                        detail["election_id"],
                        detail["envelope_id"],
                        detail["status"],
                        detail["matched_index"],
                    )
            finally:
                reg.clock = saved_clock
        return reg

    # -- persistence --------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write the full store: header, length-prefixed voter records, audit lines."""
        path = Path(path)
        lines = [
            f"sigcode-store v{STORE_FORMAT_VERSION} "
            f"wordlist_sha256={self.wordlist.checksum} "
            f"max_chain_length={self.max_chain_length}\n"
        ]
        body = "".join(lines).encode("utf-8")
        chunks = [body]
        for voter_id in sorted(self.voters):
            rec = json.dumps(
                self._voter_to_dict(self.voters[voter_id]),
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
            chunks.append(f"V {len(rec)}\n".encode("ascii"))
            chunks.append(rec)
            chunks.append(b"\n")
        chunks.append(b"AUDIT\n")
        for event in self.audit_log:
            chunks.append(event.to_line().encode("utf-8"))
            chunks.append(b"\n")
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(b"".join(chunks))
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path, **kwargs) -> "Registrar":
        data = Path(path).read_bytes()
        reg = cls(**kwargs)
        pos = 0

        def fail(msg: str):
            raise StoreCorrupt(msg, pos)

        nl = data.find(b"\n")
        if nl < 0:
            fail("missing header")
        header = data[:nl].decode("utf-8", errors="replace")
        if not header.startswith(f"sigcode-store v{STORE_FORMAT_VERSION} "):
            fail(f"unsupported store header: {header!r}")
        for part in header.split()[2:]:
            key, _, value = part.partition("=")
            if key == "max_chain_length":
                reg.max_chain_length = int(value)
            elif key == "wordlist_sha256" and value != reg.wordlist.checksum:
                fail("store was written with a different wordlist")
        pos = nl + 1
        while True:
            if data[pos : pos + 6] == b"AUDIT\n":
                pos += 6
                break
            if data[pos : pos + 2] != b"V ":
                fail("expected voter record or AUDIT marker")
            nl = data.find(b"\n", pos)
            if nl < 0:
                fail("truncated record length")
            try:
                rec_len = int(data[pos + 2 : nl])
            except ValueError:
                fail("bad record length")
            pos = nl + 1
            rec_bytes = data[pos : pos + rec_len]
            if len(rec_bytes) != rec_len or data[pos + rec_len : pos + rec_len + 1] != b"\n":
                fail("truncated voter record")
            try:
                record = cls._voter_from_dict(json.loads(rec_bytes))
            except (ValueError, KeyError, TypeError):
                fail("unparseable voter record")
            reg.voters[record.voter_id] = record
            reg._canonical[record.fields.canonical_blob()] = record.voter_id
            pos += rec_len + 1
        for raw in data[pos:].split(b"\n"):
            if not raw:
                pos += 1
                continue
            try:
                reg.audit_log.append(AuditEvent.from_line(raw.decode("utf-8")))
            except (ValueError, KeyError):
                fail("unparseable audit line")
            pos += len(raw) + 1
        if reg.voters:
            reg._next_voter = max(int(v[1:]) for v in reg.voters) + 1
        if reg.audit_log:
            reg._next_seq = reg.audit_log[-1].sequence + 1
        return reg

    @staticmethod
    def _voter_to_dict(record: VoterRecord) -> dict:
        def secret_to_dict(s: SharedSecret | None):
            if s is None:
                return None
            return {
                "value": s.value.hex(),
                "version": s.version,
                "created_at": s.created_at.isoformat(),
            }

        return {
            "voter_id": record.voter_id,
            "fields": {
                "name": record.fields.name,
                "address": record.fields.address,
                "dob": record.fields.dob,
            },
            "secret": secret_to_dict(record.secret),
            "prior_secret": secret_to_dict(record.prior_secret),
            "elections": {
                eid: {
                    "current_index": st.current_index,
                    "last_validated_index": st.last_validated_index,
                    "advanced_at": st.advanced_at.isoformat() if st.advanced_at else None,
                }
                for eid, st in sorted(record.elections.items())
            },
            "status": record.status.value,
        }

    @staticmethod
    def _voter_from_dict(d: dict) -> VoterRecord:
        def secret_from_dict(s):
            if s is None:
                return None
            return SharedSecret(
                value=bytes.fromhex(s["value"]),
                version=s["version"],
                created_at=datetime.fromisoformat(s["created_at"]),
            )

        return VoterRecord(
            voter_id=d["voter_id"],
            fields=RegistrationFields(**d["fields"]),
            secret=secret_from_dict(d["secret"]),
            prior_secret=secret_from_dict(d["prior_secret"]),
            elections={
                eid: ChainState(
                    current_index=st["current_index"],
                    last_validated_index=st["last_validated_index"],
                    advanced_at=(
                        datetime.fromisoformat(st["advanced_at"])
                        if st["advanced_at"]
                        else None
                    ),
                )
                for eid, st in d["elections"].items()
            },
            status=VoterStatus(d["status"]),
        )
