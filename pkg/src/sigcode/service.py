"""HTTP API over the registrar and validator.

Sessions are dev-grade bearer tokens: one configurable official token, and
a per-voter token issued once at registration. Secret bytes appear only in
the register and rotate responses and are never retrievable afterwards.
"""

from __future__ import annotations

import io
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from pydantic import BaseModel

from . import codegen, validation
from .errors import (
    ChainExhausted,
    DuplicateRegistration,
    MalformedInput,
    UnknownElection,
    UnknownVoter,
)
from .registrar import Actor, Registrar, RegistrationFields

DEFAULT_CODE_READS_PER_MINUTE = 10
OFFICIAL_TOKEN_ENV = "SIGCODE_OFFICIAL_TOKEN"


class TokenBucket:
    """Per-key token bucket; clock injectable so tests are deterministic."""

    def __init__(self, rate_per_minute: float, clock: Callable[[], float] = time.monotonic):
        self.capacity = float(rate_per_minute)
        self.refill_per_sec = rate_per_minute / 60.0
        self.clock = clock
        self._state: dict[str, tuple[float, float]] = {}  # key -> (tokens, stamp)
        self._lock = threading.Lock()

    def allow(self, key: str) -> bool:
        with self._lock:
            now = self.clock()
            tokens, stamp = self._state.get(key, (self.capacity, now))
            tokens = min(self.capacity, tokens + (now - stamp) * self.refill_per_sec)
            if tokens < 1.0:
                self._state[key] = (tokens, now)
                return False
            self._state[key] = (tokens - 1.0, now)
            return True


@dataclass
class Principal:
    kind: str  # "official" or "voter"
    voter_id: str | None = None


class RegisterRequest(BaseModel):
    name: str
    address: str
    dob: str


class SingleCheckRequest(BaseModel):
    voter_id: str
    election_id: str
    code_text: str


@dataclass
class ServiceState:
    registrar: Registrar
    official_token: str
    voter_tokens: dict[str, str] = field(default_factory=dict)  # token -> voter_id
    window: int = validation.DEFAULT_WINDOW
    back_scan: int = validation.DEFAULT_BACK_SCAN
    store_path: Path | None = None
    batches: dict[str, str] = field(default_factory=dict)  # batch_id -> report text
    _next_batch: int = 1
    _next_envelope: int = 1

    def issue_voter_token(self, voter_id: str) -> str:
        token = f"voter-{voter_id}-{secrets.token_hex(8)}"
        self.voter_tokens[token] = voter_id
        return token

    def persist(self) -> None:
        if self.store_path is not None:
            self.registrar.save(self.store_path)


def create_app(
    registrar: Registrar,
    official_token: str | None = None,
    window: int = validation.DEFAULT_WINDOW,
    back_scan: int = validation.DEFAULT_BACK_SCAN,
    code_reads_per_minute: float = DEFAULT_CODE_READS_PER_MINUTE,
    rate_clock: Callable[[], float] = time.monotonic,
    store_path: str | Path | None = None,
) -> FastAPI:
    """Build the API app around an existing registrar."""
    token = official_token or os.environ.get(OFFICIAL_TOKEN_ENV)
    if not token:
        raise MalformedInput(
            f"official token required (argument or {OFFICIAL_TOKEN_ENV})"
        )
    state = ServiceState(
        registrar=registrar,
        official_token=token,
        window=window,
        back_scan=back_scan,
        store_path=Path(store_path) if store_path else None,
    )
    limiter = TokenBucket(code_reads_per_minute, clock=rate_clock)
    app = FastAPI(title="sigcode registrar service")
    app.state.service = state

    def principal(request: Request) -> Principal:
        auth = request.headers.get("Authorization", "")
        if not auth.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        tok = auth[len("Bearer ") :].strip()
        if secrets.compare_digest(tok, state.official_token):
            return Principal(kind="official")
        voter_id = state.voter_tokens.get(tok)
        if voter_id is not None:
            return Principal(kind="voter", voter_id=voter_id)
        raise HTTPException(status_code=401, detail="unrecognized token")

    def require_official(p: Principal) -> None:
        if p.kind != "official":
            raise HTTPException(status_code=401, detail="official session required")

    def require_voter_self(p: Principal, voter_id: str) -> None:
        if p.kind == "voter" and p.voter_id == voter_id:
            return
        raise HTTPException(
            status_code=401, detail="voter session for this voter required"
        )

    def renderings(voter_id: str, election_id: str) -> dict:
        value = state.registrar.current_chain_value(voter_id, election_id)
        return {
            "voter_id": voter_id,
            "election_id": election_id,
            "index": value.index,
            "numeric20": codegen.encode_numeric(value, 20).text,
            "words6": codegen.encode_words(value, 6, state.registrar.wordlist).text,
        }

    @app.post("/api/voters", status_code=201)
    def register(body: RegisterRequest, p: Principal = Depends(principal)):
        require_official(p)
        try:
            fields_ = RegistrationFields(name=body.name, address=body.address, dob=body.dob)
            record = state.registrar.register_voter(fields_, actor=Actor.OFFICIAL)
        except DuplicateRegistration as e:
            raise HTTPException(status_code=409, detail=str(e)) from None
        except MalformedInput as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        voter_token = state.issue_voter_token(record.voter_id)
        state.persist()
        # one-time disclosure: the secret is never serialized anywhere else
        return {
            "voter_id": record.voter_id,
            "secret": record.secret.value.hex(),
            "secret_version": record.secret.version,
            "voter_token": voter_token,
        }

    @app.get("/api/voters/{voter_id}")
    def get_voter(voter_id: str, p: Principal = Depends(principal)):
        if p.kind != "official":
            require_voter_self(p, voter_id)
        try:
            record = state.registrar._require_voter(voter_id)
        except UnknownVoter as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        return {
            "voter_id": record.voter_id,
            "name": record.fields.name,
            "status": record.status.value,
            "secret_version": record.secret.version,
            "elections": {
                eid: {"current_index": st.current_index}
                for eid, st in sorted(record.elections.items())
            },
        }

    @app.get("/api/voters/{voter_id}/elections/{election_id}/code")
    def current_code(
        voter_id: str, election_id: str, p: Principal = Depends(principal)
    ):
        require_voter_self(p, voter_id)
        if not limiter.allow(voter_id):
            raise HTTPException(status_code=429, detail="code read rate limit exceeded")
        try:
            return renderings(voter_id, election_id)
        except UnknownElection as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        except UnknownVoter as e:
            raise HTTPException(status_code=404, detail=str(e)) from None

    @app.post("/api/voters/{voter_id}/elections/{election_id}/advance")
    def advance(voter_id: str, election_id: str, p: Principal = Depends(principal)):
        require_voter_self(p, voter_id)
        try:
            state.registrar.advance_index(voter_id, election_id, actor=Actor.VOTER)
        except ChainExhausted as e:
            raise HTTPException(status_code=409, detail=str(e)) from None
        except UnknownElection as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        except UnknownVoter as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        state.persist()
        return renderings(voter_id, election_id)

    @app.post("/api/voters/{voter_id}/rotate")
    def rotate(voter_id: str, p: Principal = Depends(principal)):
        if p.kind != "official":
            require_voter_self(p, voter_id)
        actor = Actor.OFFICIAL if p.kind == "official" else Actor.VOTER
        try:
            secret = state.registrar.rotate_secret(voter_id, actor=actor)
        except UnknownVoter as e:
            raise HTTPException(status_code=404, detail=str(e)) from None
        state.persist()
        return {
            "voter_id": voter_id,
            "secret": secret.value.hex(),
            "secret_version": secret.version,
        }

    @app.post("/api/validate/envelope")
    def validate_single(body: SingleCheckRequest, p: Principal = Depends(principal)):
        require_official(p)
        envelope = validation.EnvelopeRecord(
            envelope_id=f"S{state._next_envelope:06d}",
            voter_id=body.voter_id,
            election_id=body.election_id,
            code_text=body.code_text,
            received_at=state.registrar.clock(),
        )
        state._next_envelope += 1
        result = validation.validate_envelope(
            state.registrar, envelope, state.window, state.back_scan
        )
        state.persist()
        return {
            "envelope_id": result.envelope_id,
            "status": result.status.value,
            "matched_index": result.matched_index,
            "corrections": result.corrections,
            "reason": result.reason,
        }

    @app.post("/api/validate/batch")
    async def validate_batch(request: Request, p: Principal = Depends(principal)):
        require_official(p)
        body = (await request.body()).decode("utf-8", errors="replace")
        try:
            envelopes = validation.read_envelope_csv(io.StringIO(body))
        except MalformedInput as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        report = validation.validate_batch(
            state.registrar, envelopes, state.window, state.back_scan
        )
        text = validation.render_report(report)
        batch_id = f"B{state._next_batch:06d}"
        state._next_batch += 1
        state.batches[batch_id] = text
        state.persist()
        return Response(
            content=text,
            media_type="text/plain; charset=utf-8",
            headers={"X-Batch-Id": batch_id},
        )

    @app.get("/api/batches/{batch_id}")
    def get_batch(batch_id: str, p: Principal = Depends(principal)):
        require_official(p)
        text = state.batches.get(batch_id)
        if text is None:
            raise HTTPException(status_code=404, detail="unknown batch id")
        return Response(content=text, media_type="text/plain; charset=utf-8")

    return app
