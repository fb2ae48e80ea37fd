"""Record live service responses as JSON fixtures for the portal tests.

Runs the real HTTP app in-process and captures what the portal would see, so
the TypeScript contract tests replay genuine API bytes instead of hand-written
stubs. Regenerate with:

    python scripts/record_portal_fixtures.py
"""

import itertools
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from sigcode.registrar import Registrar
from sigcode.service import create_app

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
OFFICIAL_TOKEN = "fixture-official-token"
ELECTION = "GEN-2026"


def seeded_registrar(seed=0):
    base = datetime(2026, 1, 1, tzinfo=timezone.utc)
    counter = itertools.count()
    rng = random.Random(seed)
    return Registrar(
        nonce_source=lambda n: rng.randbytes(n),
        clock=lambda: base + timedelta(seconds=next(counter)),
    )


def record():
    client = TestClient(create_app(seeded_registrar(2026), official_token=OFFICIAL_TOKEN))
    official = {"Authorization": f"Bearer {OFFICIAL_TOKEN}"}

    voters = []
    for i in range(100):
        r = client.post(
            "/api/voters",
            json={"name": f"Voter {i}", "address": f"{i} Elm St", "dob": "1980-05-05"},
            headers=official,
        )
        r.raise_for_status()
        voters.append(r.json())

    def voter_headers(v):
        return {"Authorization": f"Bearer {v['voter_token']}"}

    # 20 voter-view code fixtures
    voter_codes = []
    for v in voters[:20]:
        r = client.get(
            f"/api/voters/{v['voter_id']}/elections/{ELECTION}/code",
            headers=voter_headers(v),
        )
        r.raise_for_status()
        voter_codes.append(
            {"voter_id": v["voter_id"], "token": v["voter_token"], "response": r.json()}
        )

    # advance round trip for one voter (index 0 -> 1)
    subject = voters[20]
    before = client.get(
        f"/api/voters/{subject['voter_id']}/elections/{ELECTION}/code",
        headers=voter_headers(subject),
    ).json()
    after = client.post(
        f"/api/voters/{subject['voter_id']}/elections/{ELECTION}/advance",
        headers=voter_headers(subject),
    ).json()
    advance = {"voter_id": subject["voter_id"], "token": subject["voter_token"],
               "before": before, "after": after}

    # single-envelope checks: one VALID, one EXPIRED (code read, then advanced)
    valid_voter = voters[21]
    valid_code = client.get(
        f"/api/voters/{valid_voter['voter_id']}/elections/{ELECTION}/code",
        headers=voter_headers(valid_voter),
    ).json()["numeric20"]
    valid_check = client.post(
        "/api/validate/envelope",
        json={"voter_id": valid_voter["voter_id"], "election_id": ELECTION,
              "code_text": valid_code},
        headers=official,
    ).json()

    stale_voter = voters[22]
    stale_code = client.get(
        f"/api/voters/{stale_voter['voter_id']}/elections/{ELECTION}/code",
        headers=voter_headers(stale_voter),
    ).json()["numeric20"]
    client.post(
        f"/api/voters/{stale_voter['voter_id']}/elections/{ELECTION}/advance",
        headers=voter_headers(stale_voter),
    ).raise_for_status()
    expired_check = client.post(
        "/api/validate/envelope",
        json={"voter_id": stale_voter["voter_id"], "election_id": ELECTION,
              "code_text": stale_code},
        headers=official,
    ).json()
    single_checks = {
        "valid": {"request": {"voter_id": valid_voter["voter_id"],
                              "election_id": ELECTION, "code_text": valid_code},
                  "response": valid_check},
        "expired": {"request": {"voter_id": stale_voter["voter_id"],
                                "election_id": ELECTION, "code_text": stale_code},
                    "response": expired_check},
    }

    # honest 100-row batch: untouched voters 23..99 plus fresh reads for the rest
    rows = ["envelope_id,voter_id,election_id,code_text,received_at"]
    batch_client = TestClient(
        create_app(seeded_registrar(2027), official_token=OFFICIAL_TOKEN)
    )
    batch_voters = []
    for i in range(100):
        r = batch_client.post(
            "/api/voters",
            json={"name": f"Batch voter {i}", "address": f"{i} Oak St", "dob": "1975-01-01"},
            headers=official,
        )
        r.raise_for_status()
        batch_voters.append(r.json())
    for i, v in enumerate(batch_voters):
        code = batch_client.get(
            f"/api/voters/{v['voter_id']}/elections/{ELECTION}/code",
            headers={"Authorization": f"Bearer {v['voter_token']}"},
        ).json()["numeric20"]
        rows.append(f"E{i:03d},{v['voter_id']},{ELECTION},{code},2026-06-01T00:{i // 60:02d}:{i % 60:02d}+00:00")
    csv_text = "\n".join(rows) + "\n"
    batch_response = batch_client.post(
        "/api/validate/batch", content=csv_text, headers=official
    )
    batch_response.raise_for_status()
    honest_batch = {
        "csv": csv_text,
        "report": batch_response.text,
        "batch_id": batch_response.headers["X-Batch-Id"],
    }

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "voter_codes.json").write_text(json.dumps(voter_codes, indent=2))
    (OUT_DIR / "advance.json").write_text(json.dumps(advance, indent=2))
    (OUT_DIR / "single_checks.json").write_text(json.dumps(single_checks, indent=2))
    (OUT_DIR / "honest_batch.json").write_text(json.dumps(honest_batch, indent=2))
    print(f"wrote fixtures to {OUT_DIR}")


if __name__ == "__main__":
    record()
