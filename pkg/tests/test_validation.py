import io
import itertools
import random
from datetime import datetime, timedelta, timezone

import pytest

from sigcode import codegen
from sigcode.codegen import NUMERIC_20, WORDS_6, damm_check_digit
from sigcode.errors import MalformedInput
from sigcode.registrar import Registrar, RegistrationFields
from sigcode.validation import (
    Disposition,
    EnvelopeRecord,
    notification_list,
    read_envelope_csv,
    render_report,
    validate_batch,
    validate_envelope,
    write_envelope_csv,
)

T0 = datetime(2026, 6, 1, tzinfo=timezone.utc)


def fresh_registrar():
    base = datetime(2026, 1, 1, tzinfo=timezone.utc)
    counter = itertools.count()
    nonces = itertools.count()
    return Registrar(
        nonce_source=lambda n: next(nonces).to_bytes(n, "big"),
        clock=lambda: base + timedelta(seconds=next(counter)),
    )


def register(reg, i=0):
    return reg.register_voter(
        RegistrationFields(name=f"Voter {i}", address=f"{i} Elm St", dob="1980-05-05")
    )


def envelope(voter_id, code_text, envelope_id="E1", election="GEN-2026", offset=0):
    return EnvelopeRecord(
        envelope_id=envelope_id,
        voter_id=voter_id,
        election_id=election,
        code_text=code_text,
        received_at=T0 + timedelta(seconds=offset),
    )


class TestDispositions:
    def test_happy_path_consumes_index(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        result = validate_envelope(reg, envelope(v.voter_id, code), window=0)
        assert result.status is Disposition.VALID
        assert result.matched_index == 0
        assert reg.chain_state(v.voter_id, "GEN-2026").current_index == 1

    def test_advance_expires_old_code(self):
        reg = fresh_registrar()
        v = register(reg)
        coerced_code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        reg.advance_index(v.voter_id, "GEN-2026")
        result = validate_envelope(reg, envelope(v.voter_id, coerced_code))
        assert result.status is Disposition.EXPIRED
        assert result.matched_index == 0
        # a stale code never moves the live chain
        assert reg.chain_state(v.voter_id, "GEN-2026").current_index == 1

    def test_window_accepts_future_index(self):
        reg = fresh_registrar()
        v = register(reg)
        future = codegen.chain_value(v.secret, "GEN-2026", 2)
        code = codegen.encode_numeric(future, 20).text
        result = validate_envelope(reg, envelope(v.voter_id, code), window=3)
        assert result.status is Disposition.VALID
        assert result.matched_index == 2
        assert reg.chain_state(v.voter_id, "GEN-2026").current_index == 3

    def test_outside_window_is_invalid(self):
        reg = fresh_registrar()
        v = register(reg)
        future = codegen.chain_value(v.secret, "GEN-2026", 5)
        code = codegen.encode_numeric(future, 20).text
        result = validate_envelope(reg, envelope(v.voter_id, code), window=3)
        assert result.status is Disposition.INVALID

    def test_stale_secret_after_rotation(self):
        reg = fresh_registrar()
        v = register(reg)
        old_code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        reg.rotate_secret(v.voter_id)
        result = validate_envelope(reg, envelope(v.voter_id, old_code))
        assert result.status is Disposition.STALE_SECRET

    def test_random_wellformed_code_invalid(self):
        reg = fresh_registrar()
        v = register(reg)
        rnd = random.Random(1)
        for i in range(1000):
            payload = "".join(rnd.choice("0123456789") for _ in range(19))
            code = payload + str(damm_check_digit(payload))
            result = validate_envelope(
                reg, envelope(v.voter_id, code, envelope_id=f"R{i}")
            )
            assert result.status is Disposition.INVALID

    def test_unknown_voter(self):
        reg = fresh_registrar()
        result = validate_envelope(reg, envelope("V999999", "0000-0000-0000-00"))
        assert result.status is Disposition.UNKNOWN_VOTER

    def test_checksum_failure_is_malformed(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        bad = ("1" if code[0] != "1" else "2") + code[1:]
        result = validate_envelope(reg, envelope(v.voter_id, bad))
        assert result.status is Disposition.MALFORMED
        assert "transcription" in result.reason

    def test_mixed_characters_malformed(self):
        reg = fresh_registrar()
        v = register(reg)
        result = validate_envelope(reg, envelope(v.voter_id, "12ab-0000"))
        assert result.status is Disposition.MALFORMED

    def test_word_code_with_typo_valid_with_corrections(self):
        reg = fresh_registrar()
        v = register(reg)
        words = reg.current_code(v.voter_id, "GEN-2026", WORDS_6).text.split()
        # introduce a deletion typo in the first word
        words[0] = words[0][:-1] if len(words[0]) > 4 else words[0] + "x"
        result = validate_envelope(reg, envelope(v.voter_id, " ".join(words)))
        if result.status is Disposition.VALID:  # unique-nearest premise may fail
            assert result.corrections == 1

    def test_every_envelope_appends_one_audit_event(self):
        reg = fresh_registrar()
        v = register(reg)
        before = len(reg.audit_log)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        validate_envelope(reg, envelope(v.voter_id, code))
        validate_envelope(reg, envelope(v.voter_id, "garbage!!", envelope_id="E2"))
        assert len(reg.audit_log) == before + 2


class TestOneTimeUse:
    def test_replay_is_expired(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        first = validate_envelope(reg, envelope(v.voter_id, code, envelope_id="E1"))
        second = validate_envelope(reg, envelope(v.voter_id, code, envelope_id="E2"))
        assert first.status is Disposition.VALID
        assert second.status is Disposition.EXPIRED

    def test_no_two_valid_for_same_index(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        report = validate_batch(
            reg,
            [
                envelope(v.voter_id, code, envelope_id="A", offset=0),
                envelope(v.voter_id, code, envelope_id="B", offset=1),
            ],
        )
        statuses = sorted(r.status.value for r in report.results)
        assert statuses == ["EXPIRED", "VALID"]


class TestBatch:
    def test_empty_batch(self):
        reg = fresh_registrar()
        report = validate_batch(reg, [])
        assert report.total == 0
        assert all(c == 0 for c in report.counts.values())

    def test_order_by_received_at_then_id(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        later = envelope(v.voter_id, code, envelope_id="Z", offset=5)
        earlier = envelope(v.voter_id, code, envelope_id="A", offset=1)
        report = validate_batch(reg, [later, earlier])
        assert report.results[0].envelope_id == "A"
        assert report.results[0].status is Disposition.VALID
        assert report.results[1].status is Disposition.EXPIRED

    def test_duplicate_envelope_id(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        report = validate_batch(
            reg,
            [
                envelope(v.voter_id, code, envelope_id="DUP", offset=0),
                envelope(v.voter_id, code, envelope_id="DUP", offset=1),
            ],
        )
        assert report.results[0].status is Disposition.VALID
        assert report.results[1].status is Disposition.MALFORMED
        assert report.results[1].reason == "duplicate envelope id"

    def test_thousand_honest_voters_all_valid(self):
        reg = fresh_registrar()
        envelopes = []
        for i in range(1000):
            v = register(reg, i)
            code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
            envelopes.append(envelope(v.voter_id, code, envelope_id=f"E{i}", offset=i))
        report = validate_batch(reg, envelopes)
        assert report.counts["VALID"] == 1000
        assert report.all_valid

    def test_rerun_is_deterministic(self):
        def build():
            reg = fresh_registrar()
            v1, v2 = register(reg, 1), register(reg, 2)
            c1 = reg.current_code(v1.voter_id, "GEN-2026", NUMERIC_20).text
            c2 = reg.current_code(v2.voter_id, "GEN-2026", WORDS_6).text
            return validate_batch(
                reg,
                [
                    envelope(v1.voter_id, c1, envelope_id="E1", offset=0),
                    envelope(v2.voter_id, c2, envelope_id="E2", offset=1),
                    envelope(v2.voter_id, "zzzz qqqq jjjj wwww kkkk xxxx", envelope_id="E3", offset=2),
                ],
            )

        assert render_report(build()) == render_report(build())


class TestNotifications:
    def test_entries_for_non_valid_only(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        reg.advance_index(v.voter_id, "GEN-2026")
        report = validate_batch(reg, [envelope(v.voter_id, code)])
        notes = notification_list(report)
        assert len(notes) == 1
        voter_id, status, reason = notes[0]
        assert voter_id == v.voter_id and status == "EXPIRED"

    def test_all_valid_empty_list(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        report = validate_batch(reg, [envelope(v.voter_id, code)])
        assert notification_list(report) == []

    def test_malformed_numeric_mentions_transcription(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        bad = ("1" if code[0] != "1" else "2") + code[1:]
        report = validate_batch(reg, [envelope(v.voter_id, bad)])
        _, status, reason = notification_list(report)[0]
        assert status == "MALFORMED"
        assert "transcription" in reason


class TestCsv:
    def test_round_trip(self):
        records = [
            EnvelopeRecord("E1", "V000001", "GEN-2026", "0000-0000-0000-00", T0),
            EnvelopeRecord("E2", "V000002", "GEN-2026", "beauty together enemy slab trip begin", T0),
        ]
        buf = io.StringIO()
        write_envelope_csv(buf, records)
        parsed = read_envelope_csv(io.StringIO(buf.getvalue()))
        assert parsed == records

    def test_missing_header(self):
        with pytest.raises(MalformedInput, match="line 1"):
            read_envelope_csv(io.StringIO("a,b,c\n"))

    def test_bad_timestamp_line_number(self):
        text = "envelope_id,voter_id,election_id,code_text,received_at\nE1,V1,G,123,not-a-time\n"
        with pytest.raises(MalformedInput, match="line 2"):
            read_envelope_csv(io.StringIO(text))

    def test_zulu_timestamps_accepted(self):
        text = (
            "envelope_id,voter_id,election_id,code_text,received_at\n"
            "E1,V1,G,123,2026-06-01T00:00:00Z\n"
        )
        records = read_envelope_csv(io.StringIO(text))
        assert records[0].received_at == T0


class TestReportFormat:
    def test_stable_bytes(self):
        reg = fresh_registrar()
        v = register(reg)
        code = reg.current_code(v.voter_id, "GEN-2026", NUMERIC_20).text
        report = validate_batch(reg, [envelope(v.voter_id, code)])
        text = render_report(report)
        assert text.startswith("sigcode-report v1\n")
        assert "envelope_id\tstatus\tmatched_index\tcorrections\treason" in text
        assert "\nVALID\t1\n" in text
        assert text.endswith("total\t1\n")
