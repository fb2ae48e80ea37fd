import hashlib
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigcode import codegen
from sigcode.codegen import (
    ChainValue,
    CodeFormat,
    FormatKind,
    MatchVerdict,
    NUMERIC_20,
    SharedSecret,
    WORDS_6,
    chain_value,
    damm_check_digit,
    decode_numeric,
    decode_words,
    derive_secret,
    encode_numeric,
    encode_words,
    match_code,
)
from sigcode.errors import (
    ChainExhausted,
    ChecksumMismatch,
    MalformedCode,
    MalformedInput,
    UnrecoverableWord,
)
from sigcode.wordlist import default_wordlist

GOLDEN = Path(__file__).parent / "data" / "golden_vectors.txt"

SECRET = SharedSecret(value=bytes([0x11]) * 32)


def make_value(raw: bytes, index=0, election="E") -> ChainValue:
    return ChainValue(value=raw, index=index, election_id=election)


class TestDeriveSecret:
    def test_golden_vector(self):
        # pinned: SHA-256(0x00 || "abc" || 32 zero bytes), verified with openssl
        s = derive_secret(b"abc", bytes(32))
        assert s.value.hex() == (
            "e50d154bd792fbe03c717d20a06aa4e6dd38d98bf3dc6305dec983dbb26c3fe3"
        )
        assert s.version == 1

    def test_deterministic(self):
        assert derive_secret(b"abc", bytes(32)).value == derive_secret(b"abc", bytes(32)).value

    def test_nonce_changes_secret(self):
        a = derive_secret(b"abc", bytes(32))
        b = derive_secret(b"abc", bytes([1]) + bytes(31))
        assert a.value != b.value

    def test_empty_blob_rejected(self):
        with pytest.raises(MalformedInput):
            derive_secret(b"", bytes(32))

    def test_empty_nonce_rejected(self):
        with pytest.raises(MalformedInput):
            derive_secret(b"abc", b"")


class TestChainValue:
    def test_seed_golden_vector(self):
        # pinned: SHA-256(0x01 || 0x11*32 || "GEN-2024"), verified with openssl
        v = chain_value(SECRET, "GEN-2024", 0)
        assert v.value.hex() == (
            "13bc7527e57e8c288e594a978cb74ca74bd21fc8270ef63d21535556b1dad879"
        )

    def test_recurrence(self):
        prev = chain_value(SECRET, "GEN-2024", 0)
        for i in range(64):
            nxt = chain_value(SECRET, "GEN-2024", i + 1)
            assert nxt.value == hashlib.sha256(b"\x02" + prev.value).digest()
            prev = nxt

    def test_election_binding(self):
        assert chain_value(SECRET, "A", 0).value != chain_value(SECRET, "B", 0).value

    def test_chain_exhausted(self):
        with pytest.raises(ChainExhausted):
            chain_value(SECRET, "E", 1024)

    def test_negative_index(self):
        with pytest.raises(MalformedInput):
            chain_value(SECRET, "E", -1)

    def test_empty_election(self):
        with pytest.raises(MalformedInput):
            chain_value(SECRET, "", 0)


class TestGoldenVectors:
    def test_conformance_file(self):
        lines = GOLDEN.read_text().splitlines()
        assert len(lines) == 65
        wl = default_wordlist()
        for line in lines:
            secret_hex, election, index, numeric, words = line.split(",")
            secret = SharedSecret(value=bytes.fromhex(secret_hex))
            v = chain_value(secret, election, int(index))
            assert encode_numeric(v, 20).text == numeric
            assert encode_words(v, 6, wl).text == words


class TestNumericEncoding:
    def test_all_zero_payload(self):
        v = make_value(bytes(32))
        assert encode_numeric(v, 14).text == "0000-0000-0000-00"

    def test_golden_20(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        assert encode_numeric(v, 20).text == "0377-5205-1267-9204-9853"

    def test_bad_length(self):
        with pytest.raises(MalformedInput):
            encode_numeric(make_value(bytes(32)), 16)

    def test_check_digit_valid(self):
        v = chain_value(SECRET, "GEN-2024", 3)
        digits = encode_numeric(v, 20).text.replace("-", "")
        assert damm_check_digit(digits) == 0

    @given(st.binary(min_size=32, max_size=32), st.sampled_from([14, 20]))
    def test_round_trip(self, raw, length):
        v = make_value(raw)
        rendered = encode_numeric(v, length)
        payload = decode_numeric(rendered.text)
        assert payload == rendered.text.replace("-", "")[:-1]

    def test_decode_rejects_letters(self):
        with pytest.raises(MalformedCode):
            decode_numeric("0000-0000-00a0-00")

    def test_decode_rejects_wrong_length(self):
        with pytest.raises(MalformedCode):
            decode_numeric("1234-5678")

    def test_single_substitution_detected(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        digits = encode_numeric(v, 20).text.replace("-", "")
        for pos in range(20):
            for d in "0123456789":
                if d == digits[pos]:
                    continue
                bad = digits[:pos] + d + digits[pos + 1 :]
                with pytest.raises(ChecksumMismatch):
                    decode_numeric(bad)

    def test_adjacent_transposition_detected(self):
        v = chain_value(SECRET, "GEN-2024", 1)
        digits = encode_numeric(v, 20).text.replace("-", "")
        for pos in range(19):
            if digits[pos] == digits[pos + 1]:
                continue
            bad = digits[:pos] + digits[pos + 1] + digits[pos] + digits[pos + 2 :]
            with pytest.raises(ChecksumMismatch):
                decode_numeric(bad)


class TestWordEncoding:
    def test_all_zero_value(self):
        wl = default_wordlist()
        v = make_value(bytes(32))
        assert encode_words(v, 6).text == " ".join([wl[0]] * 6)

    def test_golden_sentence(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        assert encode_words(v, 6).text == "beauty together enemy slab trip begin"

    def test_trailing_bytes_ignored(self):
        # only the first 66 bits are encoded for 6 words
        a = bytearray(range(32))
        b = bytearray(range(32))
        b[20] ^= 0xFF
        assert encode_words(make_value(bytes(a)), 6).text == encode_words(make_value(bytes(b)), 6).text

    def test_bit_slicing_oracle(self):
        # independent slicing: big-endian bitstring cut into 11-bit groups
        wl = default_wordlist()
        raw = hashlib.sha256(b"slices").digest()
        bits = "".join(f"{byte:08b}" for byte in raw)
        expected = " ".join(wl[int(bits[k * 11 : (k + 1) * 11], 2)] for k in range(6))
        assert encode_words(make_value(raw), 6).text == expected

    def test_bad_word_count(self):
        with pytest.raises(MalformedInput):
            encode_words(make_value(bytes(32)), 7)

    @given(st.binary(min_size=32, max_size=32), st.sampled_from([4, 5, 6]))
    def test_round_trip(self, raw, n_words):
        rendered = encode_words(make_value(raw), n_words)
        decoded = decode_words(rendered.text)
        assert decoded.corrections == 0
        assert list(decoded.indices) == codegen._word_indices(make_value(raw), n_words)

    def test_single_typo_recovery(self):
        rendered = encode_words(chain_value(SECRET, "GEN-2024", 0), 6)
        words = rendered.text.split()
        # "beauty" -> "beautx": unique nearest is the original
        typo = " ".join(["beautx"] + words[1:])
        decoded = decode_words(typo)
        assert decoded.corrections == 1
        assert decoded.indices == decode_words(rendered.text).indices

    def test_unrecoverable_token(self):
        with pytest.raises(UnrecoverableWord):
            decode_words("zzzzzz beauty together enemy slab trip")

    def test_wrong_token_count(self):
        with pytest.raises(MalformedCode):
            decode_words("beauty together")

    def test_uppercase_normalized(self):
        rendered = encode_words(chain_value(SECRET, "GEN-2024", 0), 6)
        assert decode_words(rendered.text.upper()).corrections == 0


class TestMatchCode:
    def test_match(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        assert match_code(encode_numeric(v, 20).text, v, NUMERIC_20) is MatchVerdict.MATCH
        assert match_code(encode_words(v, 6).text, v, WORDS_6) is MatchVerdict.MATCH

    def test_mismatch(self):
        v0 = chain_value(SECRET, "GEN-2024", 0)
        v1 = chain_value(SECRET, "GEN-2024", 1)
        assert match_code(encode_numeric(v1, 20).text, v0, NUMERIC_20) is MatchVerdict.MISMATCH

    def test_transcription_error(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        text = encode_numeric(v, 20).text
        flipped = ("1" if text[0] != "1" else "2") + text[1:]
        assert match_code(flipped, v, NUMERIC_20) is MatchVerdict.TRANSCRIPTION_ERROR

    def test_word_typo_still_matches(self):
        v = chain_value(SECRET, "GEN-2024", 0)
        words = encode_words(v, 6).text.split()
        words[0] = "beautx"
        assert match_code(" ".join(words), v, WORDS_6) is MatchVerdict.MATCH


class TestDeterminism:
    @settings(max_examples=25)
    @given(
        st.binary(min_size=32, max_size=32),
        st.text(min_size=1, max_size=8, alphabet=st.characters(min_codepoint=33, max_codepoint=126)),
        st.integers(min_value=0, max_value=64),
    )
    def test_rendering_is_pure(self, raw, election, index):
        secret = SharedSecret(value=raw)
        a = encode_numeric(chain_value(secret, election, index), 20).text
        b = encode_numeric(chain_value(secret, election, index), 20).text
        assert a == b


class TestCodeFormat:
    def test_parse(self):
        fmt = CodeFormat.parse("numeric-20")
        assert fmt.kind is FormatKind.NUMERIC and fmt.length == 20

    def test_parse_rejects_garbage(self):
        with pytest.raises(MalformedInput):
            CodeFormat.parse("hex-12")

    def test_invalid_lengths(self):
        with pytest.raises(MalformedInput):
            CodeFormat(FormatKind.NUMERIC, 15)
        with pytest.raises(MalformedInput):
            CodeFormat(FormatKind.WORDS, 7)
