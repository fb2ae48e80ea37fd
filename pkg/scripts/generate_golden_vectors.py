#!/usr/bin/env python3
"""Regenerate tests/data/golden_vectors.txt from first principles.

Deliberately does NOT import the sigcode package: the chain, the check
digit and the word slicing are recomputed here so the vector file is an
independent oracle for the conformance tests.
"""

import hashlib
from pathlib import Path

SECRET = bytes([0x11]) * 32
ELECTION = "GEN-2024"
MAX_INDEX = 64

ROOT = Path(__file__).resolve().parent.parent
WORDS = (ROOT / "src/sigcode/data/wordlist.txt").read_text().split()
assert len(WORDS) == 2048

DAMM = [
    [0, 3, 1, 7, 5, 9, 8, 6, 4, 2],
    [7, 0, 9, 2, 1, 5, 4, 8, 6, 3],
    [4, 2, 0, 6, 8, 7, 1, 3, 5, 9],
    [1, 7, 5, 0, 9, 8, 3, 4, 2, 6],
    [6, 1, 2, 3, 0, 4, 5, 9, 7, 8],
    [3, 6, 7, 4, 2, 0, 9, 5, 8, 1],
    [5, 8, 6, 9, 7, 2, 0, 1, 3, 4],
    [8, 9, 4, 5, 3, 6, 2, 0, 1, 7],
    [9, 4, 3, 8, 6, 1, 7, 2, 0, 5],
    [2, 5, 8, 1, 4, 3, 6, 7, 9, 0],
]


def damm_digit(digits: str) -> int:
    interim = 0
    for ch in digits:
        interim = DAMM[interim][int(ch)]
    return interim


def numeric20(value: bytes) -> str:
    payload = str(int.from_bytes(value, "big") % 10**19).zfill(19)
    digits = payload + str(damm_digit(payload))
    return "-".join(digits[i : i + 4] for i in range(0, 20, 4))


def words6(value: bytes) -> str:
    bitstring = "".join(f"{b:08b}" for b in value)
    return " ".join(
        WORDS[int(bitstring[k * 11 : (k + 1) * 11], 2)] for k in range(6)
    )


def main() -> None:
    lines = []
    v = hashlib.sha256(b"\x01" + SECRET + ELECTION.encode()).digest()
    for i in range(MAX_INDEX + 1):
        lines.append(
            f"{SECRET.hex()},{ELECTION},{i},{numeric20(v)},{words6(v)}"
        )
        v = hashlib.sha256(b"\x02" + v).digest()
    out = ROOT / "tests/data/golden_vectors.txt"
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {MAX_INDEX + 1} vectors to {out}")


if __name__ == "__main__":
    main()
