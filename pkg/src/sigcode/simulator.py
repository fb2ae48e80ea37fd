"""Seeded threat-model scenarios: coercion, impersonation, transcription noise.

Every run is a pure function of its config (including the seed): the
registrar gets a deterministic nonce source and clock, and all per-voter
randomness is drawn up front in a fixed order so that raising a single
rate never reshuffles the other draws (coupled thresholding).
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field, fields
from datetime import datetime, timedelta, timezone

from . import codegen, validation
from .codegen import CodeFormat, FormatKind, NUMERIC_20
from .errors import ConfigMismatch, MalformedInput
from .registrar import Actor, Registrar, RegistrationFields
from .validation import BatchReport, Disposition, EnvelopeRecord

_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)

HONEST = "honest"
COERCED = "coerced"
IMPERSONATION = "impersonation"
ADVERSARY_CLASSES = (COERCED, IMPERSONATION)


@dataclass(frozen=True)
class ScenarioConfig:
    n_voters: int = 100
    election_id: str = "GEN-2026"
    format: CodeFormat = NUMERIC_20
    coercion_rate: float = 0.0
    impersonation_rate: float = 0.0
    digit_typo_rate: float = 0.0
    word_typo_rate: float = 0.0
    cancel_probability: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_voters < 1:
            raise MalformedInput("n_voters must be >= 1")
        for name in (
            "coercion_rate",
            "impersonation_rate",
            "digit_typo_rate",
            "word_typo_rate",
            "cancel_probability",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise MalformedInput(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class EnvelopeTrace:
    envelope_id: str
    voter_id: str
    kind: str  # honest / coerced / impersonation
    noised: bool
    status: str
    matched_index: int | None


@dataclass
class ScenarioOutcome:
    config: ScenarioConfig
    counts: dict[str, int]
    by_class: dict[str, dict[str, int]]  # class -> disposition counts
    detection_rates: dict[str, float]  # adversary class -> non-VALID fraction
    transcription_failure_rate: float
    trace: list[EnvelopeTrace] = field(default_factory=list)
    report: BatchReport | None = None
    registrar: Registrar | None = None

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class _VoterDraws:
    """Per-voter uniforms, drawn in a fixed order for threshold coupling."""

    coerce: float
    cancel: float
    impersonate: float
    typo: float


def _make_registrar(config: ScenarioConfig) -> tuple[Registrar, random.Random]:
    rng = random.Random(config.rng_seed)
    tick = [0]

    def clock() -> datetime:
        tick[0] += 1
        return _EPOCH + timedelta(seconds=tick[0])

    reg = Registrar(nonce_source=lambda n: rng.randbytes(n), clock=clock)
    return reg, rng


def _register_population(reg: Registrar, config: ScenarioConfig) -> list[str]:
    ids = []
    for i in range(config.n_voters):
        record = reg.register_voter(
            RegistrationFields(
                name=f"Voter {i:05d}",
                address=f"{i + 1} Main Street",
                dob=f"19{50 + i % 50:02d}-01-0{1 + i % 9}",
            ),
            actor=Actor.OFFICIAL,
        )
        ids.append(record.voter_id)
    return ids


def _random_wellformed_code(rng: random.Random, fmt: CodeFormat, reg: Registrar) -> str:
    if fmt.kind is FormatKind.NUMERIC:
        payload = "".join(rng.choice(string.digits) for _ in range(fmt.length - 1))
        digits = payload + str(codegen.damm_check_digit(payload))
        return "-".join(digits[i : i + 4] for i in range(0, len(digits), 4))
    return " ".join(
        reg.wordlist[rng.randrange(len(reg.wordlist))] for _ in range(fmt.length)
    )


def _apply_digit_typo(rng: random.Random, text: str) -> str:
    positions = [i for i, c in enumerate(text) if c.isdigit()]
    pos = rng.choice(positions)
    old = text[pos]
    new = rng.choice([d for d in string.digits if d != old])
    return text[:pos] + new + text[pos + 1 :]


def _apply_word_typo(rng: random.Random, text: str) -> str:
    words = text.split()
    wi = rng.randrange(len(words))
    word = words[wi]
    kind = rng.choice(["substitute", "insert", "delete"])
    pos = rng.randrange(len(word))
    if kind == "substitute":
        new = rng.choice([c for c in string.ascii_lowercase if c != word[pos]])
        word = word[:pos] + new + word[pos + 1 :]
    elif kind == "insert":
        word = word[:pos] + rng.choice(string.ascii_lowercase) + word[pos:]
    else:
        word = word[:pos] + word[pos + 1 :] if len(word) > 1 else word
    words[wi] = word
    return " ".join(words)


def _build_envelopes(
    config: ScenarioConfig, reg: Registrar, rng: random.Random, voter_ids: list[str]
) -> tuple[list[EnvelopeRecord], dict[str, tuple[str, bool]]]:
    """Generate the batch. Returns envelopes plus envelope_id -> (kind, noised)."""
    envelopes: list[EnvelopeRecord] = []
    meta: dict[str, tuple[str, bool]] = {}
    seq = 0

    def add(voter_id: str, code_text: str, kind: str, noised: bool) -> None:
        nonlocal seq
        seq += 1
        envelope_id = f"E{seq:06d}"
        envelopes.append(
            EnvelopeRecord(
                envelope_id=envelope_id,
                voter_id=voter_id,
                election_id=config.election_id,
                code_text=code_text,
                received_at=_EPOCH + timedelta(days=1, seconds=seq),
            )
        )
        meta[envelope_id] = (kind, noised)

    for voter_id in voter_ids:
        draws = _VoterDraws(
            coerce=rng.random(),
            cancel=rng.random(),
            impersonate=rng.random(),
            typo=rng.random(),
        )
        typo_state = rng.getstate()  # noise edits drawn lazily below
        code = reg.current_code(voter_id, config.election_id, config.format).text
        coerced = draws.coerce < config.coercion_rate
        kind = COERCED if coerced else HONEST
        typo_rate = (
            config.digit_typo_rate
            if config.format.kind is FormatKind.NUMERIC
            else config.word_typo_rate
        )
        noised = draws.typo < typo_rate
        if noised:
            rng.setstate(typo_state)
            if config.format.kind is FormatKind.NUMERIC:
                code = _apply_digit_typo(rng, code)
            else:
                code = _apply_word_typo(rng, code)
        else:
            # keep the stream position independent of whether noise fired
            rng.setstate(typo_state)
            if config.format.kind is FormatKind.NUMERIC:
                _apply_digit_typo(rng, code)
            else:
                _apply_word_typo(rng, code)
        add(voter_id, code, kind, noised)
        if coerced and draws.cancel < config.cancel_probability:
            reg.advance_index(voter_id, config.election_id, actor=Actor.VOTER)
        if draws.impersonate < config.impersonation_rate:
            add(
                voter_id,
                _random_wellformed_code(rng, config.format, reg),
                IMPERSONATION,
                False,
            )
    return envelopes, meta


def run_scenario(config: ScenarioConfig) -> ScenarioOutcome:
    """Run the full scheme under the configured adversaries and noise."""
    reg, rng = _make_registrar(config)
    voter_ids = _register_population(reg, config)
    envelopes, meta = _build_envelopes(config, reg, rng, voter_ids)
    report = validation.validate_batch(reg, envelopes)
    return _tally(config, report, meta, reg)


def _tally(
    config: ScenarioConfig,
    report: BatchReport,
    meta: dict[str, tuple[str, bool]],
    reg: Registrar | None,
) -> ScenarioOutcome:
    by_class: dict[str, dict[str, int]] = {
        k: {d.value: 0 for d in Disposition} for k in (HONEST, COERCED, IMPERSONATION)
    }
    trace = []
    honest_total = honest_failed = 0
    for r in report.results:
        kind, noised = meta[r.envelope_id]
        by_class[kind][r.status.value] += 1
        trace.append(
            EnvelopeTrace(
                envelope_id=r.envelope_id,
                voter_id=r.voter_id,
                kind=kind,
                noised=noised,
                status=r.status.value,
                matched_index=r.matched_index,
            )
        )
        if kind == HONEST:
            honest_total += 1
            if r.status is not Disposition.VALID:
                honest_failed += 1
    detection = {}
    for cls in ADVERSARY_CLASSES:
        total = sum(by_class[cls].values())
        caught = total - by_class[cls][Disposition.VALID.value]
        detection[cls] = caught / total if total else 0.0
    return ScenarioOutcome(
        config=config,
        counts=dict(report.counts),
        by_class=by_class,
        detection_rates=detection,
        transcription_failure_rate=honest_failed / honest_total if honest_total else 0.0,
        trace=trace,
        report=report,
        registrar=reg,
    )


def run_baseline(
    config: ScenarioConfig, false_accept: float, false_reject: float
) -> ScenarioOutcome:
    """Handwritten-signature stand-in: per-envelope Bernoulli accept/reject.

    Uses the same seeded population and envelope construction as
    run_scenario; dispositions come from an independent generator seeded
    with rng_seed + 1, one uniform per envelope in batch order.
    """
    for name, v in (("false_accept", false_accept), ("false_reject", false_reject)):
        if not 0.0 <= v <= 1.0:
            raise MalformedInput(f"{name} must be in [0, 1], got {v}")
    reg, rng = _make_registrar(config)
    voter_ids = _register_population(reg, config)
    envelopes, meta = _build_envelopes(config, reg, rng, voter_ids)
    ordered = sorted(envelopes, key=lambda e: (e.received_at, e.envelope_id))
    decide = random.Random(config.rng_seed + 1)
    report = BatchReport()
    for e in ordered:
        kind, _ = meta[e.envelope_id]
        u = decide.random()
        if kind == HONEST:
            accepted = u >= false_reject
        else:
            accepted = u < false_accept
        report.add(
            validation.ValidationResult(
                envelope_id=e.envelope_id,
                voter_id=e.voter_id,
                status=Disposition.VALID if accepted else Disposition.INVALID,
                reason="baseline signature model",
            )
        )
    return _tally(config, report, meta, None)


@dataclass
class ComparisonReport:
    scheme: ScenarioOutcome
    baseline: ScenarioOutcome
    mitigation_delta: dict[str, float]  # adversary class -> scheme - baseline detection

    def render(self) -> str:
        rows = [("metric", "scheme", "baseline")]
        for d in Disposition:
            key = d.value
            rows.append(
                (
                    f"count {key}",
                    str(self.scheme.counts.get(key, 0)),
                    str(self.baseline.counts.get(key, 0)),
                )
            )
        for cls in ADVERSARY_CLASSES:
            rows.append(
                (
                    f"detection {cls}",
                    f"{self.scheme.detection_rates[cls]:.4f}",
                    f"{self.baseline.detection_rates[cls]:.4f}",
                )
            )
        for cls in ADVERSARY_CLASSES:
            rows.append((f"mitigation delta {cls}", f"{self.mitigation_delta[cls]:+.4f}", ""))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = ["  ".join(r[i].ljust(widths[i]) for i in range(3)).rstrip() for r in rows]
        lines.append("")
        lines.append(
            "note: insider and nation-state adversaries are not simulated; the "
            "scheme does not claim to mitigate them."
        )
        lines.append(
            "note: transcription noise rates are placeholders, not measured "
            "human error rates."
        )
        return "\n".join(lines) + "\n"


def compare_report(scheme: ScenarioOutcome, baseline: ScenarioOutcome) -> ComparisonReport:
    """Side-by-side disposition rates and per-adversary mitigation deltas."""
    if scheme.config != baseline.config:
        raise ConfigMismatch(
            "scheme and baseline outcomes were produced from different configs"
        )
    if scheme.total != baseline.total:
        raise ConfigMismatch("outcomes cover different envelope counts")
    delta = {
        cls: scheme.detection_rates[cls] - baseline.detection_rates[cls]
        for cls in ADVERSARY_CLASSES
    }
    return ComparisonReport(scheme=scheme, baseline=baseline, mitigation_delta=delta)


# -- flat key=value config files --------------------------------------------------


def parse_config_file(text: str) -> tuple[ScenarioConfig, dict[str, float]]:
    """Parse a flat key=value scenario file.

    Returns the config plus any baseline parameters (false_accept /
    false_reject) present. Raises MalformedInput naming the offending field.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    baseline_keys = {"false_accept", "false_reject"}
    values: dict[str, object] = {}
    baseline: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise MalformedInput(f"line {lineno}: expected key=value, got {raw!r}")
        if key in baseline_keys:
            try:
                baseline[key] = float(value)
            except ValueError:
                raise MalformedInput(f"field {key}: not a number: {value!r}") from None
            if not 0.0 <= baseline[key] <= 1.0:
                raise MalformedInput(f"field {key}: must be in [0, 1], got {value}")
            continue
        if key not in known:
            raise MalformedInput(f"field {key}: unknown configuration key")
        values[key] = value
    kwargs: dict[str, object] = {}
    for key, value in values.items():
        try:
            if key in ("n_voters", "rng_seed"):
                kwargs[key] = int(value)
            elif key == "election_id":
                kwargs[key] = value
            elif key == "format":
                kwargs[key] = CodeFormat.parse(str(value))
            else:
                kwargs[key] = float(value)
        except (ValueError, MalformedInput):
            raise MalformedInput(f"field {key}: bad value {value!r}") from None
    try:
        config = ScenarioConfig(**kwargs)
    except MalformedInput as e:
        raise MalformedInput(f"field {_first_word(str(e))}: {e}") from None
    return config, baseline


def _first_word(message: str) -> str:
    return message.split()[0] if message else "config"


def render_summary(outcome: ScenarioOutcome) -> str:
    """Aligned plain-text summary of one scenario outcome."""
    rows = [("disposition", "count", "rate")]
    total = outcome.total or 1
    for d in Disposition:
        c = outcome.counts.get(d.value, 0)
        rows.append((d.value, str(c), f"{c / total:.4f}"))
    rows.append(("total", str(outcome.total), ""))
    for cls in ADVERSARY_CLASSES:
        rows.append((f"detection {cls}", f"{outcome.detection_rates[cls]:.4f}", ""))
    rows.append(
        ("honest transcription failures", f"{outcome.transcription_failure_rate:.4f}", "")
    )
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(r[i].ljust(widths[i]) for i in range(3)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"
