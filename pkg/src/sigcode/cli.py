"""Operator command line: registrar admin, codes, validation, vectors, scenarios.

Exit codes for `validate`: 0 all envelopes VALID, 1 any other disposition,
2 input errors. Other verbs exit 0 on success and 2 on input errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import codegen, simulator, validation
from .codegen import CodeFormat, SharedSecret
from .errors import MalformedInput, SigcodeError, StoreCorrupt
from .registrar import Actor, Registrar, RegistrationFields
from .wordlist import Wordlist, default_wordlist


def _load_store(path: str, wordlist: Wordlist | None = None) -> Registrar:
    p = Path(path)
    if not p.exists():
        raise click.ClickException(f"store file not found: {path}")
    try:
        return Registrar.load(p, wordlist=wordlist)
    except StoreCorrupt as e:
        raise click.ClickException(f"store corrupt: {e}") from None


def _wordlist_option(path: str | None) -> Wordlist | None:
    if path is None:
        return None
    try:
        return Wordlist.from_file(path)
    except (OSError, MalformedInput) as e:
        raise click.ClickException(f"bad wordlist file: {e}") from None


@click.group()
def main():
    """Signature codes for absentee ballot envelopes."""


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--name", required=True)
@click.option("--address", required=True)
@click.option("--dob", required=True)
def register(store_path, name, address, dob):
    """Register a voter; prints the one-time secret disclosure."""
    p = Path(store_path)
    reg = Registrar.load(p) if p.exists() else Registrar()
    try:
        record = reg.register_voter(
            RegistrationFields(name=name, address=address, dob=dob),
            actor=Actor.OFFICIAL,
        )
    except SigcodeError as e:
        raise click.ClickException(str(e)) from None
    reg.save(p)
    click.echo(f"voter_id: {record.voter_id}")
    click.echo(f"secret: {record.secret.value.hex()}")
    click.echo(f"secret_version: {record.secret.version}")
    click.echo("note: the secret is disclosed only once; store it securely")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--voter", "voter_id", required=True)
@click.option("--election", "election_id", required=True)
@click.option("--format", "fmt", default="NUMERIC-20", show_default=True)
@click.option("--wordlist", "wordlist_path", default=None, type=click.Path())
def code(store_path, voter_id, election_id, fmt, wordlist_path):
    """Show the voter's current code (read-only)."""
    reg = _load_store(store_path, _wordlist_option(wordlist_path))
    try:
        rendered = reg.current_code(voter_id, election_id, CodeFormat.parse(fmt))
    except SigcodeError as e:
        raise click.ClickException(str(e)) from None
    click.echo(f"index: {rendered.index}")
    click.echo(f"code: {rendered.text}")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--voter", "voter_id", required=True)
@click.option("--election", "election_id", required=True)
def advance(store_path, voter_id, election_id):
    """Advance the voter's chain index, expiring the current code."""
    reg = _load_store(store_path)
    try:
        new_index = reg.advance_index(voter_id, election_id, actor=Actor.VOTER)
    except SigcodeError as e:
        raise click.ClickException(str(e)) from None
    reg.save(store_path)
    click.echo(f"new_index: {new_index}")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--voter", "voter_id", required=True)
def rotate(store_path, voter_id):
    """Issue a fresh secret for the voter; prints the one-time disclosure."""
    reg = _load_store(store_path)
    try:
        secret = reg.rotate_secret(voter_id, actor=Actor.OFFICIAL)
    except SigcodeError as e:
        raise click.ClickException(str(e)) from None
    reg.save(store_path)
    click.echo(f"secret: {secret.value.hex()}")
    click.echo(f"secret_version: {secret.version}")


@main.command()
@click.argument("batch_csv", type=click.Path())
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--window", default=validation.DEFAULT_WINDOW, show_default=True)
@click.option("--back-scan", default=validation.DEFAULT_BACK_SCAN, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Also write the report to this file.")
@click.option("--wordlist", "wordlist_path", default=None, type=click.Path())
def validate(batch_csv, store_path, window, back_scan, out_path, wordlist_path):
    """Validate an envelope batch CSV against the store."""
    if not Path(batch_csv).exists():
        click.echo(f"error: batch file not found: {batch_csv}", err=True)
        sys.exit(2)
    try:
        reg = _load_store(store_path, _wordlist_option(wordlist_path))
    except click.ClickException as e:
        click.echo(f"error: {e.message}", err=True)
        sys.exit(2)
    try:
        with open(batch_csv, newline="", encoding="utf-8") as f:
            envelopes = validation.read_envelope_csv(f)
    except MalformedInput as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    report = validation.validate_batch(reg, envelopes, window, back_scan)
    reg.save(store_path)
    text = validation.render_report(report)
    click.echo(text, nl=False)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    sys.exit(0 if report.all_valid else 1)


@main.command()
@click.argument("secret_hex")
@click.argument("election_id")
@click.argument("max_index", type=int)
def vectors(secret_hex, election_id, max_index):
    """Emit conformance vectors: secret_hex,election_id,index,numeric20,words6."""
    try:
        raw = bytes.fromhex(secret_hex)
    except ValueError:
        click.echo("error: secret must be hex", err=True)
        sys.exit(2)
    if len(raw) != 32:
        click.echo("error: secret must be 64 hex chars (32 bytes)", err=True)
        sys.exit(2)
    if max_index < 0:
        click.echo("error: max_index must be >= 0", err=True)
        sys.exit(2)
    secret = SharedSecret(value=raw)
    wl = default_wordlist()
    for i in range(max_index + 1):
        value = codegen.chain_value(secret, election_id, i, max_chain_length=max_index + 1)
        numeric = codegen.encode_numeric(value, 20).text
        words = codegen.encode_words(value, 6, wl).text
        click.echo(f"{secret_hex},{election_id},{i},{numeric},{words}")


@main.command()
@click.argument("config_path", type=click.Path())
def simulate(config_path):
    """Run a threat-model scenario from a key=value config file."""
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    try:
        config, baseline_params = simulator.parse_config_file(text)
    except MalformedInput as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    outcome = simulator.run_scenario(config)
    click.echo(simulator.render_summary(outcome), nl=False)
    if baseline_params:
        baseline = simulator.run_baseline(
            config,
            false_accept=baseline_params.get("false_accept", 0.0),
            false_reject=baseline_params.get("false_reject", 0.0),
        )
        click.echo("")
        click.echo(simulator.compare_report(outcome, baseline).render(), nl=False)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--official-token", default=None,
              help="Defaults to the SIGCODE_OFFICIAL_TOKEN environment variable.")
@click.option("--window", default=validation.DEFAULT_WINDOW, show_default=True)
@click.option("--back-scan", default=validation.DEFAULT_BACK_SCAN, show_default=True)
@click.option("--wordlist", "wordlist_path", default=None, type=click.Path())
def serve(store_path, host, port, official_token, window, back_scan, wordlist_path):
    """Run the HTTP service over a store file."""
    import uvicorn

    from .service import create_app

    wl = _wordlist_option(wordlist_path)
    p = Path(store_path)
    reg = Registrar.load(p, wordlist=wl) if p.exists() else Registrar(wordlist=wl)
    try:
        app = create_app(
            reg,
            official_token=official_token,
            window=window,
            back_scan=back_scan,
            store_path=p,
        )
    except MalformedInput as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
