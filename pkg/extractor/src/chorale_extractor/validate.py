"""Standalone re-validation of an emitted ingestion file.

Applies the same schema rules the primary package enforces on ingest: one
JSON object per line with id / mode / chords / cadence, major|minor mode,
non-empty whitespace-free tokens, unique ids. The rules are duplicated here
on purpose: the file format is the contract between the two packages, and
this side must be able to check it without importing the other.
"""

import argparse
import json
import subprocess
import sys
from collections import Counter

MODES = ("major", "minor")


def _check_tokens(values, what: str, where: str):
    if not isinstance(values, list) or not values:
        raise ValueError(f"{where}: {what} must be a non-empty array")
    for tok in values:
        if not isinstance(tok, str) or not tok:
            raise ValueError(f"{where}: {what} token must be a non-empty string")
        if any(c.isspace() for c in tok):
            raise ValueError(f"{where}: {what} token {tok!r} contains whitespace")


def validate_file(path) -> dict:
    """Parse and validate; returns summary statistics or raises ValueError."""
    ids = set()
    token_counts = Counter()
    mode_counts = Counter()
    records = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}: line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: malformed record: {exc}") from exc
            if not isinstance(obj, dict):
                raise ValueError(f"{where}: expected a JSON object")
            for key in ("id", "mode", "chords", "cadence"):
                if key not in obj:
                    raise ValueError(f"{where}: missing key {key!r}")
            rec_id = obj["id"]
            if not isinstance(rec_id, str) or not rec_id:
                raise ValueError(f"{where}: id must be a non-empty string")
            if rec_id in ids:
                raise ValueError(f"{where}: duplicate id {rec_id!r}")
            ids.add(rec_id)
            if obj["mode"] not in MODES:
                raise ValueError(f"{where}: mode must be one of {MODES}")
            _check_tokens(obj["chords"], "chords", where)
            _check_tokens(obj["cadence"], "cadence", where)
            token_counts.update(obj["chords"])
            token_counts.update(obj["cadence"])
            mode_counts[obj["mode"]] += 1
            records += 1
    if records == 0:
        raise ValueError(f"{path}: no records")
    return {
        "records": records,
        "vocabulary": len(token_counts),
        "modes": dict(mode_counts),
        "top_tokens": token_counts.most_common(10),
    }


def cross_check_with_primary(path) -> int:
    """Feed the file to the primary CLI's ingest; returns its exit code."""
    proc = subprocess.run(
        ["choralegraph", "ingest", str(path)],
        capture_output=True, text=True, check=False,
    )
    sys.stdout.write(proc.stdout)
    sys.stderr.write(proc.stderr)
    return proc.returncode


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chorale-validate",
        description="Validate an extracted ingestion file against the schema",
    )
    parser.add_argument("path")
    parser.add_argument("--primary-cli", action="store_true",
                        help="also run 'choralegraph ingest' on the file")
    args = parser.parse_args(argv)
    try:
        stats = validate_file(args.path)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{stats['records']} records, {stats['vocabulary']} distinct tokens")
    for mode, count in sorted(stats["modes"].items()):
        print(f"{mode}: {count}")
    print("most frequent tokens: "
          + " ".join(f"{tok}({n})" for tok, n in stats["top_tokens"]))
    if args.primary_cli:
        code = cross_check_with_primary(args.path)
        if code != 0:
            print(f"error: primary ingest rejected the file (exit {code})", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
