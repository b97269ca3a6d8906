#!/usr/bin/env python3
"""Validate a report.json against the shipped schema. Exit 0 when valid."""
import json
import sys
from pathlib import Path

import jsonschema

SCHEMA = Path(__file__).resolve().parent.parent / "data" / "schema" / "report.schema.json"


def main(argv):
    if len(argv) != 2:
        print("usage: validate_report.py REPORT_JSON", file=sys.stderr)
        return 1
    schema = json.loads(SCHEMA.read_text())
    report = json.loads(Path(argv[1]).read_text())
    try:
        jsonschema.validate(report, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        print(f"invalid: {e.message} at {list(e.absolute_path)}", file=sys.stderr)
        return 2
    print("valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
