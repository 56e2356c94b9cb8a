"""Checks the shipped fixtures against the JSON schemas.

Fixtures in tests/fixtures must validate, those in tests/fixtures/invalid
must not, and those in tests/fixtures/rejected must validate (the tool
rejects them for reasons a schema cannot express, such as a composite
prime or a reducible modulus).
"""

import json
import pathlib
import sys

import jsonschema

SCHEMAS = {
    "descriptor": "descriptor.schema.json",
    "classify": "classify_input.schema.json",
    "dickson": "dickson_input.schema.json",
    "products": "products_input.schema.json",
}


def validator_for(root, name):
    prefix = name.split("_", 1)[0]
    schema = json.loads((root / "schemas" / SCHEMAS[prefix]).read_text())
    return jsonschema.Draft202012Validator(schema)


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    failures = 0
    for file in SCHEMAS.values():
        jsonschema.Draft202012Validator.check_schema(json.loads((root / "schemas" / file).read_text()))
    fixtures = root / "tests" / "fixtures"
    cases = [(p, True) for p in sorted(fixtures.glob("*.json"))]
    cases += [(p, False) for p in sorted((fixtures / "invalid").glob("*.json"))]
    cases += [(p, True) for p in sorted((fixtures / "rejected").glob("*.json"))]
    for path, should_pass in cases:
        errors = list(validator_for(root, path.name).iter_errors(json.loads(path.read_text())))
        ok = (not errors) == should_pass
        failures += not ok
        status = "ok" if ok else "MISMATCH"
        detail = errors[0].message if errors else "valid"
        print(f"{status:8} {path.relative_to(root)}: {detail}")
    print(f"{len(cases)} fixtures, {failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
