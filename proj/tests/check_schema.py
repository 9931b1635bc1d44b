import json
import pathlib
import sys

try:
    import jsonschema
except ImportError:
    print("jsonschema not installed; skipping")
    sys.exit(0)

schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
bad = 0
for path in sorted(pathlib.Path(sys.argv[2]).glob("*.json")):
    errors = list(jsonschema.Draft202012Validator(schema).iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.name}: {e.message}")
    bad += bool(errors)
    print(f"{path.name}: {'ok' if not errors else 'invalid'}")
sys.exit(1 if bad else 0)
