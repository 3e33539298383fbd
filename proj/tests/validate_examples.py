import glob
import json
import os
import sys

try:
    import jsonschema
except ImportError:
    print("jsonschema not installed; skipping")
    sys.exit(0)

schema = json.load(open(sys.argv[1]))
jsonschema.Draft202012Validator.check_schema(schema)
files = sorted(glob.glob(os.path.join(sys.argv[2], "*.json")))
for path in files:
    jsonschema.validate(json.load(open(path)), schema)
    print("valid", os.path.basename(path))
if not files:
    sys.exit("no example configs found")
