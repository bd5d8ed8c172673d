#!/usr/bin/env python3
#
# Copyright (c) 2026, The chemflow authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs the reference task through the CLI and validates the exported notebook with jsonschema."""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--config", required=True)
    ap.add_argument("--schema", required=True)
    args = ap.parse_args()
    cli = str(Path(args.cli).resolve())
    config = str(Path(args.config).resolve())

    with tempfile.TemporaryDirectory() as tmp:
        nb_path = Path(tmp) / "session.ipynb"
        run = subprocess.run(
            [cli, "run", "-q", "-c", config, "--export-trace", str(nb_path)],
            cwd=tmp,
            check=False,
        )
        if run.returncode != 0:
            print(f"run exited with {run.returncode}", file=sys.stderr)
            return 1
        notebook = json.loads(nb_path.read_text())
        schema = json.loads(Path(args.schema).read_text())
        jsonschema.Draft4Validator.check_schema(schema)
        errors = sorted(jsonschema.Draft4Validator(schema).iter_errors(notebook), key=lambda e: list(e.path))
        for err in errors:
            print(f"{list(err.path)}: {err.message}", file=sys.stderr)
        code_cells = sum(1 for c in notebook["cells"] if c["cell_type"] == "code")
        print(f"cells={len(notebook['cells'])} code={code_cells} errors={len(errors)}")
        return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
