"""
Driving the command line
========================

Every capability is reachable from the ``ellgeo`` command with a JSON config.
This script writes a config, runs two subcommands in-process and reads the
results back.
"""

import json
import tempfile
from pathlib import Path

from ellgeo.cli import main

work = Path(tempfile.mkdtemp())

cfg = {"n": 3, "a": [3, 2, 1], "method": "both", "t_end": 10, "stride": 0.1, "seed": 7}
(work / "run.json").write_text(json.dumps(cfg, indent=2))
code = main(["integrate", "--config", str(work / "run.json"), "--out", str(work / "run")])
print("integrate exit code", code)
print(json.loads((work / "run" / "comparison.json").read_text()))

(work / "verify.json").write_text(json.dumps({"n": 3, "a": [3, 2, 1], "samples": 200, "seed": 42}))
code = main(["verify", "--config", str(work / "verify.json"), "--out", str(work / "verify")])
report = json.loads((work / "verify" / "verify.json").read_text())
print("verify exit code", code, "all pass:", report["all_pass"])

print("outputs in", work)
