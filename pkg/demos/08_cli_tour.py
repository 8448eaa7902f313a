"""Drive the command-line surface end to end.

Writes a small TOML experiment config, then invokes the CLI in-process:
`analyze` runs the configured analyses, `roundtrip` re-derives inputs
from outputs, `suite` replays one of the named invariant suites, and
`filter` handles the real-coefficient rate-change computation.
"""

import tempfile
from pathlib import Path

from infoloss.cli import main

CONFIG = """\
[alphabets.bits]
ring = "mod-2"

[source]
kind = "iid"
alphabet = "bits"
probs = [0.5, 0.5]

[[systems]]
kind = "xor-filter"

[[analyses]]
kind = "loss-report"
max_block = 10

[[analyses]]
kind = "invertibility"
"""

with tempfile.TemporaryDirectory() as d:
    cfg = Path(d) / "xor.toml"
    cfg.write_text(CONFIG)

    print("== analyze (text) ==")
    main(["analyze", str(cfg), "--format", "text"])

    print("\n== roundtrip ==")
    main(["roundtrip", str(cfg), "--sequences", "3", "--length", "16",
          "--format", "text"])

    print("\n== suite dpi, 5 instances ==")
    main(["suite", "dpi", "--seed", "1", "--instances", "5", "--format", "text"])

    print("\n== filter 1 - 2/z ==")
    main(["filter", "--b", "1", "-2"])
