from __future__ import annotations

import os

# Oracle suites and the CLI read these when no configuration file pins them.
os.environ.setdefault("THETASTRAT_SEED", "20240601")
os.environ.setdefault("THETASTRAT_PRECISION", "128")
