"""Batch mode: many fibers of one family at once.

The family y^2 = Q(x, Gamma) is solved once; evaluating the solution
polynomial at the Teichmueller lifts of several fiber parameters (via a
subproduct tree) then yields the zeta function of every fiber curve for
the price of one deformation solve.
"""

import json
import subprocess
import sys

payload = {
    "p": 7,
    "n": 1,
    "curve": [1, 2, 0],  # Gamma = 1 endpoint: y^2 = x^3 + 2x + 1
    "batch": [0, 1, 2, 3, 4, 5, 6],
}

proc = subprocess.run(
    [sys.executable, "-m", "hyperzeta.cli", "batch", "-", "--verify-budget", "400"],
    input=json.dumps(payload), capture_output=True, text=True,
)
out = json.loads(proc.stdout)
print(f"family over F_{out['q']} (genus {out['g']}), "
      f"{len(out['fibers'])} fibers requested")
for entry in out["fibers"]:
    fiber = entry["fiber"]
    if "skipped" in entry:
        print(f"  gamma = {fiber}: skipped ({entry['skipped']})")
    elif "error" in entry:
        print(f"  gamma = {fiber}: error ({entry['error']})")
    else:
        verified = entry["checks"].get("oracle", {}).get("match")
        print(f"  gamma = {fiber}: P(t) = {entry['numerator']}, "
              f"#C = {entry['counts'][0]}, enumeration match: {verified}")
