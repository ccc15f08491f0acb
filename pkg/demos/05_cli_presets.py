"""
Batch runs through the command line interface
=============================================

The same entry point as the ``hybridqed`` console script. Here a reduced
copy of the fig3 preset is written to a temporary directory.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from hybridqed.cli import main

main(["list-presets"])

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "fig3"
    code = main(["preset", "fig3", "--out", str(out), "--param", "sweep.points=41"])
    manifest = json.loads((out / "manifest.json").read_text())
    print("exit code", code, "files", manifest["files"])
    data = np.loadtxt(out / "populations.csv", delimiter=",", skiprows=1)
    peak = data[np.argmax(data[:, 2]), 0]
    print(f"|C_1|^2 peaks at omega_d = {peak:.3f}")
