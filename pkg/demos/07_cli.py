"""
Running experiments from config files
=====================================

The same computations through the ``limsup-lab`` command, with seeded,
hashed and manifest-checked outputs.
"""

import tempfile
from pathlib import Path

from limsup_lab.cli import main

work = Path(tempfile.mkdtemp())
(work / "dim.cfg").write_text("command=dim_eval\nsetting=padic\nm=2\nn=1\ntau=4\n")
(work / "scan.cfg").write_text(
    "command=measure_scan\nspec.div=1/2,1/2\nspec.conv=3/5,3/5\nsamples=200\nladder=16,64,256\ntail_starts=16,64\n"
)

print("dim_eval exit", main(["dim_eval", "--config", str(work / "dim.cfg"), "--out", str(work / "out")]))
print((work / "out" / "dim_eval.csv").read_text())

print("measure_scan exit", main(["measure_scan", "--config", str(work / "scan.cfg"), "--seed", "3", "--out", str(work / "out")]))
print((work / "out" / "measure_scan.csv").read_text())
print(sorted(p.name for p in (work / "out").iterdir()))
