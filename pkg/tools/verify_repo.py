#!/usr/bin/env python3
from pathlib import Path
import sys

EXPECTED = [
    'mtve/geometry.py',
    'mtve/greens.py',
    'mtve/kernels.py',
    'mtve/fields.py',
    'mtve/quadrature.py',
    'mtve/solver.py',
    'mtve/oracle.py',
    'mtve/cli.py',
    'mtve_config.py',
    'configs/minkowski_1d.ini',
]

root = Path(__file__).resolve().parent.parent
missing = [p for p in EXPECTED if not (root / p).exists()]
if missing:
    print('[mtve] Missing critical files:', ', '.join(missing))
    sys.exit(1)
print('[mtve] Repo structure OK')
