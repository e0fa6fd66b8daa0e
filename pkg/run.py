"""Run helper: aggiunge `src/` al `sys.path` e avvia la CLI senza installazione.

Esempio:
    python run.py gen --family geometric:3 --n 13

Alternativa: `pip install -e .` e poi il comando `goodseq`.
"""
from __future__ import annotations

import os
import sys

ROOT = os.path.dirname(os.path.abspath(__file__))
SRC = os.path.join(ROOT, "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from goodseq.cli import main

if __name__ == "__main__":
    main()
