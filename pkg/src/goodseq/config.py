"""Configurazione di goodseq da variabili d'ambiente (e file `.env`)."""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass, replace
from typing import Any, Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    """Impostazioni globali lette dall'ambiente."""

    precision_bits: int = 256
    k_max: int = 64
    tail_tol: float = 1e-12
    threads: int = 1
    exact_modulus_limit: int = 1 << 20
    max_index: int = 20000
    selection_window: int = 16
    h2_tol: float = 1e-6
    mc_chunk: int = 4096
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        """Costruisce le impostazioni leggendo le variabili `GOODSEQ_*`."""
        load_dotenv()
        return cls(
            precision_bits=int(os.getenv("GOODSEQ_PRECISION_BITS", "256")),
            k_max=int(os.getenv("GOODSEQ_K_MAX", "64")),
            tail_tol=float(os.getenv("GOODSEQ_TAIL_TOL", "1e-12")),
            threads=max(1, int(os.getenv("GOODSEQ_THREADS", "1"))),
            exact_modulus_limit=int(os.getenv("GOODSEQ_EXACT_MODULUS_LIMIT", str(1 << 20))),
            max_index=int(os.getenv("GOODSEQ_MAX_INDEX", "20000")),
            selection_window=int(os.getenv("GOODSEQ_SELECTION_WINDOW", "16")),
            h2_tol=float(os.getenv("GOODSEQ_H2_TOL", "1e-6")),
            mc_chunk=int(os.getenv("GOODSEQ_MC_CHUNK", "4096")),
            log_level=os.getenv("GOODSEQ_LOG_LEVEL", "WARNING").upper(),
        )


@dataclass(frozen=True)
class Policy:
    """Politica di troncamento per il prodotto infinito L(θ)."""

    k_max: int
    tail_tol: float
    precision_bits: int

    @classmethod
    def default(cls) -> "Policy":
        s = get_settings()
        return cls(k_max=s.k_max, tail_tol=s.tail_tol, precision_bits=s.precision_bits)

    def with_overrides(self, **changes: Any) -> "Policy":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


# Istanza globale delle impostazioni
_settings: Optional[Settings] = None
_settings_lock = threading.Lock()


def get_settings() -> Settings:
    """Ottiene o crea l'istanza globale delle impostazioni."""
    global _settings
    if _settings is None:
        with _settings_lock:
            if _settings is None:
                _settings = Settings.from_env()
    return _settings


def configure(**overrides: Any) -> Settings:
    """Sostituisce alcune impostazioni globali (usato da CLI e test).

    Argomenti:
        overrides: campi di `Settings` da cambiare

    Ritorna:
        Le nuove impostazioni attive
    """
    global _settings
    with _settings_lock:
        base = _settings or Settings.from_env()
        _settings = replace(base, **overrides)
    return _settings


def reset_settings() -> None:
    """Dimentica le impostazioni correnti: verranno rilette dall'ambiente."""
    global _settings
    with _settings_lock:
        _settings = None
