"""Repository di memoizzazione per le successioni di moduli.

Fornisce un prefisso memorizzato m_1, m_2, ... con:
- estensione pigra su richiesta
- operazioni thread-safe (lettori concorrenti, un solo estensore alla volta)
- statistiche e invalidazione
"""
from __future__ import annotations

import threading
from typing import Any, Callable, Dict, List, Optional

# produttore: (j, m_j) -> m_{j+1}
Producer = Callable[[int, int], int]


class MemoRepository:
    """Memo thread-safe del prefisso calcolato di una successione."""

    def __init__(self, first: int, producer: Producer, max_index: Optional[int] = None):
        """Inizializza il repository.

        Argomenti:
            first: valore di m_1
            producer: funzione che calcola m_{j+1} a partire da (j, m_j)
            max_index: indice massimo materializzabile (None = illimitato)
        """
        self._values: List[int] = [first]
        self._producer = producer
        self.max_index = max_index
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0

    def __len__(self) -> int:
        return len(self._values)

    def get(self, j: int) -> Optional[int]:
        """Recupera m_j se già calcolato, altrimenti None."""
        values = self._values
        if 1 <= j <= len(values):
            self._hits += 1
            return values[j - 1]
        return None

    def extend_to(self, j: int) -> int:
        """Estende il prefisso fino all'indice j e ritorna m_j.

        Argomenti:
            j: indice (1-based) richiesto

        Ritorna:
            Il valore m_j
        """
        cached = self.get(j)
        if cached is not None:
            return cached
        with self._lock:
            # un altro thread potrebbe aver già esteso il prefisso
            values = self._values
            self._misses += 1
            while len(values) < j:
                n = len(values)
                values.append(self._producer(n, values[-1]))
            return values[j - 1]

    def prefix(self) -> List[int]:
        """Copia del prefisso calcolato finora."""
        with self._lock:
            return list(self._values)

    def invalidate(self) -> int:
        """Scarta tutto tranne m_1.

        Ritorna:
            Numero di voci eliminate
        """
        with self._lock:
            removed = len(self._values) - 1
            # i lettori tengono il riferimento alla lista precedente
            self._values = self._values[:1]
            return removed

    def stats(self) -> Dict[str, Any]:
        """Ottiene statistiche del memo.

        Ritorna:
            Dizionario con voci, hit, miss e dimensione in bit dell'ultimo valore
        """
        with self._lock:
            return {
                "entries": len(self._values),
                "hits": self._hits,
                "misses": self._misses,
                "last_bits": self._values[-1].bit_length(),
                "max_index": self.max_index,
            }
