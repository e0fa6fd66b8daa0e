"""Eccezioni di goodseq.

Ogni eccezione porta con sé il codice di uscita usato dalla CLI:
- 2 per errori di configurazione/validazione
- 3 per errori di calcolo (precisione, orizzonte, limiti violati)
"""
from __future__ import annotations


class GoodSeqError(Exception):
    """Errore base del pacchetto."""

    exit_code = 3


class ConfigurationError(GoodSeqError):
    """Parametri non validi, rilevati prima di iniziare il calcolo."""

    exit_code = 2


class NonPositive(ConfigurationError):
    pass


class NotIncreasing(ConfigurationError):
    pass


class RatioTooSmall(ConfigurationError):
    """Qualche rapporto m_{j+1}/m_j è minore di 3."""


class NotDivisible(ConfigurationError):
    """La catena di divisibilità m_j | m_{j+1} non vale."""


class GrowthTooSlow(ConfigurationError):
    """Nessun indice soddisfa la condizione di crescita richiesta."""


class SelectionTooShallow(ConfigurationError):
    """La sottosuccessione selezionata ha troppo pochi indici."""


class ComputationError(GoodSeqError):
    """Errore durante il calcolo."""

    exit_code = 3


class InsufficientPrecision(ComputationError):
    """L'angolo diadico non ha abbastanza bit per questo moltiplicatore."""


class HorizonExceeded(ComputationError):
    """Indice oltre l'orizzonte materializzabile della successione."""


class BoundViolation(ComputationError):
    """Una maggiorazione certificata è stata violata."""
