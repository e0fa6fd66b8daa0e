"""Fixture condivise dai test di goodseq."""
import os

import pytest

from goodseq.config import reset_settings
from goodseq.lacunary import build_modulus


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Ogni test parte dalle impostazioni di default, senza variabili GOODSEQ_*."""
    for name in [n for n in os.environ if n.startswith("GOODSEQ_")]:
        monkeypatch.delenv(name)
    # un file .env nella directory corrente non deve entrare nei test
    monkeypatch.setattr("goodseq.config.load_dotenv", lambda *args, **kwargs: False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def geometric3():
    """m_j = 3^j."""
    return build_modulus("geometric:3")


@pytest.fixture
def factorial2():
    """m_j = (j+2)!."""
    return build_modulus("factorial:2")


@pytest.fixture
def power_squares():
    """m_j = 2^(j^2)."""
    return build_modulus("power:2:2:2:1")


@pytest.fixture
def squaring():
    """m_1 = 3, m_(j+1) = 3·m_j^2."""
    return build_modulus("squaring:3:3")
