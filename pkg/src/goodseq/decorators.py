"""Decorator per i comandi della CLI di goodseq."""
from __future__ import annotations

import logging
from functools import wraps
from typing import Any, Callable

import click

from goodseq.errors import GoodSeqError

logger = logging.getLogger(__name__)


def handle_errors(f: Callable) -> Callable:
    """Decorator che traduce le eccezioni di goodseq nei codici di uscita.

    Il messaggio va su standard error; il codice è 2 per gli errori di
    configurazione e 3 per quelli di calcolo.

    Usage:
        @click.command("gen")
        @handle_errors
        def gen_command(**params):
            ...
    """
    @wraps(f)
    def decorated_function(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except GoodSeqError as exc:
            logger.debug("command failed", exc_info=True)
            click.echo(f"Error: {type(exc).__name__}: {exc}", err=True)
            click.get_current_context().exit(exc.exit_code)
    return decorated_function
