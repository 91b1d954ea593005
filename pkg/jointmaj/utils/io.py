import json
import logging
import os

import click
from pydantic import BaseModel

from jointmaj.config import settings
from jointmaj.errors import InputError

logger = logging.getLogger(__name__)


def read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from exc


def dump(payload) -> str:
    """Deterministic JSON text: sorted keys, shortest round-trip floats."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2)


def emit(payload, out: str | None = None) -> None:
    """Write to the configured output path, or stdout when none is set."""
    target = settings.OUT if out is None else out
    text = dump(payload)
    if not target:
        click.echo(text)
        return
    directory = os.path.dirname(target)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(target, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")
    logger.info("wrote %s", target)
