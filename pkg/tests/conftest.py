import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings as hyp_settings

from jointmaj.config import Settings, settings

hyp_settings.register_profile(
    "jointmaj",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
hyp_settings.load_profile("jointmaj")


@pytest.fixture(autouse=True)
def restore_settings():
    """CLI runs write flag values onto the shared settings; undo them."""
    saved = {name: getattr(settings, name) for name in vars(Settings) if name.isupper()}
    yield
    for name, value in saved.items():
        setattr(settings, name, value)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def write_json(tmp_path):
    """Write a payload to a temp file and return its path."""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write
