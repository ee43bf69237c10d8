import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from settings import get_settings  # noqa: E402


@pytest.fixture
def reports_dir(tmp_path, monkeypatch):
    """BEG_REPORTS_DIR apontando para um diretório temporário."""
    monkeypatch.setenv("BEG_REPORTS_DIR", str(tmp_path))
    get_settings.cache_clear()
    yield tmp_path
    get_settings.cache_clear()
