import pytest

import mtve_config
from mtve import logging_config


@pytest.fixture(autouse=True)
def _isolated_environment(tmp_path, monkeypatch):
    monkeypatch.setattr(mtve_config, "CONFIG_PATH", tmp_path / ".mtve" / "config.json")
    monkeypatch.setattr(logging_config, "LOG_FILE", str(tmp_path / "logs" / "mtve.log"))
    monkeypatch.setenv("MTVE_OUTPUTS_DIR", str(tmp_path / "outputs"))
    monkeypatch.delenv("MTVE_THREADS", raising=False)
    monkeypatch.delenv("MTVE_STRICT", raising=False)
    yield
    logging_config.reset_logging()
