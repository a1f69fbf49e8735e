import pytest

from diploid_vortex.config.settings import reload_settings
from diploid_vortex.types.models import DemographicParams
from diploid_vortex.utils.cache import clear_caches


@pytest.fixture(autouse=True)
def fresh_caches():
    clear_caches()
    yield
    clear_caches()


@pytest.fixture
def settings_env(monkeypatch):
    """Apply DIPLOID_VORTEX_* variables and reload settings; restored afterwards."""
    applied = []

    def apply(**env):
        for key, value in env.items():
            monkeypatch.setenv(key, str(value))
            applied.append(key)
        return reload_settings()

    yield apply
    for key in applied:
        monkeypatch.delenv(key, raising=False)
    reload_settings()


@pytest.fixture
def neutral_params():
    return DemographicParams(b=2.0, d=1.0, c=0.5)


@pytest.fixture
def small_b():
    """Inside the contracting regime b <= c / 24."""
    return DemographicParams(b=0.02, d=1.0, c=1.0)
