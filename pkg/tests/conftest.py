"""
Pytest configuration and shared fixtures for burstadvisor tests.
"""

import pytest
import os
import sys

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from burstadvisor.advisor import CLOUD, LOCAL, Environment
from burstadvisor.cost import CostModel
from burstadvisor.profile import ApplicationProfile, TimeUnit


# Pytest markers for test categorization
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as running several modules end to end"
    )
    config.addinivalue_line(
        "markers", "slow: mark test as slow running"
    )
    config.addinivalue_line(
        "markers", "reproduction: mark test as a full-grid headline number check"
    )


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep configuration and the execution log out of the user's home."""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "config"))
    monkeypatch.setenv("XDG_DATA_HOME", str(tmp_path / "data"))
    monkeypatch.delenv("BURSTADVISOR_LOG_STORE", raising=False)
    import burstadvisor.config as config_module
    monkeypatch.setattr(config_module, "_config_manager", None)


@pytest.fixture(scope="session")
def local_profile():
    """On-premise FWI profile (minutes)."""
    return ApplicationProfile(a=1013.50, b=-1.58, time_unit=TimeUnit.MINUTES)


@pytest.fixture(scope="session")
def cloud_profile():
    """Cloud FWI profile (minutes)."""
    return ApplicationProfile(a=7004.86, b=-2.06, time_unit=TimeUnit.MINUTES)


@pytest.fixture(scope="session")
def cloud_sizes():
    return (1, 2, 4, 8, 12, 16)


@pytest.fixture(scope="session")
def local_sizes():
    return tuple(range(1, 201))


@pytest.fixture
def make_environments(local_profile, cloud_profile, local_sizes, cloud_sizes):
    """Factory for a (local, cloud) pair with a shared alpha."""
    def _make(k=1.0, alpha=0.04, queue_hours=0.0, setup_hours=0.0,
              bill_queue=False, bill_setup=True, billing="continuous"):
        local = Environment(
            name=LOCAL,
            allowed_node_sizes=local_sizes,
            profile=local_profile,
            cost=CostModel(alpha=alpha, k=k, billing=billing),
            overhead_hours=queue_hours,
            bill_overhead=bill_queue,
        )
        cloud = Environment(
            name=CLOUD,
            allowed_node_sizes=cloud_sizes,
            profile=cloud_profile,
            cost=CostModel(alpha=alpha, k=1.0, billing=billing),
            overhead_hours=setup_hours,
            bill_overhead=bill_setup,
        )
        return local, cloud
    return _make
