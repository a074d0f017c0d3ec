"""
Tests for configuration management and bundled assets.
"""

import json
import tempfile
from pathlib import Path

import pytest

from burstadvisor.advisor import CLOUD, LOCAL
from burstadvisor.config import (
    LOG_STORE_ENV_VAR,
    ConfigManager,
    default_environments,
    get_config_manager,
    load_node_sizes,
    load_price_table,
    load_profile,
    memory_per_core_default,
    set_user_default,
    show_config,
)
from burstadvisor.cost import BillingMode, fit_alpha
from burstadvisor.profile import TimeUnit
from burstadvisor.utils import fingerprint, parse_node_sizes


@pytest.mark.unit
class TestConfigManager:
    """Persistent defaults and path resolution."""

    def test_initialization_does_not_create_directories(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            mgr = ConfigManager(config_dir=Path(temp_dir) / "cfg")
            assert not mgr.config_dir.exists()
            assert mgr.load_config() == {}

    def test_defaults_round_trip(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            mgr = ConfigManager(config_dir=temp_dir)
            mgr.set_default("memory_per_core", "2GB/proc")
            assert ConfigManager(config_dir=temp_dir).get_default("memory_per_core") == "2GB/proc"
            assert mgr.get_default("missing", "fallback") == "fallback"

    def test_corrupt_config_is_ignored(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            mgr = ConfigManager(config_dir=temp_dir)
            mgr.config_file.write_text("{not json")
            assert mgr.load_config() == {}

    def test_log_store_resolution_order(self, tmp_path, monkeypatch):
        mgr = ConfigManager(config_dir=tmp_path / "cfg")
        assert mgr.log_store_path() == tmp_path / "data" / "burstadvisor" / "executions.jsonl"

        mgr.set_default("log_store", str(tmp_path / "stored.jsonl"))
        assert mgr.log_store_path() == tmp_path / "stored.jsonl"

        monkeypatch.setenv(LOG_STORE_ENV_VAR, str(tmp_path / "env.jsonl"))
        assert mgr.log_store_path() == tmp_path / "env.jsonl"

    def test_config_info(self, tmp_path):
        info = ConfigManager(config_dir=tmp_path).get_config_info()
        assert info["config_directory"] == str(tmp_path)
        assert info["config_exists"] is False
        assert info["log_store"].endswith("executions.jsonl")

    def test_global_manager_uses_xdg(self, tmp_path):
        assert get_config_manager().config_dir == tmp_path / "config" / "burstadvisor"
        assert get_config_manager() is get_config_manager()

    def test_user_defaults(self):
        assert memory_per_core_default() == "4GB/proc"
        assert set_user_default("memory_per_core", "2GB") == "2GB/proc"
        assert memory_per_core_default() == "2GB/proc"
        assert get_config_manager().get_default("memory_per_core") == "2GB/proc"

    def test_user_defaults_are_validated(self):
        with pytest.raises(ValueError):
            set_user_default("colour", "red")
        with pytest.raises(ValueError):
            set_user_default("memory_per_core", "3GB")
        assert get_config_manager().load_config() == {}

    def test_show_config(self, capsys):
        show_config()
        assert "Log store" in capsys.readouterr().out


@pytest.mark.unit
class TestBundledAssets:
    """Profiles, node sizes and price tables shipped with the package."""

    def test_profiles(self):
        local = load_profile("local")
        cloud = load_profile("cloud")
        assert (local.a, local.b) == (1013.50, -1.58)
        assert (cloud.a, cloud.b) == (7004.86, -2.06)
        assert cloud.time_unit is TimeUnit.MINUTES
        assert cloud.observed_p_range == (10, 40)

    def test_profile_from_file(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"a": 3.0, "b": -1.2, "time_unit": "seconds"}))
        profile = load_profile(path)
        assert profile.time_unit is TimeUnit.SECONDS
        relabelled = load_profile(path, time_unit="hours")
        assert relabelled.time_unit is TimeUnit.HOURS
        assert relabelled.a == 3.0

    def test_node_sizes(self):
        sizes = load_node_sizes()
        assert sizes[CLOUD] == (1, 2, 4, 8, 12, 16)
        assert sizes[LOCAL] == tuple(range(1, 201))

    def test_price_table_selection(self, tmp_path):
        assert load_price_table(memory_per_core="1GB/proc").memory_per_core == "1GB/proc"
        path = tmp_path / "custom.csv"
        path.write_text("cores,cost_per_hour\n1,0.1\n2,0.2\n")
        assert load_price_table(path).cores == (1, 2)


@pytest.mark.unit
class TestDefaultEnvironments:
    """Environment construction from bundled assets."""

    def test_shared_alpha_and_ratio(self):
        local, cloud = default_environments(price_ratio=1.8)
        alpha = fit_alpha(load_price_table(memory_per_core="4GB/proc"))
        assert local.name == LOCAL and cloud.name == CLOUD
        assert cloud.cost.alpha == pytest.approx(alpha)
        assert local.cost.alpha == cloud.cost.alpha
        assert local.cost.k == 1.8
        assert cloud.cost.k == 1.0

    def test_overheads_and_billing_switches(self):
        local, cloud = default_environments(queue_hours=2.0, setup_hours=0.5, billing="hourly")
        assert local.overhead_hours == 2.0 and not local.bill_overhead
        assert cloud.overhead_hours == 0.5 and cloud.bill_overhead
        assert local.cost.billing is BillingMode.HOURLY

    def test_profiles_in_hours(self):
        local, cloud = default_environments()
        assert cloud.profile.time_unit is TimeUnit.HOURS
        assert cloud.profile.a == pytest.approx(7004.86 / 60)

    def test_profile_time_unit_override(self):
        local, cloud = default_environments(profile_time_unit="hours")
        assert local.profile.a == 1013.50
        assert cloud.profile.a == 7004.86
        assert cloud.profile.b == -2.06
        minutes_local, _ = default_environments()
        assert local.profile.a == pytest.approx(60 * minutes_local.profile.a)

    def test_custom_sizes(self):
        local, cloud = default_environments(local_sizes="1-32", cloud_sizes=[1, 2, 4])
        assert local.max_node_size == 32
        assert cloud.allowed_node_sizes == (1, 2, 4)


@pytest.mark.unit
class TestUtils:
    """Helpers shared across modules."""

    def test_parse_node_sizes(self):
        assert parse_node_sizes("1-4,8,16") == (1, 2, 3, 4, 8, 16)
        assert parse_node_sizes([16, 1, 4, 4]) == (1, 4, 16)
        assert parse_node_sizes("12, 1,2") == (1, 2, 12)

    def test_parse_node_sizes_invalid(self):
        with pytest.raises(ValueError):
            parse_node_sizes(3.5)
        with pytest.raises(ValueError):
            parse_node_sizes("1,two")

    def test_fingerprint(self):
        assert fingerprint({"a": 1, "b": [1, 2]}) == fingerprint({"b": [1, 2], "a": 1})
        assert fingerprint({"a": 1}) != fingerprint({"a": 2})
        assert len(fingerprint({})) == 64
