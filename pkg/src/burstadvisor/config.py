"""
Configuration management for burstadvisor.

Provides persistent user defaults (log store location, memory configuration)
and builders for the bundled on-premise and cloud environments.
"""

import os
import json
import logging
from pathlib import Path
from typing import Optional, Dict, Any, Tuple, Union

from .advisor import CLOUD, LOCAL, Environment
from .cost import BillingMode, CostModel, PriceTable, fit_alpha
from .profile import ApplicationProfile
from .utils import data_path, parse_node_sizes

LOG_STORE_ENV_VAR = "BURSTADVISOR_LOG_STORE"

DEFAULT_MEMORY_PER_CORE = "4GB/proc"

# user defaults that can be stored with set_user_default
USER_DEFAULT_KEYS = ("memory_per_core", "log_store")


class ConfigManager:
    """Manages persistent configuration for burstadvisor"""

    def __init__(self, config_dir: Optional[Union[str, Path]] = None):
        """Initialize configuration manager with default or explicit paths"""
        self.config_dir = Path(config_dir) if config_dir else self._get_config_directory()
        self.config_file = self.config_dir / "config.json"

    def _get_config_directory(self) -> Path:
        """Get the appropriate configuration directory for the current OS"""
        if os.name == 'nt':  # Windows
            config_root = Path(os.environ.get('APPDATA', os.path.expanduser('~'))) / 'BURSTADVISOR'
        else:  # Unix-like (Linux, macOS)
            config_root = Path(os.environ.get('XDG_CONFIG_HOME', os.path.expanduser('~/.config'))) / 'burstadvisor'
        return config_root

    def _get_data_directory(self) -> Path:
        """Get the directory holding persistent data such as the execution log"""
        if os.name == 'nt':
            return self.config_dir
        return Path(os.environ.get('XDG_DATA_HOME', os.path.expanduser('~/.local/share'))) / 'burstadvisor'

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from file"""
        if not self.config_file.exists():
            return {}

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                return json.load(f)
        except Exception as e:
            logging.warning(f"Error loading config from {self.config_file}: {e}")
            return {}

    def save_config(self, config: Dict[str, Any]):
        """Save configuration to file"""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(config, f, indent=2, ensure_ascii=False)
        except Exception as e:
            logging.error(f"Error saving config to {self.config_file}: {e}")

    def get_default(self, key: str, fallback: Any = None) -> Any:
        """Get a stored user default"""
        return self.load_config().get('defaults', {}).get(key, fallback)

    def set_default(self, key: str, value: Any):
        """Persist a user default"""
        config = self.load_config()
        config.setdefault('defaults', {})[key] = value
        self.save_config(config)
        logging.info(f"Default saved: {key}={value!r}")

    def log_store_path(self) -> Path:
        """
        Resolve the execution log location.

        Order: the ``BURSTADVISOR_LOG_STORE`` environment variable, the stored
        ``log_store`` default, then ``<data dir>/executions.jsonl``.
        """
        env_path = os.environ.get(LOG_STORE_ENV_VAR)
        if env_path:
            return Path(env_path)
        stored = self.get_default('log_store')
        if stored:
            return Path(stored)
        return self._get_data_directory() / 'executions.jsonl'

    def get_config_info(self) -> Dict[str, Any]:
        """Get information about the configuration"""
        return {
            'config_directory': str(self.config_dir),
            'config_file': str(self.config_file),
            'config_exists': self.config_file.exists(),
            'log_store': str(self.log_store_path()),
            'defaults': self.load_config().get('defaults', {}),
        }


# Global configuration manager instance
_config_manager = None

def get_config_manager() -> ConfigManager:
    """Get the global configuration manager instance"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def memory_per_core_default() -> str:
    """The stored ``memory_per_core`` default, or 4GB/proc."""
    return get_config_manager().get_default("memory_per_core", DEFAULT_MEMORY_PER_CORE)


def set_user_default(key: str, value: str) -> str:
    """
    Validate and persist one user default; returns the stored value.

    Raises:
        ValueError: If ``key`` is not a known default, or the memory
            configuration is not one of the bundled price columns
    """
    if key not in USER_DEFAULT_KEYS:
        raise ValueError(f"Unknown default '{key}'. Available: {list(USER_DEFAULT_KEYS)}")
    if key == "memory_per_core":
        value = PriceTable.bundled(value).memory_per_core
    elif key == "log_store":
        value = str(Path(value).expanduser())
    get_config_manager().set_default(key, value)
    return value


def load_profile(source: Union[str, Path], time_unit=None) -> ApplicationProfile:
    """
    Load a profile from a JSON file, or one of the bundled profiles by name
    (``"local"`` or ``"cloud"``). ``time_unit`` overrides the unit recorded in
    the file without converting the coefficients.
    """
    source = str(source)
    if source in (LOCAL, CLOUD):
        source = os.path.join(data_path(), 'profiles', f'{source}.json')
    profile = ApplicationProfile.load(source)
    return profile.read_as(time_unit) if time_unit is not None else profile


def load_node_sizes(path: Optional[Union[str, Path]] = None) -> Dict[str, Tuple[int, ...]]:
    """Processors-per-node sets keyed by environment name."""
    path = path or os.path.join(data_path(), 'node_sizes.json')
    with open(path, 'r', encoding='utf-8') as f:
        raw = json.load(f)
    return {name: parse_node_sizes(spec) for name, spec in raw.items()}


def load_price_table(source: Optional[Union[str, Path]] = None,
                     memory_per_core: str = DEFAULT_MEMORY_PER_CORE) -> PriceTable:
    """A price table from a CSV file, or the bundled column for ``memory_per_core``."""
    if source:
        return PriceTable.from_csv(source)
    return PriceTable.bundled(memory_per_core)


def default_environments(
    memory_per_core: str = DEFAULT_MEMORY_PER_CORE,
    price_ratio: float = 1.0,
    queue_hours: float = 0.0,
    setup_hours: float = 0.0,
    bill_queue: bool = False,
    bill_setup: bool = True,
    billing: Union[str, BillingMode] = BillingMode.CONTINUOUS,
    local_profile: Optional[Union[str, Path]] = None,
    cloud_profile: Optional[Union[str, Path]] = None,
    price_table: Optional[Union[str, Path]] = None,
    local_sizes=None,
    cloud_sizes=None,
    profile_time_unit=None,
) -> Tuple[Environment, Environment]:
    """
    Build the on-premise and cloud environments from bundled or given assets.

    Args:
        memory_per_core: Bundled price column used when ``price_table`` is not given
        price_ratio: Multiplier ``K`` of the local hourly rate over the cloud rate
        queue_hours: Expected queue wait on the local cluster
        setup_hours: Provisioning time in the cloud
        bill_queue: Whether local queue time is charged
        bill_setup: Whether cloud setup time is charged
        billing: Continuous or hourly billing for both environments
        profile_time_unit: Unit to read both profiles' ``a`` in, replacing the
            unit recorded in the profile files

    Returns:
        ``(local, cloud)``
    """
    sizes = load_node_sizes()
    alpha = fit_alpha(load_price_table(price_table, memory_per_core))
    billing = BillingMode(billing)
    local = Environment(
        name=LOCAL,
        allowed_node_sizes=parse_node_sizes(local_sizes) if local_sizes else sizes[LOCAL],
        profile=load_profile(local_profile or LOCAL, profile_time_unit),
        cost=CostModel(alpha=alpha, k=price_ratio, billing=billing),
        overhead_hours=queue_hours,
        bill_overhead=bill_queue,
    )
    cloud = Environment(
        name=CLOUD,
        allowed_node_sizes=parse_node_sizes(cloud_sizes) if cloud_sizes else sizes[CLOUD],
        profile=load_profile(cloud_profile or CLOUD, profile_time_unit),
        cost=CostModel(alpha=alpha, k=1.0, billing=billing),
        overhead_hours=setup_hours,
        bill_overhead=bill_setup,
    )
    return local, cloud


def show_config():
    """Show current configuration information"""
    info = get_config_manager().get_config_info()

    print("burstadvisor configuration:")
    print(f"  Config directory: {info['config_directory']}")
    print(f"  Config file: {info['config_file']}")
    print(f"  Config exists: {info['config_exists']}")
    print(f"  Log store: {info['log_store']}")
    print(f"  Defaults: {info['defaults'] if info['defaults'] else 'None'}")
