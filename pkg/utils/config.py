import os
import re
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"

_ENV_PATTERN = re.compile(r'^\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-(.*))?\}$')


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load configuration from YAML file"""

    load_dotenv()

    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    with open(path, 'r') as f:
        config = yaml.safe_load(f) or {}

    config = _replace_env_vars(config)
    config = _apply_overrides(config)

    config['data_dir'] = config.get('data_dir', 'data')
    if config.get('recording', {}).get('enabled', True):
        os.makedirs(config['data_dir'], exist_ok=True)

    return config


def runtime_threads(config: Optional[Dict[str, Any]] = None) -> int:
    """Worker cap for FFTs and per-charge sums (MONODROME_THREADS wins)"""

    env_value = os.getenv('MONODROME_THREADS')
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            raise ValueError(f"MONODROME_THREADS must be an integer, got {env_value!r}")

    threads = (config or {}).get('runtime', {}).get('threads', 1)
    return max(1, int(threads or 1))


def _apply_overrides(config: Dict[str, Any]) -> Dict[str, Any]:
    """Environment variables that bypass the YAML file"""

    level = os.getenv('MONODROME_LOG_LEVEL')
    if level:
        config.setdefault('logging', {})['level'] = level

    threads = os.getenv('MONODROME_THREADS')
    if threads:
        config.setdefault('runtime', {})['threads'] = runtime_threads(config)

    return config


def _replace_env_vars(config: Any) -> Any:
    """Recursively replace ${VAR} and ${VAR:-default} with environment values"""

    if isinstance(config, dict):
        return {k: _replace_env_vars(v) for k, v in config.items()}
    elif isinstance(config, list):
        return [_replace_env_vars(item) for item in config]
    elif isinstance(config, str):
        match = _ENV_PATTERN.match(config)
        if not match:
            return config
        var_name, default = match.groups()
        value = os.getenv(var_name)
        if value is not None:
            return yaml.safe_load(value)
        return yaml.safe_load(default) if default is not None else config
    else:
        return config
