"""
Settings and constant profiles for the sparse SFM toolkit.

Every Theta-level iteration count in the solvers carries an explicit multiplier.
The "faithful" profile uses the analysed constants; "desk" trades the
high-probability guarantees for runtimes that fit a test suite.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ConfigError

# Settings file location
SETTINGS_DIR = Path.home() / ".sparse_sfm"
SETTINGS_FILE = SETTINGS_DIR / "settings.json"
SETTINGS_ENV = "SPARSE_SFM_SETTINGS"
DEBUG_ENV = "SPARSE_SFM_DEBUG"

# Absolute tolerance for every threshold comparison
TOLERANCE = 1e-9


@dataclass(frozen=True)
class ConstantProfile:
    """Multipliers, divisors and caps shared by both solver pipelines"""
    name: str
    c_m: float = 1.0            # mirror descent iterations
    c_M: float = 1.0            # SubmodularFTRL iterations
    c_N: float = 1.0            # stochastic certificate repetitions
    c_z: float = 100.0          # certificate estimate draws
    c_A: float = 1.0            # arc-finding oversampling draws
    c_P: float = 1e5            # per-element arc samples
    parallel_divisor: float = 4.0
    sequential_divisor: float = 12.0
    arc_delta_divisor: float = 24.0
    max_md_iterations: Optional[int] = None
    max_ftrl_iterations: Optional[int] = None
    max_repetitions: Optional[int] = None
    max_samples: Optional[int] = None
    early_exit: bool = False
    fan_out_rounds: bool = True
    max_workers: int = 1

    def __post_init__(self):
        for name in ("c_m", "c_M", "c_N", "c_z", "c_A", "c_P",
                     "parallel_divisor", "sequential_divisor", "arc_delta_divisor"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"Profile {self.name}: {name} must be positive")
        for name in ("max_md_iterations", "max_ftrl_iterations", "max_repetitions", "max_samples"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"Profile {self.name}: {name} must be at least 1")
        if self.max_workers < 1:
            raise ConfigError(f"Profile {self.name}: max_workers must be at least 1")

    def cap(self, count: float, limit: Optional[int]) -> int:
        """Round an iteration count up and clip it to [1, limit]"""
        value = max(1, math.ceil(count))
        if limit is not None:
            value = min(value, limit)
        return value

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_PROFILES: Dict[str, ConstantProfile] = {
    "faithful": ConstantProfile(name="faithful"),
    "desk": ConstantProfile(
        name="desk",
        c_M=0.05,
        c_N=1e-4,
        c_z=4.0,
        c_A=48.0,
        c_P=2.0,
        max_md_iterations=20000,
        max_ftrl_iterations=1500,
        max_repetitions=6,
        max_samples=20000,
        early_exit=True,
        fan_out_rounds=False,
    ),
}


def settings_path() -> Path:
    """Settings file, honouring the environment override."""
    override = os.environ.get(SETTINGS_ENV)
    return Path(override) if override else SETTINGS_FILE


def debug_checks_enabled() -> bool:
    return os.environ.get(DEBUG_ENV, "") not in ("", "0", "false", "False")


def load_settings() -> dict:
    """Load settings from file."""
    path = settings_path()
    if path.exists():
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
            if isinstance(data, dict):
                return data
        except (json.JSONDecodeError, IOError):
            pass

    # Return default settings
    return {
        "profiles": {},
        "default_profile": "desk",
    }


def save_settings(settings: dict):
    """Save settings to file."""
    path = settings_path()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(settings, f, indent=2, sort_keys=True)
    except IOError:
        pass  # Fail silently


def get_setting(key: str, default=None):
    """Get a specific setting value."""
    settings = load_settings()
    return settings.get(key, default)


def set_setting(key: str, value):
    """Set a specific setting value."""
    settings = load_settings()
    settings[key] = value
    save_settings(settings)


def get_profile(name: Optional[str] = None, use_settings: bool = True) -> ConstantProfile:
    """Resolve a constant profile, applying user overrides from the settings file."""
    settings = load_settings() if use_settings else {}
    if name is None:
        name = settings.get("default_profile", "desk")
    if name not in DEFAULT_PROFILES:
        raise ConfigError(f"Unknown profile: {name}")

    profile = DEFAULT_PROFILES[name]
    overrides = settings.get("profiles", {}).get(name, {}) if use_settings else {}
    if overrides:
        known = {f.name for f in fields(ConstantProfile)} - {"name"}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"Unknown profile fields for {name}: {sorted(unknown)}")
        profile = replace(profile, **overrides)
    return profile
