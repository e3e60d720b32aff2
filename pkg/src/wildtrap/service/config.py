"""Service configuration with flags > environment > config file precedence."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError
from ..pipeline.preprocess import ModelProfile, default_profile

ENV_LISTEN = "WILDTRAP_LISTEN"
ENV_STORE = "WILDTRAP_STORE"
ENV_TOKEN = "WILDTRAP_TOKEN"


@dataclass
class ServiceConfig:
    store_root: Path
    listen_address: str = "127.0.0.1:8777"
    rules_file: Path | None = None
    camera_registry_file: Path | None = None
    profile: ModelProfile = field(default_factory=default_profile)
    auth_token: str | None = None
    backend: dict = field(default_factory=lambda: {"mode": "truth_sidecar",
                                                   "jitter_px": 0.0, "seed": 0})
    concurrency: int = 4
    retry_limit: int = 3
    dispatch_interval_s: float = 0.2

    def __post_init__(self):
        self.store_root = Path(self.store_root)
        if self.rules_file is not None:
            self.rules_file = Path(self.rules_file)
            if not self.rules_file.exists():
                raise ConfigurationError(f"rules file not found: {self.rules_file}")
        if self.camera_registry_file is not None:
            self.camera_registry_file = Path(self.camera_registry_file)
            if not self.camera_registry_file.exists():
                raise ConfigurationError(
                    f"camera registry not found: {self.camera_registry_file}")
        mode = self.backend.get("mode")
        if mode not in ("truth_sidecar", "fixed", "remote"):
            raise ConfigurationError(f"unknown backend mode {mode!r}")
        if mode == "remote" and not self.backend.get("url"):
            raise ConfigurationError("remote backend needs a url")

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen_address.rsplit(":", 1)[1])
        except (IndexError, ValueError) as exc:
            raise ConfigurationError(
                f"listen address must be host:port, got {self.listen_address!r}") from exc


def load_config(config_file: str | None = None, env: dict | None = None,
                **overrides) -> ServiceConfig:
    """Merge config file, WILDTRAP_* environment variables, then explicit
    overrides (highest precedence). ``None`` overrides are ignored."""
    env = os.environ if env is None else env
    settings: dict = {}
    if config_file:
        try:
            settings.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"unreadable config file {config_file}: {exc}") from exc
    if env.get(ENV_LISTEN):
        settings["listen_address"] = env[ENV_LISTEN]
    if env.get(ENV_STORE):
        settings["store_root"] = env[ENV_STORE]
    if env.get(ENV_TOKEN):
        settings["auth_token"] = env[ENV_TOKEN]
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value

    if "store_root" not in settings:
        raise ConfigurationError("store root is required (flag, WILDTRAP_STORE, or config)")

    profile = settings.pop("profile", None)
    if profile is None:
        profile = settings.pop("default_model_profile", None)
    else:
        settings.pop("default_model_profile", None)
    if isinstance(profile, str):
        try:
            profile = json.loads(Path(profile).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"unreadable profile {profile}: {exc}") from exc
    if isinstance(profile, dict):
        settings["profile"] = ModelProfile.from_dict(profile)
    elif isinstance(profile, ModelProfile):
        settings["profile"] = profile

    try:
        return ServiceConfig(**settings)
    except TypeError as exc:
        raise ConfigurationError(f"bad config: {exc}") from exc
