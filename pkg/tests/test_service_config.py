import json

import pytest

from wildtrap.errors import ConfigurationError
from wildtrap.service.config import load_config


def test_flags_beat_env_beat_file(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({
        "store_root": str(tmp_path / "from-file"),
        "listen_address": "127.0.0.1:1111",
        "auth_token": "file-token",
    }))
    env = {
        "WILDTRAP_LISTEN": "127.0.0.1:2222",
        "WILDTRAP_STORE": str(tmp_path / "from-env"),
        "WILDTRAP_TOKEN": "env-token",
    }
    merged = load_config(config_file=str(config_file), env=env)
    assert merged.listen_address == "127.0.0.1:2222"
    assert merged.store_root.name == "from-env"
    assert merged.auth_token == "env-token"

    flagged = load_config(config_file=str(config_file), env=env,
                          listen_address="127.0.0.1:3333",
                          store_root=str(tmp_path / "from-flag"),
                          auth_token="flag-token")
    assert flagged.listen_address == "127.0.0.1:3333"
    assert flagged.store_root.name == "from-flag"
    assert flagged.auth_token == "flag-token"


def test_file_only(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"store_root": str(tmp_path / "s")}))
    config = load_config(config_file=str(config_file), env={})
    assert config.listen_address == "127.0.0.1:8777"
    assert config.auth_token is None


def test_profile_from_file_and_spec_field_name(tmp_path):
    profile_path = tmp_path / "profile.json"
    profile_path.write_text(json.dumps({
        "model_id": "uk-mammals-v2", "region": "uk",
        "labels": ["deer", "badger", "grey squirrel"],
        "input_long_side": 640, "default_min_confidence": 0.4,
    }))
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({
        "store_root": str(tmp_path / "s"),
        "default_model_profile": str(profile_path),
    }))
    config = load_config(config_file=str(config_file), env={})
    assert config.profile.model_id == "uk-mammals-v2"
    assert config.profile.input_long_side == 640


def test_store_root_required(tmp_path):
    with pytest.raises(ConfigurationError, match="store root"):
        load_config(env={})


def test_missing_rules_file_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match="rules"):
        load_config(env={}, store_root=str(tmp_path / "s"),
                    rules_file=str(tmp_path / "nope.json"))


def test_bad_backend_mode_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match="backend"):
        load_config(env={}, store_root=str(tmp_path / "s"),
                    backend={"mode": "quantum"})
    with pytest.raises(ConfigurationError, match="url"):
        load_config(env={}, store_root=str(tmp_path / "s"),
                    backend={"mode": "remote"})


def test_unreadable_config_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigurationError):
        load_config(config_file=str(bad), env={})
