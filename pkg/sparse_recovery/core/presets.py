"""Experiment preset loading and merging."""
import json
from pathlib import Path
from typing import Dict


PRESETS_DIR = Path(__file__).parent.parent.parent / "presets"


def load_preset(filename: str) -> Dict:
    """Load a JSON experiment preset from the presets directory."""
    preset_path = PRESETS_DIR / filename
    if not preset_path.exists():
        raise FileNotFoundError(f"Preset file not found: {preset_path}")
    return json.loads(preset_path.read_text(encoding="utf-8"))


def load_config_file(path: str) -> Dict:
    """Load a user configuration file (JSON object)."""
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    data = json.loads(config_path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"Config file {config_path} must hold a JSON object")
    return data


def merge_layers(*layers: Dict) -> Dict:
    """Merge configuration layers left to right; None values never override."""
    merged: Dict = {}
    for layer in layers:
        for key, value in layer.items():
            if value is not None:
                merged[key] = value
    return merged
