"""Access to the guarded-command models shipped with the package."""

from __future__ import annotations

from importlib import resources

from .gcl import load_model
from .model import Model


def bundled_model_names() -> list[str]:
    root = resources.files(__package__) / "models"
    return sorted(p.name[: -len(".gcm")] for p in root.iterdir() if p.name.endswith(".gcm"))


def load_bundled(name: str) -> Model:
    path = resources.files(__package__) / "models" / f"{name}.gcm"
    return load_model(path.read_text(encoding="utf-8"), name=name)


def load_all_bundled() -> list[Model]:
    return [load_bundled(name) for name in bundled_model_names()]
