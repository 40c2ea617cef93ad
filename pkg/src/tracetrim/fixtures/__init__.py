"""Bundled benchmark apps for the sim harness."""

from pathlib import Path


def fixture_path(name: str) -> Path:
    """Directory of a bundled fixture app, e.g. fixture_path("redundant_app")."""
    path = Path(__file__).parent / name
    if not path.is_dir():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
