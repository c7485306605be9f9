#!/usr/bin/env python3

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

load_dotenv()

REPO_ROOT = Path(__file__).resolve().parent.parent


def _int_env(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Runtime configuration read from the environment (.env supported)"""

    isometry_bound: int = 4
    represent_bound: int = 8
    workers: int = 1
    log_level: str = "WARNING"
    data_dir: Path = REPO_ROOT / "data"
    polytope_2355: Optional[Path] = None

    @classmethod
    def from_env(cls) -> "Settings":
        data_dir = Path(os.getenv('ACYL_DATA_DIR', str(REPO_ROOT / "data")))
        if not data_dir.is_absolute():
            data_dir = REPO_ROOT / data_dir
        p2355 = os.getenv('ACYL_POLYTOPE_2355')
        return cls(
            isometry_bound=_int_env('ACYL_ISOMETRY_BOUND', 4, minimum=1),
            represent_bound=_int_env('ACYL_REPRESENT_BOUND', 8, minimum=0),
            workers=_int_env('ACYL_WORKERS', 1, minimum=1),
            log_level=os.getenv('ACYL_LOG_LEVEL', 'WARNING').upper(),
            data_dir=data_dir,
            polytope_2355=Path(p2355) if p2355 else None,
        )

    def with_overrides(self, **changes) -> "Settings":
        """Copy with the non-None keyword overrides applied"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def data_path(self, name: str) -> Path:
        return self.data_dir / name


_settings: Optional[Settings] = None


def get_settings(reload: bool = False) -> Settings:
    global _settings
    if _settings is None or reload:
        _settings = Settings.from_env()
    return _settings
