"""Run configuration: defaults, JSON config files, and flag overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .classify import Category, DEFAULT_KEYWORD_STEMS, compile_keyword_patterns
from .organs import (
    DEFAULT_MISSING_SYMBOL_THRESHOLD,
    FileClassSets,
)


@dataclass
class RunConfig:
    """Everything a run can tune; flags win over config-file values."""

    cutoff: str | None = None  # ISO date (YYYY-MM-DD); the whole day is included
    all_branches: bool = False
    whole_message: bool = False
    keyword_stems: dict[str, list[str]] | None = None  # category value -> stems
    media_extensions: list[str] | None = None
    config_filenames: list[str] | None = None
    config_extensions: list[str] | None = None
    readme_stems: list[str] = field(default_factory=lambda: ["readme"])
    missing_symbol_threshold: int = DEFAULT_MISSING_SYMBOL_THRESHOLD
    test_timeout: float = 300.0
    source_ext: str = ".mini"

    def validate(self) -> None:
        if self.missing_symbol_threshold < 0:
            raise ValueError("missing_symbol_threshold must be non-negative")
        if self.test_timeout <= 0:
            raise ValueError("test_timeout must be positive")
        if self.keyword_stems is not None:
            required = {c.value for c in Category if c is not Category.OTHER}
            missing = required - set(self.keyword_stems)
            if missing:
                raise ValueError(
                    f"keyword_stems must cover all keyword categories; missing: {sorted(missing)}"
                )
            for category, stems in self.keyword_stems.items():
                if not stems:
                    raise ValueError(f"keyword_stems[{category}] is empty")

    def patterns(self):
        """Compiled keyword patterns honoring any stem overrides."""
        if self.keyword_stems is None:
            return compile_keyword_patterns()
        stems = {Category(name): tuple(words) for name, words in self.keyword_stems.items()}
        return compile_keyword_patterns(stems)

    def file_classes(self) -> FileClassSets:
        kwargs = {}
        if self.media_extensions is not None:
            kwargs["media_extensions"] = frozenset(e.lower() for e in self.media_extensions)
        if self.config_filenames is not None:
            kwargs["config_filenames"] = frozenset(n.lower() for n in self.config_filenames)
        if self.config_extensions is not None:
            kwargs["config_extensions"] = frozenset(e.lower() for e in self.config_extensions)
        return FileClassSets(**kwargs)


def load_config(path: str | Path | None) -> RunConfig:
    """RunConfig from a JSON file; defaults when no path is given."""
    config = RunConfig()
    if path is None:
        config.validate()
        return config
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    config = replace(config, **data)
    config.validate()
    return config


def apply_flag_overrides(config: RunConfig, **overrides) -> RunConfig:
    """New config with every non-None override applied."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    merged = replace(config, **updates)
    merged.validate()
    return merged
