"""Access to the data files bundled with the package."""

from __future__ import annotations

import re
from importlib.resources import as_file, files
from pathlib import Path

from .brat import load_tag_map
from .lexicon import Lexicon, load_lexicon
from .notes import load_abbreviations, load_template_patterns


def data_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    resource = files("ssikit").joinpath("data", name)
    with as_file(resource) as path:
        return Path(path)


def default_lexicon() -> Lexicon:
    return load_lexicon(data_path("starter_lexicon.tsv"), data_path("exclusion_terms.txt"))


def default_template_patterns() -> list[re.Pattern]:
    return load_template_patterns(data_path("template_patterns.txt"))


def default_abbreviations() -> tuple[str, ...]:
    return load_abbreviations(data_path("abbreviations.txt"))


def default_tag_map():
    return load_tag_map(data_path("brat_tag_map.tsv"))
