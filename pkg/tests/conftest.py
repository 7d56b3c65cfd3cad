from __future__ import annotations

from pathlib import Path

import pytest

from cfl.dsl import parse_frame
from cfl.lexicon import load_lexicon

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "cfl" / "fixtures"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon([FIXTURES / "turkish.cfl"])


@pytest.fixture(scope="session")
def ambiguous_lexicon():
    return load_lexicon([FIXTURES / "turkish.cfl", FIXTURES / "ambiguity.cfl"])


def read_gold(path: Path) -> list[tuple[str, str, str]]:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            name, ids, stage = line.split("\t")
            rows.append((name, ids, stage))
    return rows


@pytest.fixture(scope="session")
def corpus(lexicon):
    """Every gold row as (name, parsed frame, expected ids, expected stage)."""
    frames_dir = FIXTURES / "frames"
    rows = []
    for name, ids, stage in read_gold(frames_dir / "gold.tsv"):
        text = (frames_dir / name).read_text(encoding="utf-8")
        rows.append((name, parse_frame(text, lexicon, source=name), ids, stage))
    return rows
