import shutil
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def workspace(tmp_path):
    """Copy of the committed fixture corpus with a relative-path run config.

    Everything the pipeline needs (benchmark, transcripts, parses, config)
    lands under one temporary directory, so runs write their out/ and cache/
    there and artifact bytes contain no absolute paths.
    """
    for sub in ("benchmark", "transcripts", "parses"):
        shutil.copytree(DATA / sub, tmp_path / sub)
    shutil.copy(DATA / "run_config.yaml", tmp_path / "run_config.yaml")
    return tmp_path
