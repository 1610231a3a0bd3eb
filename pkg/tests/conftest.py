import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from util import toy_corpus  # noqa: E402


@pytest.fixture
def toy():
    return toy_corpus()
