import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_study import StudyFixture, build_study_fixture  # noqa: E402


@pytest.fixture(scope="session")
def study() -> StudyFixture:
    return build_study_fixture()
