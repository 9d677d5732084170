"""
Pytest configuration and shared fixtures: precision contexts and an API test client
"""
import pytest
from fastapi.testclient import TestClient

from core.precision import PrecisionContext
from core.settings import get_precision_context
from main import app


@pytest.fixture(scope="session")
def ctx():
    """The default 128-bit working context"""
    return PrecisionContext(128)


@pytest.fixture(scope="session")
def ctx256():
    """A 256-bit context for checks that need headroom"""
    return PrecisionContext(256)


@pytest.fixture
def test_client():
    """Create a test client whose precision dependency is pinned to 128 bits"""
    def override_get_precision_context():
        yield PrecisionContext(128)

    app.dependency_overrides[get_precision_context] = override_get_precision_context

    with TestClient(app) as client:
        yield client

    # Clean up dependency override
    app.dependency_overrides.clear()
