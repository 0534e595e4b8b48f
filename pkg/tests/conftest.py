from __future__ import annotations


import pytest
from hypothesis import HealthCheck, settings

from qtsp.graph import M_STAR, serialize_matrix

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")



@pytest.fixture
def m_star():
    return M_STAR


@pytest.fixture
def m_star_text():
    return serialize_matrix(M_STAR)


@pytest.fixture
def app_factory():
    from qtsp.service import ServiceSettings, create_app

    def make(seed: int | None = None, **kw):
        return create_app(ServiceSettings(seed=seed, **kw))

    return make


@pytest.fixture
def client(app_factory):
    from fastapi.testclient import TestClient

    with TestClient(app_factory()) as c:
        yield c


def post_matrix(client, endpoint: str, text: str, **params):
    return client.post(
        f"/tsp/{endpoint}",
        params=params,
        files={"matrix": ("m.txt", text.encode(), "text/plain")},
    )


# criterion number -> (title, "PASS"/"FAIL", seconds); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, verdict, secs = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {verdict}  {title} ({secs:.2f}s)")
