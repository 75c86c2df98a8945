import threading

from steerable_epca.helper.threads import THREADS_ENV, map_on_threads, resolve_thread_count
from steerable_epca.settings import Settings


def test_thread_count_precedence(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_thread_count(5) == 5
    assert resolve_thread_count() == 3
    monkeypatch.setenv(THREADS_ENV, "many")
    assert resolve_thread_count() >= 1


def test_map_keeps_the_input_order():
    assert map_on_threads(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]
    assert map_on_threads(lambda x: x, [], threads=4) == []


def test_single_thread_runs_inline():
    idents = map_on_threads(lambda _: threading.get_ident(), range(5), threads=1)
    assert set(idents) == {threading.get_ident()}


def test_settings_from_cli():
    settings = Settings({"Verbose": True, "Threads": 2, "Seed": 11, "LogFile": None})
    assert settings.dev
    assert settings.threads == 2
    assert settings.seed == 11
