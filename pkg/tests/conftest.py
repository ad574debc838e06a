import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

# simulation tests share the box with numba-compiled ensembles; wall-clock
# deadlines are meaningless there
settings.register_profile("brwss", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("brwss")

_acceptance_results = []


def record_acceptance(number, description, passed, detail=""):
    _acceptance_results.append((number, description, passed, detail))


def pytest_sessionfinish(session, exitstatus):
    if not _acceptance_results:
        return
    tr = session.config.pluginmanager.get_plugin("terminalreporter")
    write = tr.write_line if tr is not None else print
    write("")
    write("=" * 30 + " acceptance criteria " + "=" * 30)
    for number, description, passed, detail in sorted(_acceptance_results):
        status = "PASS" if passed else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        write(f"ACCEPTANCE {number:>2}: {status} - {description}{suffix}")
