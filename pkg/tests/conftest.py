import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")
    config._criteria = []


@pytest.fixture
def detail(request):
    """Attach a measured-values note to the acceptance summary line."""
    def note(text):
        request.node.user_properties.append(("detail", text))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        notes = [v for k, v in item.user_properties if k == "detail"]
        if report.skipped:
            notes.append(str(report.longrepr[-1]) if isinstance(report.longrepr, tuple) else "")
        item.config._criteria.append((marker.args[0], marker.args[1], report.outcome, "; ".join(notes)))


def pytest_terminal_summary(terminalreporter, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    grouped = {}
    for number, text, outcome, note in rows:
        entry = grouped.setdefault(number, [text, [], []])
        entry[1].append(outcome)
        if note:
            entry[2].append(note)
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(grouped):
        text, outcomes, notes = grouped[number]
        if "failed" in outcomes:
            label = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            label = "SKIP"
        else:
            label = "PASS"
        line = f"{label:4}  {number:>2}. {text}"
        if len(outcomes) > 1:
            line += f"  ({outcomes.count('passed')}/{len(outcomes)} checks passed)"
        if notes:
            line += f"  [{'; '.join(notes)}]"
        terminalreporter.write_line(line)
