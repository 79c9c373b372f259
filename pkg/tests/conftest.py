import time
from contextlib import contextmanager

ACCEPTANCE: list[dict] = []


class Record(dict):
    def within(self, budget_s: float):
        """Fail the criterion when it ran past its time budget."""
        self["budget"] = budget_s
        elapsed = time.perf_counter() - self["start"]
        assert elapsed < budget_s, f"took {elapsed:.1f} s, budget {budget_s} s"


@contextmanager
def criterion(number: int, title: str, start: float | None = None):
    rec = Record(n=number, title=title, detail="", ok=False, start=start or time.perf_counter())
    try:
        yield rec
        rec["ok"] = True
    except AssertionError as exc:
        if not rec["detail"]:
            rec["detail"] = str(exc).splitlines()[0]
        raise
    finally:
        rec["secs"] = time.perf_counter() - rec["start"]
        ACCEPTANCE.append(rec)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(ACCEPTANCE, key=lambda r: r["n"]):
        status = "PASS" if rec["ok"] else "FAIL"
        terminalreporter.write_line(
            f"[{status}] criterion {rec['n']:>2}: {rec['title']} ({rec['secs']:.1f} s) {rec['detail']}".rstrip()
        )
