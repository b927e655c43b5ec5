import pytest

from hololine.geometry import SystemGeometry

# criterion number -> (title, passed, detail lines); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def small_geom():
    """Short segments (16 wavelengths) at half-wavelength spacing: N = n = 32."""
    return SystemGeometry(L_s=0.16, L_r=0.16, d=1.0, wavelength=0.01, delta_s=0.005, delta_r=0.005)


@pytest.fixture
def criterion():
    """Collect named sub-checks for one acceptance criterion.

    Usage: ``c = criterion(3, "title")``, then ``c.check(name, ok, detail)``
    for each part and finally ``c.done()``, which asserts all parts.
    """
    made = []

    def make(number, title):
        c = _Criterion(number, title)
        made.append(c)
        return c

    yield make
    for c in made:
        if not c.finished:
            c.done(raise_on_fail=False)


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.parts = []
        self.finished = False

    def check(self, name, ok, detail=""):
        self.parts.append((name, bool(ok), detail))
        return ok

    def done(self, raise_on_fail=True):
        self.finished = True
        passed = bool(self.parts) and all(ok for _, ok, _ in self.parts)
        lines = [f"{'ok  ' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in self.parts]
        ACCEPTANCE[self.number] = (self.title, passed, lines)
        if raise_on_fail:
            failed = [ln for ln in lines if ln.startswith("FAIL")]
            assert passed, "\n".join(failed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, lines = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {title}")
        for ln in lines:
            tr.write_line(f"      {ln}")
