import pytest

from lebvp import Equation1

FIG_BETA = {3: -25 / 12, 4: -29 / 12, 5: -31 / 12}
U0 = 0.25 ** (1 / 6)


def figure_equation(fig: int) -> Equation1:
    return Equation1(2.0, FIG_BETA[fig], 0.25, 1.0, 7)


@pytest.fixture
def fig3():
    return figure_equation(3)


@pytest.fixture
def fig4():
    return figure_equation(4)


@pytest.fixture
def fig5():
    return figure_equation(5)


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)``; summarised at the end of the run."""

    def record(n: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE[n] = (bool(ok), detail)
        print(f"acceptance {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
