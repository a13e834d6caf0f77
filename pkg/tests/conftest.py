import textwrap

import pytest

from wagegap.microdata import ColumnSchema

EDU_MAP = {"01": "not_literate", "06": "primary", "07": "middle", "12": "graduate"}


@pytest.fixture
def basic_schema():
    return [
        ColumnSchema("wage", "outcome_weekly_wage"),
        ColumnSchema("fd", "full_days"),
        ColumnSchema("hd", "half_days"),
        ColumnSchema("age", "age"),
    ]


@pytest.fixture
def survey_schema():
    return [
        ColumnSchema("wage", "outcome_weekly_wage"),
        ColumnSchema("fd", "full_days"),
        ColumnSchema("hd", "half_days"),
        ColumnSchema("age", "age"),
        ColumnSchema("edu", "categorical", EDU_MAP, "not_literate"),
        ColumnSchema("sex", "categorical", {"1": "male", "2": "female"}, "female"),
        ColumnSchema("public", "binary"),
        ColumnSchema("caste", "group_label", {"1": "ST", "2": "SC", "3": "OBC", "9": "Others"}),
        ColumnSchema("wt", "weight"),
    ]


def csv_bytes(text: str) -> bytes:
    return textwrap.dedent(text).lstrip("\n").encode("utf-8")


@pytest.fixture
def survey_bytes():
    return csv_bytes(
        """
        wage,fd,hd,age,edu,sex,public,caste,wt
        700,7,0,25,06,1,0,1,1.0
        600,4,4,30,12,2,1,2,2.0
        450,3,0,14,01,1,0,3,1.0
        0,0,0,40,07,2,0,9,1.0
        900,6,0,61,12,1,1,9,1.5
        350,5,0,45,07,2,0,9,1.0
        """
    )


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request, capsys):
    """Record one acceptance line: ``criterion(number, ok, text)``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, text: str) -> bool:
        line = f"AC{number:<2} {'PASS' if ok else 'FAIL'}  {text}"
        lines.append((number, line))
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
