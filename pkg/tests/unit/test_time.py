"""Time class unit tests"""

from __future__ import annotations

import datetime

import pytest
from pytest_mock import MockerFixture

from dynsketch.util import Time


def test_timestamp_delta_basic() -> None:
    """Time delta returned for integer seconds under 1 day"""
    time_delta = Time.timestamp_delta(12345)
    assert str(time_delta) == "3:25:45"


@pytest.mark.parametrize(
    "timestamp_delta, expected",
    [(1234567890, "14288 days, 23:31:30"), (2.71828, "0:00:02.718000")],
)
def test_timestamp_delta_arbitrary(timestamp_delta: int | float, expected: str) -> None:
    """Time delta is rounded to milliseconds"""
    assert str(Time.timestamp_delta(timestamp_delta)) == expected


def test_elapsed_since(mocker: MockerFixture) -> None:
    """Elapsed time is measured on the monotonic clock"""
    mocker.patch("time.monotonic", side_effect=[100.0, 101.5])
    start = Time.now()
    assert Time.elapsed_since(start) == datetime.timedelta(seconds=1.5)
