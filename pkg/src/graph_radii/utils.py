import os
import tempfile
from pathlib import Path

import numpy as np


def derive_seed(*entropy: int) -> int:
    """Derives an independent 32-bit seed from a tuple of integers (e.g. run seed and epoch counter).

    Args:
        entropy: non-negative integers

    Returns:
        a seed that is a deterministic function of `entropy`
    """
    return int(np.random.SeedSequence([int(e) for e in entropy]).generate_state(1)[0])


def atomic_write_text(path: Path,
                      text: str) -> Path:
    """Writes text to a file through a temporary sibling file renamed over the target.

    Args:
        path: destination file
        text: file content

    Returns:
        the destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, mode='w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp_name, str(path))
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    return path


def format_float(value: float) -> str:
    """Formats a float with enough digits to be stable across runs and readable in CSV files."""
    return f'{value:.10g}'


def is_almost_equal(actual: any([int, float, tuple, list]),
                    desired: any([int, float, tuple, list]),
                    decimal: int = 7) -> bool:
    """Checks whether two items are equal up to desired precision.

    Args:
        actual: The object to check
        desired: The expected object
        decimal: Desired precision

    Notes:
        The test verifies that the elements of ``actual`` and ``desired`` satisfy
            ``abs(desired-actual) <= 1.5 * 10**(-decimal)``
    """
    actual = np.asarray(actual, dtype=float)
    desired = np.asarray(desired, dtype=float)
    if actual.shape != desired.shape:
        return False
    return bool(np.all(np.abs(desired - actual) <= 1.5 * 10.0 ** (-decimal)))


def assert_trend(values: list, expected_trend: str) -> None or AssertionError:
    """Asserts that a vector of values follows a given trend.

    Args:
        values: values whose trend is to be checked
        expected_trend: one of '+' (non-decreasing), '-' (non-increasing), '+-' (non-monotonic)
    """
    if expected_trend == '+':
        assert all([x <= y for x, y in zip(values, values[1:])])
    elif expected_trend == '-':
        assert all([x >= y for x, y in zip(values, values[1:])])
    elif expected_trend == '+-':
        assert (not all([x <= y for x, y in zip(values, values[1:])]) and
                not all([x >= y for x, y in zip(values, values[1:])]))
    else:
        raise ValueError(f'Unknown trend: {expected_trend}.')
