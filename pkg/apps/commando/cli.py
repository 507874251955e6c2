"""In-process entry point for the ``lab`` management command."""

import sys
from collections.abc import Sequence
from typing import TextIO

from django.core.management import call_command
from django.core.management.base import CommandError


def run(
    argv: Sequence[str],
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    """Run ``lab`` with ``argv`` and return its exit code.

    Failures are reported as one diagnostic line on ``stderr``.

    Returns:
        int: 0 on success, 1 on input error, 2 on numerical
            non-convergence, 3 on self-test failure
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        call_command("lab", *argv, stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f"lab: {exc}\n")
        return exc.returncode
    return 0

