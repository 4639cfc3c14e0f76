"""Collects one pass/fail line per acceptance criterion."""

LINES = []


def record(number, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    LINES.append(line)
    print(line, flush=True)
    return passed
