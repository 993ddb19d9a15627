"""Collects one summary line per acceptance criterion for the terminal report."""

LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line
