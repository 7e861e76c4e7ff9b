"""Collects one result line per acceptance criterion for the terminal summary."""

RESULTS: dict[int, tuple[bool, str, str]] = {}


def record(number: int, title: str, passed: bool, detail: str) -> None:
    RESULTS[number] = (passed, title, detail)
    print(line(number))


def line(number: int) -> str:
    passed, title, detail = RESULTS[number]
    return f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} -- {detail}"
