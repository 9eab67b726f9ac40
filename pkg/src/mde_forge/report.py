"""Check records and JSON/CSV rendering.

Every number leaves the package as a decimal string at a fixed digit count so
reports are diff-stable; exact rationals are written as "p/q".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from mpmath import mp, mpc, mpf

SCHEMA_VERSION = "1"
DEFAULT_DIGITS = 30
# wide enough that comparisons never round away working-precision errors
_WORK_BITS = 2048


def frac_str(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def dec(x, digits: int = DEFAULT_DIGITS) -> str:
    with mp.workprec(_WORK_BITS):
        return mp.nstr(mpf(x), digits)


def to_jsonable(value: Any, digits: int = DEFAULT_DIGITS):
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, Fraction):
        return frac_str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        value = mpc(value)
    if isinstance(value, mpc):
        if value.imag == 0:
            return dec(value.real, digits)
        return {"re": dec(value.real, digits), "im": dec(value.imag, digits)}
    if isinstance(value, mpf):
        return dec(value, digits)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v, digits) for v in value]
    if hasattr(value, "to_strings"):
        return value.to_strings()
    return str(value)


@dataclass
class Check:
    name: str
    target: Any
    value: Any
    abs_error: Any
    tolerance: Any
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self, digits: int = DEFAULT_DIGITS) -> dict:
        out = {
            "name": self.name,
            "target": to_jsonable(self.target, digits),
            "value": to_jsonable(self.value, digits),
            "abs_error": to_jsonable(self.abs_error, digits),
            "tolerance": to_jsonable(self.tolerance, digits),
            "pass": bool(self.passed),
        }
        if self.detail:
            out["detail"] = to_jsonable(self.detail, digits)
        return out


def numeric_check(name, target, value, tolerance, detail=None, relative_to=None) -> Check:
    """|value - target| (optionally divided by |relative_to|) < tolerance."""
    with mp.workprec(_WORK_BITS):
        err = abs(mpc(value) - mpc(target))
        if relative_to is not None:
            err = err / abs(mpc(relative_to))
    return Check(name, target, value, err, tolerance, bool(err < tolerance), detail or {})


def bound_check(name, value, bound, detail=None, above=False) -> Check:
    """value < bound (or value > bound with ``above``)."""
    with mp.workprec(_WORK_BITS):
        v = abs(mpc(value))
    ok = v > bound if above else v < bound
    return Check(name, f"> {bound}" if above else f"< {bound}", v, v if not above else 0, bound, bool(ok), detail or {})


def exact_check(name, ok: bool, detail=None, value=None) -> Check:
    return Check(name, "exact", value if value is not None else ok, 0 if ok else 1, 0, bool(ok), detail or {})


def render_report(suite: str, checks: list, extra: dict | None = None, digits: int = DEFAULT_DIGITS) -> str:
    checks = sorted(checks, key=lambda c: c.name)
    payload = {
        "schema": SCHEMA_VERSION,
        "suite": suite,
        "passed": all(c.passed for c in checks),
        "n_checks": len(checks),
        "n_failed": sum(1 for c in checks if not c.passed),
        "checks": [c.as_dict(digits) for c in checks],
    }
    if extra:
        payload.update(to_jsonable(extra, digits))
    return json.dumps(payload, indent=2, sort_keys=False)
