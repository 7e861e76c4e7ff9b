"""The three bound shapes ``ln n``, ``n`` and ``n ln n``."""

from __future__ import annotations

from enum import Enum
from fractions import Fraction

from .numeric import Fx, Interval, default_precision, ln_interval


class BoundShape(Enum):
    LOG_N = "logn"
    LINEAR = "n"
    N_LOG_N = "nlogn"

    @classmethod
    def parse(cls, text: str) -> "BoundShape":
        key = text.strip().lower().replace(" ", "").replace("*", "").replace("·", "")
        aliases = {
            "logn": cls.LOG_N, "lnn": cls.LOG_N, "lnm": cls.LOG_N, "logm": cls.LOG_N,
            "n": cls.LINEAR, "m": cls.LINEAR, "linear": cls.LINEAR,
            "nlogn": cls.N_LOG_N, "nlnn": cls.N_LOG_N, "mlnm": cls.N_LOG_N, "mlogm": cls.N_LOG_N,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown bound shape {text!r}") from None

    def label(self, var: str = "n") -> str:
        if self is BoundShape.LOG_N:
            return f"ln {var}"
        if self is BoundShape.LINEAR:
            return var
        return f"{var} ln {var}"

    @property
    def monomial(self) -> tuple[int, int]:
        """``(power of n, power of ln n)`` of the shape."""
        return {BoundShape.LOG_N: (0, 1), BoundShape.LINEAR: (1, 0), BoundShape.N_LOG_N: (1, 1)}[self]

    def interval(self, n: int, prec: int | None = None) -> Interval:
        power, logs = self.monomial
        value = Interval.point(Fraction(n) ** power)
        return value * ln_interval(n, prec) if logs else value

    def fx(self, n: int, prec: int | None = None) -> Fx:
        prec = default_precision() if prec is None else prec
        power, logs = self.monomial
        if not logs:
            return Fx.of(n, prec)
        return Fx.ln(n, prec) * (n if power else 1)


SHAPE_ORDER = (BoundShape.LOG_N, BoundShape.LINEAR, BoundShape.N_LOG_N)
