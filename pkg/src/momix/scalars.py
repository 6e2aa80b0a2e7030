"""Exact coefficient fields: the rationals and real quadratic extensions.

Scalars are plain ``fractions.Fraction`` over the rationals, and ``Quad``
instances (pairs a + b*sqrt(d)) over a quadratic field.  All arithmetic is
exact; the quadratic fields used here have d > 0, so they carry a total
order via the real embedding with sqrt(d) > 0 (used only to normalize
signs deterministically).

Text format for scalars, as used inside polynomial strings:
rational "3", "-1/2"; quadratic "(1+2r)", "(-1/2+r)", "(2r)" with r the
square root of the field discriminant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError

_SQUAREFREE_OK = 10**6


def _is_squarefree(d: int) -> bool:
    if d <= 1:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


class Quad:
    """Element a + b*sqrt(d) of a fixed real quadratic field."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=2):
        self.a = a if type(a) is Fraction else Fraction(a)
        self.b = b if type(b) is Fraction else Fraction(b)
        self.d = d

    def _coerce(self, other):
        if isinstance(other, Quad):
            if other.d != self.d:
                raise ValidationError("mixed quadratic discriminants %s, %s" % (self.d, other.d))
            return other
        if isinstance(other, (int, Fraction)):
            return Quad(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad(self.a * o.a + self.d * self.b * o.b,
                    self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def inverse(self):
        n = self.a * self.a - self.d * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return Quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def is_positive(self) -> bool:
        """Positivity in the real embedding with sqrt(d) > 0."""
        a, b = self.a, self.b
        if b == 0:
            return a > 0
        if a == 0:
            return b > 0
        if a > 0 and b > 0:
            return True
        if a < 0 and b < 0:
            return False
        # opposite signs: compare a^2 with d b^2
        if a > 0:
            return a * a > self.d * b * b
        return a * a < self.d * b * b

    def __repr__(self):
        return "Quad(%s, %s, d=%s)" % (self.a, self.b, self.d)


@dataclass(frozen=True)
class Field:
    """Descriptor of the coefficient field; also a scalar factory."""

    kind: str = "rational"
    d: int | None = None

    def __post_init__(self):
        if self.kind == "rational":
            if self.d is not None:
                raise ValidationError("rational field takes no discriminant")
        elif self.kind == "quadratic":
            if not isinstance(self.d, int) or not _is_squarefree(self.d):
                raise ValidationError("quadratic field needs a square-free d >= 2, got %r" % (self.d,))
        else:
            raise ValidationError("unknown field kind %r" % (self.kind,))

    @property
    def zero(self):
        return Fraction(0) if self.kind == "rational" else Quad(0, 0, self.d)

    @property
    def one(self):
        return Fraction(1) if self.kind == "rational" else Quad(1, 0, self.d)

    def of(self, x):
        """Coerce an int/Fraction/Quad into this field."""
        if self.kind == "rational":
            if isinstance(x, Quad):
                if x.b != 0:
                    raise ValidationError("quadratic scalar in rational field")
                return x.a
            return Fraction(x)
        if isinstance(x, Quad):
            if x.d != self.d:
                raise ValidationError("wrong discriminant")
            return x
        return Quad(x, 0, self.d)

    def sqrt_gen(self):
        if self.kind != "quadratic":
            raise ValidationError("sqrt generator only exists in quadratic fields")
        return Quad(0, 1, self.d)

    def is_positive(self, s) -> bool:
        if isinstance(s, Quad):
            return s.is_positive()
        return s > 0

    # -- text format ---------------------------------------------------

    def fmt(self, s) -> str:
        s = self.of(s)
        if self.kind == "rational" or s.b == 0:
            a = s if self.kind == "rational" else s.a
            return str(a)
        parts = ""
        if s.a != 0:
            parts += str(s.a)
        if s.b == 1:
            bp = "r"
        elif s.b == -1:
            bp = "-r"
        else:
            bp = "%sr" % s.b
        if parts and not bp.startswith("-"):
            parts += "+"
        return "(%s%s)" % (parts, bp)

    def parse(self, text: str):
        text = text.strip()
        if text.startswith("(") and text.endswith(")"):
            if self.kind != "quadratic":
                raise ValidationError("quadratic scalar %r in rational field" % text)
            return self._parse_quad(text[1:-1])
        try:
            return self.of(Fraction(text))
        except (ValueError, ZeroDivisionError):
            raise ValidationError("bad scalar %r" % text)

    def _parse_quad(self, body: str):
        a = Fraction(0)
        b = Fraction(0)
        for term in re.findall(r"[+-]?[^+-]+", body.replace(" ", "")):
            if term.endswith("r"):
                coef = term[:-1]
                if coef in ("", "+"):
                    b += 1
                elif coef == "-":
                    b -= 1
                else:
                    b += Fraction(coef.rstrip("*"))
            else:
                a += Fraction(term)
        return Quad(a, b, self.d)

    def to_json(self):
        if self.kind == "rational":
            return {"kind": "rational"}
        return {"kind": "quadratic", "d": self.d}

    @staticmethod
    def from_json(obj) -> "Field":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError("bad field spec %r" % (obj,))
        if obj["kind"] == "rational":
            return Field("rational")
        return Field("quadratic", obj.get("d"))


QQ = Field("rational")
