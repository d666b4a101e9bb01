"""Sign-log scalars for magnitudes far outside double range.

Deep iterates of half-plane maps grow like towers: the real part of the
n-th iterate exceeds exp(previous/15), so after two steps raw values
overflow IEEE doubles.  Every estimate downstream only ever consumes such
quantities through logarithms, ratios and comparisons, so we store a
number as a sign together with the natural log of its magnitude:

    x  =  sign * exp(lg),     sign in {-1, 0, +1},  lg a finite double.

This covers magnitudes from exp(-1.7e308) up to exp(1.7e308), enough for
three or four generations of the construction.  `exp()` raises once even
the log leaves double range; callers treat that as the depth cap.

Multiplication, division and powers are exact in `lg`.  Addition uses
log1p/exp with absorption: adding a term more than ~745 e-folds smaller
is a no-op, and cancellation of nearly equal terms loses relative
precision exactly as ordinary floating point does.
"""

import math

__all__ = ["Xf", "xf", "xsum", "xmax", "xmin"]

_ABSORB = -745.0  # exp() underflows to 0.0 below this


class Xf:
    __slots__ = ("s", "lg")

    def __init__(self, sign, lg):
        if sign == 0 or lg == -math.inf:
            self.s = 0
            self.lg = -math.inf
        else:
            if not math.isfinite(lg):
                raise OverflowError("log-magnitude left double range")
            self.s = 1 if sign > 0 else -1
            self.lg = float(lg)

    # -- construction ------------------------------------------------

    @staticmethod
    def from_float(v):
        if v != v:
            raise ValueError("nan has no sign-log form")
        if v == 0.0:
            return Xf(0, -math.inf)
        return Xf(1 if v > 0 else -1, math.log(abs(v)))

    @staticmethod
    def from_log(lg, sign=1):
        """Number whose magnitude is exp(lg)."""
        return Xf(sign, lg)

    # -- conversions ---------------------------------------------------

    def __float__(self):
        """Saturating conversion: overflow gives +-inf, underflow 0.0."""
        if self.s == 0:
            return 0.0
        if self.lg > 709.78:
            return math.inf * self.s
        if self.lg < _ABSORB:
            return 0.0
        return self.s * math.exp(self.lg)

    def log(self):
        """Natural log, as another Xf.  Requires a positive value."""
        if self.s <= 0:
            raise ValueError("log of non-positive Xf")
        return Xf.from_float(self.lg)

    def exp(self):
        """exp(self) as an Xf; raises OverflowError past the depth cap."""
        if self.s == 0:
            return Xf(1, 0.0)
        v = float(self)
        if math.isinf(v):
            raise OverflowError("exp() of Xf exceeds sign-log range")
        return Xf(1, v)

    # -- arithmetic ----------------------------------------------------

    def __neg__(self):
        return Xf(-self.s, self.lg)

    def __abs__(self):
        return Xf(abs(self.s), self.lg)

    def __mul__(self, other):
        o = _coerce(other)
        if self.s == 0 or o.s == 0:
            return Xf(0, -math.inf)
        return Xf(self.s * o.s, self.lg + o.lg)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o.s == 0:
            raise ZeroDivisionError("Xf division by zero")
        if self.s == 0:
            return Xf(0, -math.inf)
        return Xf(self.s * o.s, self.lg - o.lg)

    def __rtruediv__(self, other):
        return _coerce(other).__truediv__(self)

    def __add__(self, other):
        o = _coerce(other)
        if self.s == 0:
            return o
        if o.s == 0:
            return self
        hi, lo = (self, o) if self.lg >= o.lg else (o, self)
        d = lo.lg - hi.lg  # <= 0
        if d < _ABSORB:
            return Xf(hi.s, hi.lg)
        if hi.s == lo.s:
            return Xf(hi.s, hi.lg + math.log1p(math.exp(d)))
        if d == 0.0:
            return Xf(0, -math.inf)
        return Xf(hi.s, hi.lg + math.log1p(-math.exp(d)))

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other).__add__(-self)

    def powf(self, a):
        """self**a for float a; positive base only."""
        if self.s == 0:
            if a <= 0:
                raise ZeroDivisionError("0**nonpositive")
            return Xf(0, -math.inf)
        if self.s < 0:
            raise ValueError("powf of negative base")
        return Xf(1, self.lg * a)

    # -- comparisons -----------------------------------------------------

    def __lt__(self, other):
        o = _coerce(other)
        if self.s != o.s:
            return self.s < o.s
        if self.s == 0:
            return False
        return self.s * self.lg < o.s * o.lg

    def __le__(self, other):
        return not _coerce(other).__lt__(self)

    def __gt__(self, other):
        return _coerce(other).__lt__(self)

    def __ge__(self, other):
        return not self.__lt__(_coerce(other))

    def __eq__(self, other):
        try:
            o = _coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.s == o.s and (self.s == 0 or self.lg == o.lg)

    def __hash__(self):
        return hash((self.s, self.lg))

    # -- misc -----------------------------------------------------------

    def is_zero(self):
        return self.s == 0

    def sign(self):
        return self.s

    def __repr__(self):
        return f"Xf({self:s})"

    def __format__(self, spec):
        del spec
        if self.s == 0:
            return "0"
        if -700 < self.lg < 700:
            return repr(float(self))
        pre = "-" if self.s < 0 else ""
        return f"{pre}exp({self.lg!r})"

    def text(self):
        """Round-trippable text form used in CSV/JSON output."""
        return format(self, "s")


def _coerce(v):
    if isinstance(v, Xf):
        return v
    if isinstance(v, (int, float)):
        return Xf.from_float(float(v))
    raise TypeError(f"cannot mix Xf with {type(v).__name__}")


def xf(v):
    """Shorthand constructor from a float/int or pass-through for Xf."""
    return _coerce(v)


def xsum(items):
    """Sum of Xf values; folds largest-magnitude first for stability."""
    vals = [_coerce(v) for v in items if _coerce(v).s != 0]
    if not vals:
        return Xf(0, -math.inf)
    vals.sort(key=lambda v: v.lg, reverse=True)
    acc = vals[0]
    for v in vals[1:]:
        acc = acc + v
    return acc


def xmax(items):
    best = None
    for v in items:
        v = _coerce(v)
        if best is None or v > best:
            best = v
    if best is None:
        raise ValueError("xmax of empty iterable")
    return best


def xmin(items):
    best = None
    for v in items:
        v = _coerce(v)
        if best is None or v < best:
            best = v
    if best is None:
        raise ValueError("xmin of empty iterable")
    return best
