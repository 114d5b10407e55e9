"""Unit-suffixed quantity parsing for the command line.

Everything inside the library is SI (bits, J, W, Hz, linear gain). Suffixes are
converted here, once. Data sizes use decimal multiples and 8 bits per byte,
so ``50kB`` is 400000 bits. ``dB`` values become linear ``10 ** (dB / 10)``.
"""

import re
from decimal import Decimal, InvalidOperation, localcontext

_NUMBER = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-z/]*)\s*$")

UNITS = {
    "gain": {"": 1, "dB": None},
    "data": {"": 1, "bit": 1, "bits": 1, "kbit": 1000, "kbits": 1000, "kB": 8000, "MB": 8_000_000},
    "energy": {"": 1, "J": 1, "mJ": Decimal("1e-3"), "uJ": Decimal("1e-6")},
    "frequency": {"": 1, "Hz": 1, "kHz": 1000, "MHz": 1_000_000},
    "power": {"": 1, "W": 1, "mW": Decimal("1e-3")},
    "density": {"": 1, "W/Hz": 1},
    "time": {"": 1, "s": 1, "ms": Decimal("1e-3")},
}

SI_UNIT = {
    "gain": "",
    "data": "bits",
    "energy": "J",
    "frequency": "Hz",
    "power": "W",
    "density": "W/Hz",
    "time": "s",
}


class UnitError(ValueError):
    pass


def parse_quantity(text, kind):
    """Parse ``text`` such as ``"80mJ"`` or ``"-10dB"`` into an SI float.

    >>> parse_quantity("50kB", "data")
    400000.0
    >>> parse_quantity("-10dB", "gain")
    0.1
    """
    table = UNITS[kind]
    match = _QUANTITY.match(str(text))
    if not match:
        raise UnitError(f"cannot parse {text!r} as a {kind} quantity")
    number, suffix = match.groups()
    if suffix not in table:
        allowed = ", ".join(s for s in table if s) or "none"
        raise UnitError(f"unit {suffix!r} not accepted for {kind} (allowed: {allowed})")
    try:
        value = Decimal(number)
    except InvalidOperation as exc:  # pragma: no cover - regex guards this
        raise UnitError(str(exc)) from None
    with localcontext() as ctx:
        ctx.prec = 40
        if table[suffix] is None:
            return float(Decimal(10) ** (value / 10))
        return float(value * table[suffix])


def parse_db(text):
    """Parse a decibel number, with or without the ``dB`` suffix, returning dB (not linear)."""
    match = _QUANTITY.match(str(text))
    if not match or match.group(2) not in ("", "dB"):
        raise UnitError(f"cannot parse {text!r} as a dB value")
    return float(match.group(1))


def db_to_linear(db):
    with localcontext() as ctx:
        ctx.prec = 40
        return float(Decimal(10) ** (Decimal(repr(float(db))) / 10))


def format_si(value, kind):
    """Render an SI value with 17 significant digits and its unit."""
    unit = SI_UNIT[kind]
    text = f"{value:.17g}"
    return f"{text} {unit}" if unit else text
