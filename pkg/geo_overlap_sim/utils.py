from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import List, Union
import codecs
import re

import numpy as np

from .exceptions import ParseError, WorkloadError

Number = Union[int, float, Decimal, Fraction]

PS_PER_SECOND = 10**12
U64_MAX = 2**64 - 1


def is_valid_file_path(path: Union[str, Path]) -> bool:
    """Check if a given path is a valid file path."""
    try:
        return Path(path).exists() and Path(path).is_file()
    except Exception:
        return False


def load_text(file_path: Union[str, Path]) -> str:
    """
    Read a UTF-8 document, dropping a leading byte-order mark.

    Raises:
        ParseError: if the bytes are not valid UTF-8
        OSError: if the file cannot be read
    """
    with open(file_path, "rb") as f:
        data = f.read()
    start = len(codecs.BOM_UTF8) if data.startswith(codecs.BOM_UTF8) else 0
    try:
        text = data[start:].decode("utf-8")
    except UnicodeDecodeError as e:
        offset = start + e.start
        line = data.count(b"\n", 0, offset) + 1
        column = offset - data.rfind(b"\n", 0, offset)
        raise ParseError(f"{file_path} is not valid UTF-8: {e.reason}", line, column)
    return text.replace("\r\n", "\n").replace("\r", "\n")


def to_fraction(value: Number) -> Fraction:
    """Exact rational view of a number; floats keep their binary value."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def ceil_div(numerator: int, denominator: int) -> int:
    return -(-numerator // denominator)


def seconds_to_ps(seconds: Number, quantum_ps: int = 1) -> int:
    """
    Convert a duration to integer picoseconds, rounded up to a multiple of
    the time quantum.

    Raises:
        WorkloadError: if the result does not fit an unsigned 64-bit counter
    """
    if quantum_ps < 1:
        raise ValueError(f"quantum_ps must be >= 1, got {quantum_ps}")
    exact = to_fraction(seconds) * PS_PER_SECOND
    if exact < 0:
        raise ValueError(f"negative duration: {seconds}")
    quanta = ceil_div(exact.numerator, exact.denominator * quantum_ps)
    ps = quanta * quantum_ps
    if ps > U64_MAX:
        raise WorkloadError(f"duration {seconds} s overflows the 64-bit picosecond counter")
    return ps


def ps_to_seconds(ps: int) -> float:
    return ps / PS_PER_SECOND


def parse_decimal(text: str) -> Decimal:
    """Parse a plain decimal literal, rejecting NaN and infinities."""
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}")
    if not value.is_finite():
        raise ValueError(f"not a finite number: {text!r}")
    return value


def scaled_float(text: str, scale: Union[int, Decimal]) -> float:
    """Decimal literal times an exact power-of-ten unit scale, as a float."""
    return float(parse_decimal(text) * scale)


def unscaled_text(value: float, scale: Union[int, Decimal]) -> str:
    """Inverse of scaled_float: renders value / scale exactly."""
    exact = Decimal(repr(float(value))) / scale
    text = format(exact.normalize(), "f")
    return text


def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def geometric_range(lo: float, hi: float, steps: int) -> List[float]:
    """``steps`` geometrically spaced points from lo to hi, both ends exact."""
    if steps < 2:
        raise ValueError(f"a range needs at least 2 steps, got {steps}")
    if not 0 < lo < hi:
        raise ValueError(f"range bounds must satisfy 0 < lo < hi, got {lo}:{hi}")
    points = [float(p) for p in np.geomspace(lo, hi, steps)]
    points[0], points[-1] = float(lo), float(hi)
    return points
