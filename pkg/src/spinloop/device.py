"""Device profiles: energy-scale curves A(s), B(s) and hardware limits.

Energies are stored in GHz with hbar = 1; the dynamics only ever consumes
beta * A and beta * B products, so the unit cancels against the temperature
parameter.  Real calibration tables can be loaded from CSV; a documented
synthetic profile ships with the package because only the qualitative curve
shapes are specified by the protocol.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import IO

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class DeviceProfile:
    """Energy curves tabulated against the anneal fraction s plus limits."""

    name: str
    table: np.ndarray  # columns: s, A(s) GHz, B(s) GHz
    h_gain_max: float
    max_hgain_points: int = 20
    max_anneal_points: int = 12
    min_anneal_time: float = 0.5  # microseconds
    time_resolution: float = 0.01  # microseconds

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2 or table.shape[1] != 3 or table.shape[0] < 2:
            raise ValidationError("schedule table needs >= 2 rows of (s, A, B)")
        s, a, b = table[:, 0], table[:, 1], table[:, 2]
        if np.any(np.diff(s) <= 0):
            raise ValidationError("table must be sorted strictly by s")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ValidationError("table must cover s=0 and s=1")
        if np.any(np.diff(a) > 0):
            raise ValidationError("A(s) must be non-increasing")
        if np.any(np.diff(b) < 0):
            raise ValidationError("B(s) must be non-decreasing")
        if np.any(a < 0) or np.any(b < 0):
            raise ValidationError("energies must be non-negative")
        if self.h_gain_max <= 0:
            raise ValidationError("h_gain_max must be positive")
        if self.time_resolution <= 0 or self.min_anneal_time <= 0:
            raise ValidationError("time limits must be positive")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def a_of_s(self, s):
        """Linear interpolation of A at anneal fraction s (scalar or array)."""
        self._check_range(s)
        return np.interp(s, self.table[:, 0], self.table[:, 1])

    def b_of_s(self, s):
        """Linear interpolation of B at anneal fraction s (scalar or array)."""
        self._check_range(s)
        return np.interp(s, self.table[:, 0], self.table[:, 2])

    @staticmethod
    def _check_range(s) -> None:
        s = np.asarray(s)
        if np.any(s < 0.0) or np.any(s > 1.0):
            raise ValidationError("anneal fraction s must lie in [0, 1]")


def gamma_over_j(profile: DeviceProfile, s: float) -> float:
    """Ratio of transverse-field to coupling energy, A(s)/B(s)."""
    a = float(profile.a_of_s(s))
    b = float(profile.b_of_s(s))
    if b == 0.0:
        raise ValidationError(f"B(s) vanishes at s={s}; ratio undefined")
    return a / b


def synthetic_profile(points: int = 101) -> DeviceProfile:
    """Shipped synthetic profile: A = 6 (1 - s)^2 GHz falling to zero,
    B = 12 s^2 GHz rising from zero, tabulated on a uniform s grid."""
    s = np.linspace(0.0, 1.0, points)
    a = 6.0 * (1.0 - s) ** 2
    b = 12.0 * s**2
    return DeviceProfile("synthetic", np.column_stack([s, a, b]), h_gain_max=3.0)


_HEADER_FIELDS = {
    "h_gain_max": float,
    "max_hgain_points": int,
    "max_anneal_points": int,
    "min_anneal_time": float,
    "time_resolution": float,
}


def load_profile(source: IO[str] | str) -> DeviceProfile:
    """Parse the profile CSV: `key=value` header lines, then `s,A,B` rows."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    name = None
    kwargs: dict = {}
    rows: list[list[float]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.lower() == "s,a,b":
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            key = key.strip()
            if key == "name":
                name = value.strip()
            elif key in _HEADER_FIELDS:
                try:
                    kwargs[key] = _HEADER_FIELDS[key](value.strip())
                except ValueError:
                    raise ParseError(f"line {lineno}: bad value for {key}") from None
            else:
                raise ParseError(f"line {lineno}: unknown header key {key!r}")
        else:
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: expected 's,A,B' row")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(f"line {lineno}: non-numeric table row") from None
    if name is None:
        raise ParseError("profile is missing a 'name=' header")
    if "h_gain_max" not in kwargs:
        raise ParseError("profile is missing an 'h_gain_max=' header")
    return DeviceProfile(name=name, table=np.array(rows), **kwargs)


def save_profile(profile: DeviceProfile, stream: IO[str]) -> None:
    stream.write(f"name={profile.name}\n")
    stream.write(f"h_gain_max={profile.h_gain_max!r}\n")
    stream.write(f"max_hgain_points={profile.max_hgain_points}\n")
    stream.write(f"max_anneal_points={profile.max_anneal_points}\n")
    stream.write(f"min_anneal_time={profile.min_anneal_time!r}\n")
    stream.write(f"time_resolution={profile.time_resolution!r}\n")
    stream.write("s,A,B\n")
    for s, a, b in profile.table:
        stream.write(f"{s!r},{a!r},{b!r}\n")


def resolve_profile(ref: str) -> DeviceProfile:
    """Accept the literal name 'synthetic' or a path to a profile CSV."""
    if ref == "synthetic":
        return synthetic_profile()
    with open(ref) as fh:
        return load_profile(fh)
