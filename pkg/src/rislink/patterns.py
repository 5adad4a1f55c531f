"""Element pattern table parsing (purpose-built CSV).

File layout, bit-exact::

    m,azimuth_deg,gain_dbi
    <element>,<azimuth in degrees>,<gain in dBi, -inf allowed>
    ...
    m,smm_re,smm_im
    <element>,<Re s_mm>,<Im s_mm>
    ...

Blank lines and lines starting with '#' are ignored. Gain rows may appear
in any order; each element needs a single s_mm row and azimuth coverage of
at least [-90, +90] degrees. Gains are converted dBi -> linear and azimuths
degrees -> radians on parse.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PatternError
from .farfield import ElementPattern

GAIN_HEADER = ("m", "azimuth_deg", "gain_dbi")
SMM_HEADER = ("m", "smm_re", "smm_im")

_REQUIRED_COVERAGE_DEG = 90.0
_COVERAGE_SLACK_DEG = 1e-9


def _cells(line: str) -> tuple[str, ...]:
    return tuple(cell.strip() for cell in line.split(","))


def _normalized(cells: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(c.lower() for c in cells)


def parse_pattern_table(text: str | bytes) -> list[ElementPattern]:
    """Parse a pattern CSV into per-element patterns, sorted by element number."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    gain_rows: dict[int, list[tuple[float, float]]] = {}
    smm: dict[int, complex] = {}
    section: str | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = _cells(line)
        lowered = _normalized(cells)
        if lowered == GAIN_HEADER:
            if section is not None:
                raise PatternError(f"line {line_no}: unexpected repeated gain header")
            section = "gain"
            continue
        if lowered == SMM_HEADER:
            if section != "gain":
                raise PatternError(f"line {line_no}: s_mm section before the gain section")
            section = "smm"
            continue
        if section is None:
            raise PatternError(
                f"line {line_no}: expected header '{','.join(GAIN_HEADER)}' first"
            )
        if len(cells) != 3:
            raise PatternError(f"line {line_no}: expected 3 comma-separated values")
        try:
            m = int(cells[0])
            a = float(cells[1])
            b = float(cells[2])
        except ValueError:
            raise PatternError(f"line {line_no}: invalid numeric value") from None
        if section == "gain":
            if math.isinf(b) and b > 0:
                raise PatternError(f"line {line_no}: gain +inf dBi is not physical")
            gain_rows.setdefault(m, []).append((a, b))
        else:
            if m in smm:
                raise PatternError(f"line {line_no}: duplicate s_mm row for element {m}")
            smm[m] = complex(a, b)

    if not gain_rows:
        raise PatternError("pattern table contains no gain rows")

    missing = sorted(set(gain_rows) - set(smm))
    if missing:
        raise PatternError(f"missing s_mm rows for elements {missing}")
    orphaned = sorted(set(smm) - set(gain_rows))
    if orphaned:
        raise PatternError(f"s_mm rows for elements without gain data: {orphaned}")

    patterns = []
    for m in sorted(gain_rows):
        rows = sorted(gain_rows[m])
        azimuths = [a for a, _ in rows]
        if len(set(azimuths)) != len(azimuths):
            raise PatternError(f"element {m}: duplicate azimuth sample")
        lo, hi = azimuths[0], azimuths[-1]
        if lo > -_REQUIRED_COVERAGE_DEG + _COVERAGE_SLACK_DEG or hi < _REQUIRED_COVERAGE_DEG - _COVERAGE_SLACK_DEG:
            raise PatternError(
                f"element {m}: pattern covers [{lo:g}, {hi:g}] deg, "
                f"needs at least [-90, 90] deg"
            )
        az_rad = np.radians([a for a, _ in rows])
        gain_lin = np.array([10.0 ** (g / 10.0) for _, g in rows])
        patterns.append(ElementPattern(m, az_rad, gain_lin, smm[m]))
    return patterns


def format_pattern_table(patterns: list[ElementPattern]) -> str:
    """Serialize patterns back to the CSV layout documented above."""
    lines = [",".join(GAIN_HEADER)]
    for pat in sorted(patterns, key=lambda p: p.index_m):
        for az, g in zip(pat.azimuth_rad, pat.gain_lin):
            dbi = 10.0 * math.log10(g) if g > 0 else float("-inf")
            lines.append(f"{pat.index_m},{math.degrees(az)!r},{dbi!r}")
    lines.append(",".join(SMM_HEADER))
    for pat in sorted(patterns, key=lambda p: p.index_m):
        lines.append(f"{pat.index_m},{pat.s_mm.real!r},{pat.s_mm.imag!r}")
    return "\n".join(lines) + "\n"
