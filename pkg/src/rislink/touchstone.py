"""Touchstone v1 (.sNp) reading, writing and frequency selection.

Supported grammar: '!' comments (full-line and trailing), a single '#'
option line with defaults ``GHz S MA R 50`` filled in for missing tokens,
and whitespace-separated data values with free line wrapping. RI, MA and
DB value formats are normalized to complex. For 2-port files the v1
column-major quirk applies (S21 precedes S12 on the data line); 3 ports
and up are row-major. Touchstone v2 files ('[Version]' etc.) are rejected.

Only S-parameters are accepted; mixed-mode ports and noise data are out of
scope. Writing always normalizes to ``# HZ S RI R <z0>`` with shortest
round-tripping decimal literals, so parse(write(doc)) reproduces the
document exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FrequencyNotFoundError, TouchstoneError
from .network import ScatterMatrix

FREQ_MULTIPLIERS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_VALUE_FORMATS = ("ri", "ma", "db")
_OPTION_DEFAULTS = ("ghz", "s", "ma", "r", "50")
_EXTENSION_RE = re.compile(r"\.s([0-9]+)p$", re.IGNORECASE)

#: Complex values written per line before wrapping (v1 readability limit).
_VALUES_PER_LINE = 4


@dataclass(frozen=True)
class TouchstoneOptions:
    """Decoded '#' option line."""

    freq_unit: str = "ghz"
    parameter: str = "s"
    value_format: str = "ma"
    z0_ohm: float = 50.0

    @property
    def freq_multiplier(self) -> float:
        return FREQ_MULTIPLIERS[self.freq_unit]


@dataclass(frozen=True, eq=False)
class TouchstoneDocument:
    """Parsed multiport S-parameter file: option line plus frequency points."""

    n_ports: int
    options: TouchstoneOptions
    points: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        if self.n_ports < 1:
            raise TouchstoneError(f"invalid port count {self.n_ports}")
        points = []
        previous = -np.inf
        for freq_hz, matrix in self.points:
            matrix = np.array(matrix, dtype=complex)
            if matrix.shape != (self.n_ports, self.n_ports):
                raise TouchstoneError(
                    f"matrix shape {matrix.shape} does not match {self.n_ports} ports"
                )
            if freq_hz <= previous:
                raise TouchstoneError("frequencies must be strictly increasing")
            previous = freq_hz
            matrix.flags.writeable = False
            points.append((float(freq_hz), matrix))
        object.__setattr__(self, "points", tuple(points))

    @property
    def frequencies_hz(self) -> tuple[float, ...]:
        return tuple(f for f, _ in self.points)


def _parse_option_line(tokens: list[str], line_no: int) -> TouchstoneOptions:
    toks = [t.lower() for t in tokens]
    toks.extend(_OPTION_DEFAULTS[len(toks):])
    unit, parameter, value_format = toks[0], toks[1], toks[2]
    if unit not in FREQ_MULTIPLIERS:
        raise TouchstoneError(f"unknown frequency unit {unit!r}", line_no)
    if parameter != "s":
        raise TouchstoneError(
            f"only S-parameters are supported, got parameter type {parameter!r}", line_no
        )
    if value_format not in _VALUE_FORMATS:
        raise TouchstoneError(f"unknown value format {value_format!r}", line_no)
    if toks[3] != "r":
        raise TouchstoneError(f"expected 'R' before the reference impedance, got {toks[3]!r}", line_no)
    try:
        z0 = float(toks[4])
    except ValueError:
        raise TouchstoneError(f"invalid reference impedance {toks[4]!r}", line_no) from None
    if not z0 > 0:
        raise TouchstoneError(f"reference impedance must be positive, got {z0}", line_no)
    if len(toks) > 5:
        raise TouchstoneError("trailing tokens after the reference impedance", line_no)
    return TouchstoneOptions(unit, parameter, value_format, z0)


def _pairs_to_complex(pairs: np.ndarray, value_format: str) -> np.ndarray:
    a, b = pairs[:, 0], pairs[:, 1]
    if value_format == "ri":
        return a + 1j * b
    if value_format == "ma":
        return a * np.exp(1j * np.radians(b))
    return 10.0 ** (a / 20.0) * np.exp(1j * np.radians(b))


def _arrange(values: np.ndarray, n: int) -> np.ndarray:
    if n == 2:
        # v1 two-port order is S11 S21 S12 S22 (column-major quirk).
        return np.array([[values[0], values[2]], [values[1], values[3]]])
    return values.reshape(n, n)


def parse_touchstone(text: str | bytes, n_ports: int | None = None) -> TouchstoneDocument:
    """Parse Touchstone v1 text into a :class:`TouchstoneDocument`.

    ``n_ports`` may be omitted for 1- and 2-port files, whose single-line
    points make the count unambiguous; larger files need the explicit count
    (``read_touchstone`` derives it from the file extension).
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TouchstoneError(f"file is not valid UTF-8 text: {exc}") from None

    options: TouchstoneOptions | None = None
    values: list[float] = []
    value_lines: list[int] = []
    first_data_line_count: int | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneError(
                "Touchstone v2 keywords are not supported; export as Touchstone v1", line_no
            )
        if line.startswith("#"):
            if options is not None:
                raise TouchstoneError("multiple option lines", line_no)
            if values:
                raise TouchstoneError("option line must precede the data", line_no)
            options = _parse_option_line(line[1:].split(), line_no)
            continue
        if options is None:
            raise TouchstoneError("data before the option line", line_no)
        tokens = line.split()
        try:
            numbers = [float(t) for t in tokens]
        except ValueError:
            bad = next(t for t in tokens if not _is_float(t))
            raise TouchstoneError(f"invalid numeric token {bad!r}", line_no) from None
        if first_data_line_count is None:
            first_data_line_count = len(numbers)
        values.extend(numbers)
        value_lines.extend([line_no] * len(numbers))

    if options is None:
        raise TouchstoneError("missing option line ('#')")
    if not values:
        raise TouchstoneError("file contains no data")

    if n_ports is None:
        if first_data_line_count == 3:
            n_ports = 1
        elif first_data_line_count == 9:
            n_ports = 2
        else:
            raise TouchstoneError(
                "cannot infer port count from line shape; pass n_ports explicitly "
                "or load via read_touchstone()"
            )

    per_point = 1 + 2 * n_ports * n_ports
    if len(values) % per_point != 0:
        boundary = (len(values) // per_point) * per_point
        line = value_lines[min(boundary, len(values) - 1)]
        raise TouchstoneError(
            f"wrong value count for {n_ports}-port data: {len(values)} values is not "
            f"a multiple of {per_point}",
            line,
        )

    data = np.asarray(values, dtype=float)
    points = []
    previous = -np.inf
    for k in range(len(values) // per_point):
        chunk = data[k * per_point : (k + 1) * per_point]
        freq_hz = chunk[0] * options.freq_multiplier
        if freq_hz <= previous:
            raise TouchstoneError(
                "frequencies must be strictly increasing", value_lines[k * per_point]
            )
        previous = freq_hz
        flat = _pairs_to_complex(chunk[1:].reshape(-1, 2), options.value_format)
        points.append((freq_hz, _arrange(flat, n_ports)))

    return TouchstoneDocument(n_ports, options, tuple(points))


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def ports_from_filename(path: str | Path) -> int:
    """Port count encoded in a .sNp filename."""
    match = _EXTENSION_RE.search(Path(path).name)
    if not match:
        raise TouchstoneError(f"cannot infer port count from filename {Path(path).name!r}")
    return int(match.group(1))


def read_touchstone(path: str | Path) -> TouchstoneDocument:
    """Read a .sNp file, cross-checking the extension's port count."""
    path = Path(path)
    n_ports = ports_from_filename(path)
    return parse_touchstone(path.read_bytes(), n_ports=n_ports)


def dumps_touchstone(doc: TouchstoneDocument) -> str:
    """Serialize to normalized v1 text (# HZ S RI R z0, exact decimals)."""
    lines = [f"# HZ S RI R {doc.options.z0_ohm!r}"]
    n = doc.n_ports
    for freq_hz, matrix in doc.points:
        if n == 2:
            row = [matrix[0, 0], matrix[1, 0], matrix[0, 1], matrix[1, 1]]
            lines.append(f"{freq_hz!r} " + _format_values(row))
        else:
            for i in range(n):
                row = list(matrix[i])
                for j in range(0, n, _VALUES_PER_LINE):
                    text = _format_values(row[j : j + _VALUES_PER_LINE])
                    if i == 0 and j == 0:
                        text = f"{freq_hz!r} {text}"
                    lines.append(text)
    return "\n".join(lines) + "\n"


def _format_values(values: Iterable[complex]) -> str:
    return " ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in values)


def write_touchstone(doc: TouchstoneDocument, path: str | Path) -> None:
    path = Path(path)
    if _EXTENSION_RE.search(path.name) and ports_from_filename(path) != doc.n_ports:
        raise TouchstoneError(
            f"filename {path.name!r} implies {ports_from_filename(path)} ports "
            f"but document has {doc.n_ports}"
        )
    path.write_text(dumps_touchstone(doc), encoding="utf-8")


def document_from_matrix(matrix: ScatterMatrix) -> TouchstoneDocument:
    """Single-point document for one scatter matrix (RI format, Hz)."""
    options = TouchstoneOptions("hz", "s", "ri", matrix.z0_ohm)
    return TouchstoneDocument(matrix.n_ports, options, ((matrix.freq_hz, matrix.entries),))


def matrix_at_frequency(
    doc: TouchstoneDocument,
    f_hz: float,
    tol_hz: float,
    roles: Sequence[str] | None = None,
    element_numbers: Sequence[int] | None = None,
) -> ScatterMatrix:
    """Pick the point within ``tol_hz`` of ``f_hz`` as a :class:`ScatterMatrix`.

    No interpolation is performed; the model is single-frequency by design.
    Ports default to RIS-element roles numbered 1..N unless ``roles`` or
    ``element_numbers`` says otherwise.
    """
    if not doc.points:
        raise FrequencyNotFoundError("document contains no frequency points")
    deltas = [abs(f - f_hz) for f in doc.frequencies_hz]
    best = int(np.argmin(deltas))
    if deltas[best] > tol_hz:
        available = ", ".join(f"{f / 1e9:.9g} GHz" for f in doc.frequencies_hz)
        raise FrequencyNotFoundError(
            f"no point within {tol_hz:g} Hz of {f_hz / 1e9:.9g} GHz; available: {available}"
        )
    freq_hz, matrix = doc.points[best]
    if roles is not None:
        return ScatterMatrix(matrix, freq_hz, tuple(roles), doc.options.z0_ohm)
    return ScatterMatrix.ris_only(matrix, freq_hz, element_numbers, doc.options.z0_ohm)
