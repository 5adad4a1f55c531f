"""Complex scatter-matrix data model and loaded-port network algebra.

Ports are identified by role tokens: ``"tx"``, ``"rx"`` and ``"ris<m>"``
where ``m`` is the 1-based element number. A full link matrix is laid out
with the Tx port first, the RIS element ports in the middle and the Rx
port last. All operations are pure functions on effectively immutable
values (entry arrays are locked after construction), so instances can be
shared freely across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IllConditionedLoadError

TX_ROLE = "tx"
RX_ROLE = "rx"

_RIS_ROLE_RE = re.compile(r"^ris([1-9][0-9]*)$")

#: Reciprocal condition numbers of (I - S_ii*Gamma) below this are rejected;
#: physical loaded passive networks never reach exact singularity, so a
#: near-singular system flags bad data rather than physics.
RCOND_LIMIT = 1e-12


def ris_role(element_number: int) -> str:
    """Role token for the RIS element with the given 1-based number."""
    if element_number < 1:
        raise ValueError(f"element number must be >= 1, got {element_number}")
    return f"ris{element_number}"


def role_element(role: str) -> int | None:
    """Element number encoded in a role token, or None for tx/rx."""
    match = _RIS_ROLE_RE.match(role)
    return int(match.group(1)) if match else None


def _validate_roles(roles: Sequence[str]) -> None:
    seen_elements: set[int] = set()
    n_tx = n_rx = 0
    for role in roles:
        if role == TX_ROLE:
            n_tx += 1
        elif role == RX_ROLE:
            n_rx += 1
        else:
            m = role_element(role)
            if m is None:
                raise ValueError(f"invalid port role {role!r}")
            if m in seen_elements:
                raise ValueError(f"duplicate RIS element number {m} in port roles")
            seen_elements.add(m)
    if n_tx > 1 or n_rx > 1:
        raise ValueError("at most one Tx and one Rx port are allowed")


@dataclass(frozen=True, eq=False)
class ScatterMatrix:
    """Square complex scatter matrix with port roles at one frequency.

    Parameters
    ----------
    entries : array_like
        P x P complex wave ratios.
    freq_hz : float
        Frequency the matrix is valid at, in Hz.
    port_roles : tuple of str
        One role token per port, same order as the matrix rows.
    z0_ohm : float
        Real reference impedance, identical for every port.
    """

    entries: np.ndarray
    freq_hz: float
    port_roles: tuple[str, ...]
    z0_ohm: float = 50.0

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")
        roles = tuple(self.port_roles)
        if len(roles) != entries.shape[0]:
            raise ValueError(
                f"{len(roles)} port roles for a {entries.shape[0]}-port matrix"
            )
        _validate_roles(roles)
        if not self.freq_hz > 0:
            raise ValueError(f"freq_hz must be positive, got {self.freq_hz}")
        if not self.z0_ohm > 0:
            raise ValueError(f"z0_ohm must be positive, got {self.z0_ohm}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "port_roles", roles)

    # -- constructors ------------------------------------------------------

    @classmethod
    def ris_only(
        cls,
        entries,
        freq_hz: float,
        element_numbers: Iterable[int] | None = None,
        z0_ohm: float = 50.0,
    ) -> "ScatterMatrix":
        """N-port matrix whose ports are all RIS elements (default numbering 1..N)."""
        entries = np.asarray(entries, dtype=complex)
        n = entries.shape[0] if entries.ndim == 2 else 0
        numbers = tuple(element_numbers) if element_numbers is not None else tuple(range(1, n + 1))
        return cls(entries, freq_hz, tuple(ris_role(m) for m in numbers), z0_ohm)

    @classmethod
    def full_link(
        cls,
        entries,
        freq_hz: float,
        element_numbers: Iterable[int],
        z0_ohm: float = 50.0,
    ) -> "ScatterMatrix":
        """(N+2)-port matrix ordered Tx, RIS elements, Rx."""
        roles = (TX_ROLE, *(ris_role(m) for m in element_numbers), RX_ROLE)
        return cls(entries, freq_hz, roles, z0_ohm)

    # -- port bookkeeping --------------------------------------------------

    @property
    def n_ports(self) -> int:
        return self.entries.shape[0]

    @property
    def tx_index(self) -> int:
        try:
            return self.port_roles.index(TX_ROLE)
        except ValueError:
            raise ValueError("matrix has no Tx port") from None

    @property
    def rx_index(self) -> int:
        try:
            return self.port_roles.index(RX_ROLE)
        except ValueError:
            raise ValueError("matrix has no Rx port") from None

    @property
    def ris_indices(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.port_roles) if role_element(r) is not None)

    @property
    def element_numbers(self) -> tuple[int, ...]:
        return tuple(role_element(self.port_roles[i]) for i in self.ris_indices)

    @property
    def is_ris_only(self) -> bool:
        return len(self.ris_indices) == self.n_ports

    def has_link_ports(self) -> bool:
        return TX_ROLE in self.port_roles and RX_ROLE in self.port_roles


@dataclass(frozen=True)
class ReflectionVector:
    """Reflection coefficients terminating the RIS ports, in port order.

    Passive loads satisfy ``|gamma| <= 1``; purely reactive ideal loads sit
    exactly on the unit circle.
    """

    gammas: tuple[complex, ...]

    def __post_init__(self):
        gammas = tuple(complex(g) for g in self.gammas)
        for i, g in enumerate(gammas):
            if abs(g) > 1.0 + 1e-9:
                raise ValueError(f"|gamma_{i + 1}| = {abs(g):.6f} exceeds 1 (active load)")
        object.__setattr__(self, "gammas", gammas)

    @classmethod
    def of(cls, values: Iterable[complex]) -> "ReflectionVector":
        return cls(tuple(complex(v) for v in values))

    def __len__(self) -> int:
        return len(self.gammas)

    @property
    def as_array(self) -> np.ndarray:
        return np.array(self.gammas, dtype=complex)


def reduce_loaded(full: ScatterMatrix, loads: ReflectionVector) -> ScatterMatrix:
    """Terminate the RIS ports with reflective loads and reduce to Tx/Rx.

    Computes ``S_red = S_ee + S_ei * Gamma * (I - S_ii * Gamma)^-1 * S_ie``
    where ``e`` are the external (Tx, Rx) ports, ``i`` the RIS ports and
    ``Gamma = diag(loads)``.

    Parameters
    ----------
    full : ScatterMatrix
        Matrix with one Tx port, one Rx port and N RIS ports.
    loads : ReflectionVector
        N reflection coefficients aligned with the RIS port order.

    Returns
    -------
    ScatterMatrix
        2x2 matrix with (Tx, Rx) port order.

    Raises
    ------
    IllConditionedLoadError
        If ``I - S_ii*Gamma`` is singular beyond the conditioning threshold.
    """
    ext = (full.tx_index, full.rx_index)
    ris = full.ris_indices
    if len(loads) != len(ris):
        raise ValueError(f"{len(loads)} loads for {len(ris)} RIS ports")

    s = full.entries
    s_ee = s[np.ix_(ext, ext)]
    if not ris:
        reduced = s_ee.copy()
    else:
        gam = loads.as_array
        s_ei = s[np.ix_(ext, ris)]
        s_ie = s[np.ix_(ris, ext)]
        s_ii = s[np.ix_(ris, ris)]
        system = np.eye(len(ris), dtype=complex) - s_ii * gam[np.newaxis, :]
        cond = np.linalg.cond(system)
        if not np.isfinite(cond) or 1.0 / cond < RCOND_LIMIT:
            raise IllConditionedLoadError(float(cond))
        reduced = s_ee + s_ei @ (gam[:, np.newaxis] * np.linalg.solve(system, s_ie))

    return ScatterMatrix(reduced, full.freq_hz, (TX_ROLE, RX_ROLE), full.z0_ohm)


def power_transfer(reduced: ScatterMatrix) -> float:
    """Transducer power gain |S_RxTx|^2 of a reduced Tx/Rx two-port.

    With matched terminations this lies in [0, 1] for any passive network.
    """
    if reduced.n_ports != 2 or not reduced.has_link_ports():
        raise ValueError("power_transfer expects a 2x2 matrix with Tx and Rx roles")
    return float(abs(reduced.entries[reduced.rx_index, reduced.tx_index]) ** 2)


def check_passivity(s: ScatterMatrix, tol: float = 1e-6) -> bool:
    """True iff every singular value is <= 1 + tol."""
    if s.n_ports == 0:
        return True
    singular = np.linalg.svd(s.entries, compute_uv=False)
    return bool(singular.max() <= 1.0 + tol)


def check_reciprocity(s: ScatterMatrix, tol: float = 1e-12) -> bool:
    """True iff max |S_ij - S_ji| is <= tol."""
    if s.n_ports == 0:
        return True
    return bool(np.abs(s.entries - s.entries.T).max() <= tol)
