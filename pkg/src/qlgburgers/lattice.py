"""Time stepping for the 1D and 2D quantum lattice gas.

A step is a per-site collision (closed form by default, quantum path
available) followed by classical streaming with periodic boundaries.
Streaming moves population ``i`` by its velocity: in 1D ``c0 = -1`` and
``c1 = +1`` sites per step; in 2D by the integer shift pair of the
velocity set.  This is the convention of the algorithmic description
and is the one validated against the analytic Burgers solution; the
finite-difference form with the opposite sign can be selected with
``reversed_streaming=True`` for the discrepancy study.

Everything is deterministic: measurement is an expectation value, so
repeated runs are bitwise identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import (
    CollisionParams,
    PopulationRangeError,
    collide_closed_form,
    collide_quantum,
    equilibrium,
    predicted_coefficients_1d,
)

__all__ = [
    "Grid1D",
    "Grid2D",
    "PdeCoefficients2D",
    "PopulationField1D",
    "PopulationField2D",
    "VelocitySet2D",
    "density",
    "init_cosine_1d",
    "init_cosine_2d",
    "momentum_u",
    "predicted_coefficients_2d",
    "step_1d",
    "step_2d",
    "stream_1d",
    "stream_2d",
    "velocity_set_by_name",
]

C_1D = (-1, 1)  # velocity labels: f0 streams left, f1 streams right


@dataclass(frozen=True)
class Grid1D:
    """Periodic 1D grid with diffusive scaling dt = dx^2."""

    n_x: int
    length_x: float

    def __post_init__(self):
        if self.n_x < 2:
            raise ValueError(f"n_x must be >= 2, got {self.n_x}")
        if self.length_x <= 0:
            raise ValueError(f"length_x must be positive, got {self.length_x}")

    @property
    def dx(self) -> float:
        return self.length_x / self.n_x

    @property
    def dt(self) -> float:
        return self.dx * self.dx

    @property
    def c(self) -> float:
        """Lattice speed dx/dt."""
        return self.dx / self.dt

    def positions(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx


@dataclass(frozen=True)
class Grid2D:
    """Periodic 2D index grid, spacing ds along both index axes, dt = ds^2."""

    n_x: int
    n_y: int
    ds: float

    def __post_init__(self):
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError(f"n_x and n_y must be >= 2, got {self.n_x}, {self.n_y}")
        if self.ds <= 0:
            raise ValueError(f"ds must be positive, got {self.ds}")

    @property
    def dt(self) -> float:
        return self.ds * self.ds

    @property
    def c(self) -> float:
        return self.ds / self.dt


@dataclass(frozen=True)
class VelocitySet2D:
    """Two streaming directions on a Bravais lattice.

    ``shifts`` are the integer index moves of the two populations per
    step; ``basis`` holds the Cartesian basis vectors (e1, e2) of the
    lattice as rows.  Streaming uses only the integer shifts, so it is
    an exact permutation; the Cartesian geometry enters only through
    :func:`predicted_coefficients_2d` via c_i = n_i e1 + m_i e2.
    """

    shifts: tuple  # ((n0, m0), (n1, m1))
    basis: tuple = ((1.0, 0.0), (0.0, 1.0))
    name: str = ""

    def __post_init__(self):
        if len(self.shifts) != 2 or any(len(s) != 2 for s in self.shifts):
            raise ValueError(f"shifts must be two integer pairs, got {self.shifts!r}")
        for s in self.shifts:
            if any(int(v) != v for v in s):
                raise ValueError(f"streaming shifts must be integers, got {self.shifts!r}")
        e = np.asarray(self.basis, dtype=float)
        if e.shape != (2, 2):
            raise ValueError(f"basis must be two 2D vectors, got {self.basis!r}")
        if abs(np.linalg.det(e)) < 1e-12:
            raise ValueError(f"basis vectors are linearly dependent: {self.basis!r}")

    def cartesian(self) -> tuple:
        """Cartesian velocity vectors (c0, c1)."""
        e = np.asarray(self.basis, dtype=float)
        return tuple(np.asarray(s, dtype=float) @ e for s in self.shifts)

    def index_space(self) -> "VelocitySet2D":
        """The same streaming viewed on a unit square lattice.

        Used by the finite-difference cross validation: the dynamics on
        the index grid equals a square-lattice gas whose velocities are
        the integer shifts.
        """
        return VelocitySet2D(shifts=self.shifts, name=self.name + "@index" if self.name else "")


AXIS_SYMMETRIC = VelocitySet2D(shifts=((-1, 0), (1, 0)), name="axis_symmetric")
ORTHOGONAL = VelocitySet2D(shifts=((1, 0), (0, -1)), name="orthogonal")
# Triangular lattice: e1 = (1, 0), e2 = (1/2, sqrt(3)/2) gives
# c0 = (-1/2, sqrt(3)/2) and c1 = (1/2, sqrt(3)/2).
TRIANGULAR = VelocitySet2D(
    shifts=((-1, 1), (0, 1)),
    basis=((1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)),
    name="triangular",
)

NAMED_VELOCITY_SETS = {
    "axis_symmetric": AXIS_SYMMETRIC,
    "orthogonal": ORTHOGONAL,
    "triangular": TRIANGULAR,
}


def velocity_set_by_name(name: str) -> VelocitySet2D:
    try:
        return NAMED_VELOCITY_SETS[name]
    except KeyError:
        raise ValueError(
            f"unknown velocity set {name!r}; known: {sorted(NAMED_VELOCITY_SETS)}"
        ) from None


@dataclass(frozen=True)
class PdeCoefficients2D:
    """Coefficients of the derived 2D equation.

        d_t rho + a . grad rho + b . [(1 - rho) grad rho]
                - div(D grad rho) = 0
    """

    a: np.ndarray
    b: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class PopulationField1D:
    f0: np.ndarray
    f1: np.ndarray
    grid: Grid1D
    t: int = 0

    def __post_init__(self):
        if self.f0.shape != (self.grid.n_x,) or self.f1.shape != (self.grid.n_x,):
            raise ValueError(
                f"field shape {self.f0.shape}/{self.f1.shape} does not match grid n_x={self.grid.n_x}"
            )


@dataclass(frozen=True)
class PopulationField2D:
    f0: np.ndarray  # shape (n_x, n_y), axis 0 is x
    f1: np.ndarray
    grid: Grid2D
    t: int = 0

    def __post_init__(self):
        shape = (self.grid.n_x, self.grid.n_y)
        if self.f0.shape != shape or self.f1.shape != shape:
            raise ValueError(
                f"field shape {self.f0.shape}/{self.f1.shape} does not match grid {shape}"
            )


def density(fld):
    """Pointwise mass density rho = f0 + f1."""
    return fld.f0 + fld.f1


def momentum_u(fld):
    """Pointwise momentum u = f1 - f0."""
    return fld.f1 - fld.f0


def _initial_pairs(rho, params, init):
    if init == "equilibrium":
        return equilibrium(rho, params)
    if init == "symmetric":
        return rho / 2.0, rho / 2.0
    raise ValueError(f"init must be 'equilibrium' or 'symmetric', got {init!r}")


def init_cosine_1d(
    grid: Grid1D, rho_b: float, rho_a: float, params: CollisionParams, init: str = "equilibrium"
) -> PopulationField1D:
    """Field with rho(x, 0) = rho_b + rho_a cos(2 pi x / L_x).

    Site pairs are set to the equilibrium of the local density (so the
    hydrodynamic assumptions hold from t = 0) unless ``init`` selects
    the symmetric split (rho/2, rho/2).
    """
    if rho_b - abs(rho_a) < 0.0 or rho_b + abs(rho_a) > 2.0:
        raise ValueError(
            f"initial density range [{rho_b - abs(rho_a)}, {rho_b + abs(rho_a)}] leaves [0, 2]"
        )
    beta = 2.0 * math.pi / grid.length_x
    rho = rho_b + rho_a * np.cos(beta * grid.positions())
    f0, f1 = _initial_pairs(rho, params, init)
    return PopulationField1D(f0=f0, f1=f1, grid=grid, t=0)


def init_cosine_2d(
    grid: Grid2D, rho_b: float, rho_a: float, params: CollisionParams, init: str = "equilibrium"
) -> PopulationField2D:
    """Field with rho(i, j, 0) = rho_b + rho_a [cos(2 pi i / N_x) + cos(2 pi j / N_y)]."""
    if rho_b - 2.0 * abs(rho_a) < 0.0 or rho_b + 2.0 * abs(rho_a) > 2.0:
        raise ValueError(
            f"initial density range [{rho_b - 2 * abs(rho_a)}, {rho_b + 2 * abs(rho_a)}] leaves [0, 2]"
        )
    i = np.arange(grid.n_x)[:, None]
    j = np.arange(grid.n_y)[None, :]
    rho = rho_b + rho_a * (np.cos(2.0 * math.pi * i / grid.n_x) + np.cos(2.0 * math.pi * j / grid.n_y))
    f0, f1 = _initial_pairs(rho, params, init)
    return PopulationField2D(f0=f0, f1=f1, grid=grid, t=0)


def _collide(f0, f1, params, path):
    if path == "closed_form":
        return collide_closed_form(f0, f1, params)
    if path == "quantum":
        return collide_quantum(f0, f1, params)
    raise ValueError(f"collision path must be 'closed_form' or 'quantum', got {path!r}")


def stream_1d(f0, f1, reversed_streaming: bool = False) -> tuple:
    """Streaming alone: shift population i by c_i sites (an exact permutation)."""
    sign = -1 if reversed_streaming else 1
    return np.roll(f0, sign * C_1D[0]), np.roll(f1, sign * C_1D[1])


def stream_2d(f0, f1, vset: VelocitySet2D, reversed_streaming: bool = False) -> tuple:
    """Streaming alone in 2D: shift population i by its integer shift pair."""
    sign = -1 if reversed_streaming else 1
    (n0, m0), (n1, m1) = vset.shifts
    return (
        np.roll(f0, (sign * int(n0), sign * int(m0)), axis=(0, 1)),
        np.roll(f1, (sign * int(n1), sign * int(m1)), axis=(0, 1)),
    )


def step_1d(
    fld: PopulationField1D,
    params: CollisionParams,
    collision: str = "closed_form",
    reversed_streaming: bool = False,
) -> PopulationField1D:
    """One collision + streaming step with periodic wraparound.

    Default streaming moves population i by c_i sites (c0 = -1,
    c1 = +1); ``reversed_streaming`` moves it by -c_i, the literal
    finite-difference convention, kept for the sign-discrepancy study.
    """
    try:
        g0, g1 = _collide(fld.f0, fld.f1, params, collision)
    except PopulationRangeError as exc:
        raise PopulationRangeError(
            f"collision failed at t={fld.t}, site x={exc.index}: {exc}", exc.index, exc.value
        ) from exc
    f0, f1 = stream_1d(g0, g1, reversed_streaming)
    return PopulationField1D(f0=f0, f1=f1, grid=fld.grid, t=fld.t + 1)


def step_2d(
    fld: PopulationField2D,
    params: CollisionParams,
    vset: VelocitySet2D,
    collision: str = "closed_form",
    reversed_streaming: bool = False,
) -> PopulationField2D:
    """One 2D step: same collision as 1D, streaming by integer shifts."""
    try:
        g0, g1 = _collide(fld.f0, fld.f1, params, collision)
    except PopulationRangeError as exc:
        coords = None
        if exc.index is not None:
            coords = tuple(int(c) for c in np.unravel_index(exc.index, fld.f0.shape))
        raise PopulationRangeError(
            f"collision failed at t={fld.t}, site (i, j)={coords}: {exc}", exc.index, exc.value
        ) from exc
    f0, f1 = stream_2d(g0, g1, vset, reversed_streaming)
    return PopulationField2D(f0=f0, f1=f1, grid=fld.grid, t=fld.t + 1)


def predicted_coefficients_2d(
    vset: VelocitySet2D, params: CollisionParams, ds: float, dt: float
) -> PdeCoefficients2D:
    """Coefficients (a, b, D) of the derived 2D equation.

    With c = ds/dt and (c_s, nu) from the 1D prediction:

        a = (c/2) (c0 + c1)
        b = (c_s/2) (c1 - c0)
        D = (nu/2) (c0 c0^T + c1 c1^T)

    The sign of b is pinned by the 1D reduction: for c0 = (-1, 0),
    c1 = (1, 0) the equation must collapse onto
    d_t rho + c_s (1 - rho) d_x rho = nu d_xx rho.
    """
    coeffs = predicted_coefficients_1d(params, ds, dt)
    c = ds / dt
    c0, c1 = vset.cartesian()
    a = 0.5 * c * (c0 + c1)
    b = 0.5 * coeffs.c_s * (c1 - c0)
    d = 0.5 * coeffs.nu * (np.outer(c0, c0) + np.outer(c1, c1))
    return PdeCoefficients2D(a=a, b=b, D=d)
