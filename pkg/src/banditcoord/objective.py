"""Grid-rasterized multi-camera area coverage objective.

The objective value of a joint camera configuration is the total area of
interest covered by the union of the chosen fields of view (FOVs).  The map is
rasterized on a unit grid; a cell counts as covered iff its center lies inside
a camera's FOV sector (inclusive sector boundary, so ties are deterministic).

Coverage of a finite union of cell sets is normalized, monotone, submodular,
and 2nd-order submodular; the property-check helpers at the bottom verify
those facts exhaustively on small instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, DegenerateObjectiveError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CameraSpec:
    """A fixed camera: position, FOV geometry, candidate headings, comm range.

    ``directions`` is the camera's action set: action ``a`` means pointing the
    FOV sector (radius ``fov_radius``, opening angle ``aov``) along heading
    ``directions[a]`` radians, measured counterclockwise from east.
    """

    position: tuple[float, float]
    fov_radius: float
    aov: float
    directions: tuple[float, ...]
    comm_range: float

    def __post_init__(self):
        if self.fov_radius <= 0:
            raise ValueError("fov_radius must be positive")
        if not (0 < self.aov <= TWO_PI):
            raise ValueError("aov must lie in (0, 2*pi]")
        if len(self.directions) == 0:
            raise ValueError("directions must be nonempty")
        if len(set(self.directions)) != len(self.directions):
            raise ValueError("directions must be distinct")
        if self.comm_range < 0:
            raise ValueError("comm_range must be nonnegative")


def camera_ring(position, fov_radius, aov, direction_count, comm_range) -> CameraSpec:
    """Camera whose action set is ``direction_count`` evenly spaced headings."""
    step = TWO_PI / direction_count
    return CameraSpec(
        position=(float(position[0]), float(position[1])),
        fov_radius=float(fov_radius),
        aov=float(aov),
        directions=tuple(k * step for k in range(direction_count)),
        comm_range=float(comm_range),
    )


class CoverageWorld:
    """Rasterized 2D map with a boolean region-of-interest mask and cameras.

    Cells are unit-indexed row-major: cell ``(ix, iy)`` has flat index
    ``iy * nx + ix`` and center ``((ix + 0.5) * cell_size, (iy + 0.5) * cell_size)``.
    """

    def __init__(self, width, height, interest_mask, cameras, cell_size=1.0):
        if width <= 0 or height <= 0 or cell_size <= 0:
            raise ValueError("width, height and cell_size must be positive")
        nx = math.ceil(width / cell_size)
        ny = math.ceil(height / cell_size)
        mask = np.asarray(interest_mask, dtype=bool)
        if mask.shape != (ny, nx):
            raise ValueError(f"interest_mask must have shape {(ny, nx)}, got {mask.shape}")
        if not mask.any():
            raise ValueError("at least one cell must be of interest")
        mask = mask.copy()
        mask.setflags(write=False)
        self.width = float(width)
        self.height = float(height)
        self.cell_size = float(cell_size)
        self.interest_mask = mask
        self.cameras = tuple(cameras)

    @property
    def nx(self) -> int:
        return self.interest_mask.shape[1]

    @property
    def ny(self) -> int:
        return self.interest_mask.shape[0]

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def interest_area(self) -> float:
        return float(self.interest_mask.sum()) * self.cell_area

    def cell_centers(self):
        """Flattened arrays (cx, cy) of all cell centers, row-major."""
        ix = np.arange(self.nx)
        iy = np.arange(self.ny)
        cx = (ix + 0.5) * self.cell_size
        cy = (iy + 0.5) * self.cell_size
        gx, gy = np.meshgrid(cx, cy)
        return gx.ravel(), gy.ravel()

    def coverage_percent(self, value: float) -> float:
        """Express an absolute covered area as a percentage of interest area."""
        return 100.0 * value / self.interest_area


def blank_world(width, height, cameras, cell_size=1.0) -> CoverageWorld:
    """World whose whole map is the region of interest.

    Cells whose center falls outside the (possibly non-integer) map rectangle
    are excluded from the interest mask.
    """
    nx = math.ceil(width / cell_size)
    ny = math.ceil(height / cell_size)
    ix = np.arange(nx)
    iy = np.arange(ny)
    in_x = (ix + 0.5) * cell_size <= width
    in_y = (iy + 0.5) * cell_size <= height
    mask = np.outer(in_y, in_x)
    return CoverageWorld(width, height, mask, cameras, cell_size)


def rectangles_world(width, height, rects, cameras, cell_size=1.0) -> CoverageWorld:
    """World whose interest region is a union of axis-aligned rectangles.

    Each rect is (x0, y0, x1, y1); a cell is of interest iff its center lies
    strictly inside or on the rectangle boundary.
    """
    nx = math.ceil(width / cell_size)
    ny = math.ceil(height / cell_size)
    cx = (np.arange(nx) + 0.5) * cell_size
    cy = (np.arange(ny) + 0.5) * cell_size
    gx, gy = np.meshgrid(cx, cy)
    mask = np.zeros((ny, nx), dtype=bool)
    for x0, y0, x1, y1 in rects:
        mask |= (gx >= x0) & (gx <= x1) & (gy >= y0) & (gy <= y1)
    return CoverageWorld(width, height, mask, cameras, cell_size)


def _sector_cover(world: CoverageWorld, camera: CameraSpec, heading: float) -> np.ndarray:
    """Boolean cover array over all cells (row-major, flattened)."""
    cx, cy = world.cell_centers()
    dx = cx - camera.position[0]
    dy = cy - camera.position[1]
    dist2 = dx * dx + dy * dy
    within = dist2 <= camera.fov_radius * camera.fov_radius
    bearing = np.arctan2(dy, dx)
    raw = np.mod(bearing - heading, TWO_PI)
    diff = np.minimum(raw, TWO_PI - raw)
    # A cell center coinciding with the camera has undefined bearing: covered.
    in_sector = (diff <= camera.aov / 2.0) | (dist2 == 0.0)
    return within & in_sector & world.interest_mask.ravel()


def coverage_cells(world: CoverageWorld, camera_index: int, direction_index: int) -> frozenset[int]:
    """Interest cells covered by one camera pointing along one of its headings."""
    if not 0 <= camera_index < len(world.cameras):
        raise ValueError(f"camera_index {camera_index} out of range")
    camera = world.cameras[camera_index]
    if not 0 <= direction_index < len(camera.directions):
        raise ValueError(f"direction_index {direction_index} out of range")
    cover = _sector_cover(world, camera, camera.directions[direction_index])
    return frozenset(int(i) for i in np.nonzero(cover)[0])


def _mask_to_int(cover: np.ndarray) -> int:
    packed = np.packbits(cover.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


class SubmodularOracle:
    """Evaluates the coverage objective and counts every function evaluation.

    Per-(camera, heading) cell sets are precomputed as bitmasks over the flat
    cell index, so one evaluation is a few bitwise unions plus a popcount.
    ``calls`` counts evaluations of f; construction (including the per-agent
    normalizers ``B``) is not charged.
    """

    def __init__(self, world: CoverageWorld):
        self.world = world
        self._masks: list[list[int]] = []
        for camera in world.cameras:
            row = [_mask_to_int(_sector_cover(world, camera, h)) for h in camera.directions]
            self._masks.append(row)
        self.cell_area = world.cell_area
        # B_i: the largest singleton value of agent i, used to scale bandit
        # rewards into [0, 1] (monotone submodularity bounds every marginal
        # gain and VoC increment by B_i).
        self.normalizers = tuple(
            max(m.bit_count() for m in row) * self.cell_area for row in self._masks
        )
        self.calls = 0

    @property
    def agent_count(self) -> int:
        return len(self._masks)

    def action_count(self, agent: int) -> int:
        return len(self._masks[agent])

    def mask(self, agent: int, action: int) -> int:
        """Raw cell bitmask of a singleton; not charged as an evaluation."""
        return self._masks[agent][action]

    def area_of_mask(self, mask: int) -> float:
        """One objective evaluation on a precomposed union mask."""
        self.calls += 1
        return mask.bit_count() * self.cell_area

    def eval_pairs(self, pairs: Iterable[tuple[int, int]]) -> float:
        """One objective evaluation on a set of (agent, action) singletons."""
        union = 0
        for agent, action in pairs:
            union |= self._masks[agent][action]
        self.calls += 1
        return union.bit_count() * self.cell_area

    def eval(self, assignment: Mapping[int, int]) -> float:
        """One objective evaluation on a joint assignment (agent -> action)."""
        union = 0
        for agent, action in assignment.items():
            if not 0 <= agent < len(self._masks):
                raise ValueError(f"unknown agent {agent}")
            row = self._masks[agent]
            if not 0 <= action < len(row):
                raise ValueError(f"agent {agent} has no action {action}")
            union |= row[action]
        self.calls += 1
        return union.bit_count() * self.cell_area

    def marginal_gain(self, agent: int, action: int, context: Mapping[int, int]) -> float:
        """f(a | context) = f(context + a) - f(context); two evaluations."""
        if agent in context:
            raise ValueError(f"agent {agent} is already assigned in the context")
        with_a = dict(context)
        with_a[agent] = action
        return self.eval(with_a) - self.eval(context)

    def voc(self, agent: int, action: int, neighbor_actions: Mapping[int, int]) -> float:
        """Value of coordination: f(a) - f(a | neighbor actions).

        Measures the overlap between the agent's action and its neighbors'
        actions; three evaluations.
        """
        if agent in neighbor_actions:
            raise ValueError(f"agent {agent} cannot be its own neighbor")
        return self.eval({agent: action}) - self.marginal_gain(agent, action, neighbor_actions)


def curvature(oracle: SubmodularOracle, ground: Sequence[tuple[int, int]]) -> float:
    """Curvature of the coverage function over a ground set of singletons.

    kappa = 1 - min_v [f(ground) - f(ground - v)] / f(v), taken over singletons
    with f(v) > 0 (the ratio is 0/0 for zero-value singletons, which carry no
    curvature information and are skipped).
    """
    if len(ground) == 0:
        raise ValueError("ground set must be nonempty")
    total = oracle.eval_pairs(ground)
    ratios = []
    for idx, element in enumerate(ground):
        single = oracle.eval_pairs([element])
        if single == 0.0:
            continue
        rest = oracle.eval_pairs([g for i, g in enumerate(ground) if i != idx])
        ratios.append((total - rest) / single)
    if not ratios:
        raise DegenerateObjectiveError("every singleton in the ground set has zero value")
    kappa = 1.0 - min(ratios)
    return min(1.0, max(0.0, kappa))


def check_second_order_submodular(
    oracle: SubmodularOracle,
    universe: Sequence[tuple[int, int]],
    max_singletons: int = 10,
):
    """Exhaustively check 2nd-order submodularity over a small universe.

    Verifies f(s|C) - f(s|A+C) >= f(s|B+C) - f(s|A+B+C) for all disjoint
    A, B, C within ``universe`` and every singleton s.  Returns
    ``(True, None)`` if no violation exists, else ``(False, witness)`` with
    the first violating (s, A, B, C) quadruple.
    """
    n = len(universe)
    if n > max_singletons:
        raise CapacityError(f"universe of {n} singletons exceeds the cap of {max_singletons}")
    # f over all subsets, indexed by bitmask of universe positions.
    union = [0] * (1 << n)
    for s in range(1, 1 << n):
        low = (s & -s).bit_length() - 1
        agent, action = universe[low]
        union[s] = union[s & (s - 1)] | oracle.mask(agent, action)
    area = oracle.cell_area
    f = [u.bit_count() * area for u in union]

    full = (1 << n) - 1
    singles = [1 << i for i in range(n)]

    def marg(i, subset):
        return f[subset | singles[i]] - f[subset]

    a = full
    while True:  # iterate A over all subsets of the universe
        rest_a = full & ~a
        b = rest_a
        while True:  # B over subsets disjoint from A
            rest_ab = rest_a & ~b
            c = rest_ab
            while True:  # C over subsets disjoint from A and B
                for i in range(n):
                    lhs = marg(i, c) - marg(i, a | c)
                    rhs = marg(i, b | c) - marg(i, a | b | c)
                    if lhs < rhs - 1e-9:
                        witness = tuple(
                            [universe[i]]
                            + [
                                [universe[j] for j in range(n) if subset >> j & 1]
                                for subset in (a, b, c)
                            ]
                        )
                        return False, witness
                if c == 0:
                    break
                c = (c - 1) & rest_ab
            if b == 0:
                break
            b = (b - 1) & rest_a
        if a == 0:
            break
        a = (a - 1) & full
    return True, None
