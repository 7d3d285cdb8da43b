from dataclasses import dataclass
from typing import List, Tuple
import logging

import numpy as np

from src.core.exceptions import MeshError

logger = logging.getLogger(__name__)

TRIVIAL = "trivial"
BOUNDARY_LAYER = "boundary_layer"
TENSOR_PRODUCT = "tensor_product"
MIXED = "mixed"
GEOMETRIC = "geometric"
PATTERN_KINDS = (TRIVIAL, BOUNDARY_LAYER, TENSOR_PRODUCT, MIXED, GEOMETRIC)

LARGE = "large"
ANISO = "aniso"
CORNER_LAYER = "corner_layer"
REGION_TAGS = (LARGE, ANISO, CORNER_LAYER)

MIN_CORNER_SIZE = 1e-300


def rectangle(x0: float, x1: float, y0: float, y1: float) -> List[Tuple[float, float]]:
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


@dataclass(frozen=True, eq=False)
class PatternMesh:
    """
    Refinement pattern of the reference square

    cells has shape (n, 4, 2): convex quadrilaterals with vertices ordered as the images
    of (0,0), (1,0), (1,1), (0,1) (counter-clockwise).
    """
    kind: str
    cells: np.ndarray
    tags: Tuple[str, ...]
    mirrored: bool = False

    def __len__(self) -> int:
        return len(self.cells)

    def cells_with_tag(self, tag: str) -> np.ndarray:
        return self.cells[[i for i, t in enumerate(self.tags) if t == tag]]

    def area(self) -> float:
        return float(sum(quad_area(cell) for cell in self.cells))


def quad_area(cell: np.ndarray) -> float:
    x, y = cell[:, 0], cell[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def cell_aspect_ratio(cell: np.ndarray) -> float:
    """
    Shape measure diam^2 / area (2 for a square, a/b + b/a for an a x b rectangle)
    """
    diffs = cell[:, None, :] - cell[None, :, :]
    diameter = np.max(np.linalg.norm(diffs, axis=2))
    return float(diameter ** 2 / quad_area(cell))


def corner_cells(kappa: float, sigma: float, layers: int) -> List[List[Tuple[float, float]]]:
    """
    Geometric mesh of (0,kappa)^2 graded toward (0,0)

    Ring j (between kappa sigma^(j+1) and kappa sigma^j) is split along its diagonal
    into two trapezoids; the innermost square is (0, kappa sigma^L)^2. The outer edges
    x = kappa and y = kappa carry no interior nodes.
    """
    cells = []
    for j in range(layers):
        outer = kappa * sigma ** j
        inner = kappa * sigma ** (j + 1)
        cells.append([(inner, 0.0), (outer, 0.0), (outer, outer), (inner, inner)])
        cells.append([(0.0, inner), (inner, inner), (outer, outer), (0.0, outer)])
    core = kappa * sigma ** layers
    cells.append(rectangle(0.0, core, 0.0, core))
    return cells


def expected_cell_count(kind: str, layers: int) -> int:
    """
    Number of cells of a pattern (ring enumeration: two trapezoids per geometric layer)
    """
    counts = {
        TRIVIAL: 1,
        BOUNDARY_LAYER: 2,
        TENSOR_PRODUCT: 2 * layers + 4,
        MIXED: 2 * layers + 5,
        GEOMETRIC: 2 * layers + 5,
    }
    if kind not in counts:
        raise MeshError(f"Unknown pattern kind: {kind}")
    return counts[kind]


def _mirror(cell: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    v0, v1, v2, v3 = cell
    return [(1.0 - v1[0], v1[1]), (1.0 - v0[0], v0[1]), (1.0 - v3[0], v3[1]), (1.0 - v2[0], v2[1])]


def build_pattern(kind: str, kappa: float = 0.5, sigma: float = 0.5, layers: int = 0,
                  mirrored: bool = False) -> PatternMesh:
    """
    Builds one of the admissible refinement patterns of the reference square

    Steps:
    1. Validate kappa, sigma and L
    2. Lay out the corner mesh in (0,kappa)^2 for corner-refined kinds
    3. Add the anisotropic strips and the large cells of the kind
    4. Mirror x -> 1-x when the corner refinement sits at (1,0)
    """
    if kind not in PATTERN_KINDS:
        raise MeshError(f"Unknown pattern kind: {kind}")
    if not 0.0 < kappa <= 0.5:
        raise MeshError(f"kappa must lie in (0, 1/2], got {kappa}")
    if not 0.0 < sigma < 1.0:
        raise MeshError(f"sigma must lie in (0, 1), got {sigma}")
    if layers < 0:
        raise MeshError(f"Number of geometric layers must be >= 0, got {layers}")
    if kind in (TENSOR_PRODUCT, MIXED, GEOMETRIC) and kappa * sigma ** layers < MIN_CORNER_SIZE:
        raise MeshError(f"kappa * sigma^L underflows for L={layers}")
    if mirrored and kind != MIXED:
        raise MeshError(f"Only the mixed pattern can be mirrored, got {kind}")

    cells: List[List[Tuple[float, float]]] = []
    tags: List[str] = []

    def add(cell, tag):
        cells.append(cell)
        tags.append(tag)

    h = 0.5 * (1.0 + kappa)
    if kind == TRIVIAL:
        add(rectangle(0.0, 1.0, 0.0, 1.0), LARGE)
    elif kind == BOUNDARY_LAYER:
        add(rectangle(0.0, 1.0, 0.0, kappa), ANISO)
        add(rectangle(0.0, 1.0, kappa, 1.0), LARGE)
    else:
        for cell in corner_cells(kappa, sigma, layers):
            add(cell, CORNER_LAYER)
        if kind == TENSOR_PRODUCT:
            add(rectangle(kappa, 1.0, 0.0, kappa), ANISO)
            add(rectangle(0.0, kappa, kappa, 1.0), ANISO)
            add(rectangle(kappa, 1.0, kappa, 1.0), LARGE)
        elif kind == MIXED:
            # one extra node at (0, h) on the edge x = 0 keeps the quadrilateral count even
            m = (0.5, 0.25 * (2.0 + h))
            add(rectangle(kappa, 1.0, 0.0, kappa), ANISO)
            add([(0.0, kappa), (kappa, kappa), m, (0.0, h)], LARGE)
            add([(kappa, kappa), (1.0, kappa), (1.0, 1.0), m], LARGE)
            add([m, (1.0, 1.0), (0.0, 1.0), (0.0, h)], LARGE)
        else:
            add([(kappa, 0.0), (h, 0.0), (h, h), (kappa, kappa)], LARGE)
            add([(h, 0.0), (1.0, 0.0), (1.0, 1.0), (h, h)], LARGE)
            add([(h, h), (1.0, 1.0), (0.0, 1.0), (0.0, h)], LARGE)
            add([(0.0, kappa), (kappa, kappa), (h, h), (0.0, h)], LARGE)

    if mirrored:
        cells = [_mirror(cell) for cell in cells]

    pattern = PatternMesh(kind, np.array(cells, dtype=float), tuple(tags), mirrored)
    logger.debug(f"Pattern {kind} (kappa={kappa:.3e}, sigma={sigma}, L={layers}): {len(pattern)} cells")
    return pattern
