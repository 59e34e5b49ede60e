"""Generators for the layered tripartite UPB families and their grid tilings.

Every state is an explicit :class:`ProductState` (one local vector per
party).  Tiles follow the outermost-layer decomposition of the
d_A x d_B x d_C cube: six tiles A1..A3, B1..B3 per layer, the corner
singletons A4/B4 (never part of the UPB), the inner block F of the
deepest layer, and the all-ones stopper S.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .linalg import Bipartition, PARTY_NAMES, check_dims, kron_all, root_of_unity

FAMILIES = ("example334", "tripartite", "layered", "shifts", "custom")


@dataclass(frozen=True)
class StateLabel:
    """Structured tag: tile name, layer index and index tuple."""

    tile: str
    layer: int = 0
    index: tuple[int, ...] = ()

    def display(self, family: str = "layered") -> str:
        if family == "example334":
            return _name_334(self)
        if self.tile in ("S",):
            return "S"
        idx = ",".join(str(i) for i in self.index)
        return f"{self.tile}^({self.layer})({idx})" if idx else f"{self.tile}^({self.layer})"

    def to_json(self) -> dict:
        return {"tile": self.tile, "layer": self.layer, "index": list(self.index)}

    @classmethod
    def from_json(cls, data: dict) -> "StateLabel":
        return cls(data["tile"], int(data.get("layer", 0)), tuple(int(i) for i in data.get("index", ())))


def _name_334(label: StateLabel) -> str:
    t = label.tile
    idx = ",".join(str(i) for i in label.index)
    if t == "S":
        return "S"
    if t == "F":
        return f"varphi({label.index[-1]})"
    if t in ("A4", "B4"):
        return "psi4" if t == "A4" else "phi4"
    if len(t) != 2 or t[0] not in "AB" or t[1] not in "123":
        return label.display("layered")
    stem = "psi" if t[0] == "A" else "phi"
    return f"{stem}{t[1]}({idx})"


@dataclass(frozen=True)
class ProductState:
    locals: tuple[np.ndarray, ...]
    label: StateLabel

    def __post_init__(self):
        for v in self.locals:
            if not np.any(v):
                raise ValueError(f"local vector of {self.label} is zero")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.locals)

    def vector(self) -> np.ndarray:
        return kron_all(self.locals)

    def scaled(self, factor: complex, party: int = 0) -> "ProductState":
        locs = list(self.locals)
        locs[party] = locs[party] * factor
        return replace(self, locals=tuple(locs))


def product_state(locals_, label) -> ProductState:
    return ProductState(tuple(np.asarray(v, dtype=complex) for v in locals_), label)


@dataclass(frozen=True)
class StateSet:
    dims: tuple[int, ...]
    states: tuple[ProductState, ...]
    layer: int = 0
    family: str = "custom"

    def __post_init__(self):
        labels = [s.label for s in self.states]
        if len(set(labels)) != len(labels):
            raise ValueError("state labels must be unique")
        for s in self.states:
            if s.dims != self.dims:
                raise ValueError(f"state {s.label} has dims {s.dims}, expected {self.dims}")

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def labels(self) -> list[StateLabel]:
        return [s.label for s in self.states]

    def names(self) -> list[str]:
        return [s.label.display(self.family) for s in self.states]

    def vectors(self) -> np.ndarray:
        return np.array([s.vector() for s in self.states])

    def without(self, tiles: Iterable[str]) -> "StateSet":
        tiles = set(tiles)
        return replace(self, states=tuple(s for s in self.states if s.label.tile not in tiles))

    def get(self, label: StateLabel) -> ProductState:
        for s in self.states:
            if s.label == label:
                return s
        raise KeyError(label)

    def find(self, name: str) -> ProductState:
        for s in self.states:
            if s.label.display(self.family) == name:
                return s
        raise KeyError(name)


# ---------------------------------------------------------------------------
# local vector families


@dataclass(frozen=True)
class LocalVectorFamily:
    kind: str  # "eta" | "xi" | "beta"
    dim: int
    layer: int
    index: int


def _layer_width(dim: int, layer: int) -> int:
    width = dim - 2 * layer
    if width < 3:
        raise ValueError(f"layer {layer} does not fit in local dimension {dim}")
    return width


def local_vector(kind: str, dim: int, layer: int, index: int) -> np.ndarray:
    """Fourier-type local vectors of the layer-``layer`` tiling.

    eta lives on coordinates layer..width+layer-2, xi on the same range
    shifted by one, beta on layer+1..width+layer-2 (width = dim - 2*layer).
    """
    width = _layer_width(dim, layer)
    if kind in ("eta", "xi"):
        period = width - 1
        shift = 0 if kind == "eta" else 1
    elif kind == "beta":
        period = width - 2
        shift = 1
    else:
        raise ValueError(f"unknown local vector kind {kind!r}")
    if not 0 <= index < period:
        raise ValueError(f"{kind} index {index} out of range Z_{period}")
    w = root_of_unity(period)
    v = np.zeros(dim, dtype=complex)
    for t in range(period):
        v[layer + t + shift] = w ** ((index * t) % period)
    return v


def local_vector_of(f: LocalVectorFamily) -> np.ndarray:
    return local_vector(f.kind, f.dim, f.layer, f.index)


def basis_vector(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1
    return v


# ---------------------------------------------------------------------------
# tiles


def validate_layered(dims: Sequence[int], n: int) -> tuple[int, int, int]:
    dims = check_dims(dims)
    if len(dims) != 3:
        raise ValueError("the layered construction is tripartite")
    dA, dB, dC = dims
    if not 3 <= dA <= dB <= dC:
        raise ValueError(f"need 3 <= d_A <= d_B <= d_C, got {dims}")
    nmax = (dA - 3) // 2
    if not 0 <= n <= nmax:
        raise ValueError(f"layer n={n} out of range 0..{nmax} for d_A={dA}")
    return dims


def _tile_states(dims, t: int, tile: str, include_zero: bool) -> list[ProductState]:
    """All states of one tile of layer t; (0,0) index dropped unless include_zero."""
    dA, dB, dC = dims
    A, B, C = (d - 2 * t for d in dims)
    eta = lambda d, s: local_vector("eta", d, t, s)  # noqa: E731
    xi = lambda d, s: local_vector("xi", d, t, s)  # noqa: E731
    e = basis_vector
    lab = lambda idx: StateLabel(tile, t, idx)  # noqa: E731

    if tile == "A4":
        return [product_state([e(dA, dA - 1 - t), e(dB, dB - 1 - t), e(dC, dC - 1 - t)], lab(()))]
    if tile == "B4":
        return [product_state([e(dA, t), e(dB, t), e(dC, t)], lab(()))]

    makers = {
        "A1": ((A - 1, C - 1), lambda i, k: [xi(dA, i), e(dB, t), eta(dC, k)]),
        "A2": ((A - 1, B - 1), lambda i, j: [xi(dA, i), eta(dB, j), e(dC, dC - 1 - t)]),
        "A3": ((B - 1, C - 1), lambda j, k: [e(dA, dA - 1 - t), xi(dB, j), eta(dC, k)]),
        "B1": ((A - 1, C - 1), lambda i, k: [eta(dA, i), e(dB, dB - 1 - t), xi(dC, k)]),
        "B2": ((A - 1, B - 1), lambda i, j: [eta(dA, i), xi(dB, j), e(dC, t)]),
        "B3": ((B - 1, C - 1), lambda j, k: [e(dA, t), eta(dB, j), xi(dC, k)]),
    }
    if tile == "F":
        ranges = (A - 2, B - 2, C - 2)
        out = []
        for idx in itertools.product(*map(range, ranges)):
            if idx == (0, 0, 0) and not include_zero:
                continue
            locs = [local_vector("beta", d, t, s) for d, s in zip(dims, idx)]
            out.append(product_state(locs, lab(idx)))
        return out
    ranges, make = makers[tile]
    out = []
    for idx in itertools.product(*map(range, ranges)):
        if idx == (0, 0) and not include_zero:
            continue
        out.append(product_state(make(*idx), lab(idx)))
    return out


LAYER_TILES = ("A1", "A2", "A3", "B1", "B2", "B3")


def stopper(dims) -> ProductState:
    return product_state([np.ones(d) for d in dims], StateLabel("S", 0, ()))


def build_layered(dims: Sequence[int], n: int = 0) -> StateSet:
    """The strongly nonlocal UPB of size d_A d_B d_C - 8(n+1).

    Layers 0..n contribute their six tiles (minus the (0,0) states), layer n
    also contributes its inner block F (minus (0,0,0)), and the stopper is
    appended last.
    """
    dims = validate_layered(dims, n)
    states: list[ProductState] = []
    for t in range(n + 1):
        for tile in LAYER_TILES:
            states.extend(_tile_states(dims, t, tile, include_zero=False))
    states.extend(_tile_states(dims, n, "F", include_zero=False))
    states.append(stopper(dims))
    family = "tripartite" if n == 0 else "layered"
    return StateSet(dims, tuple(states), n, family)


def build_334() -> StateSet:
    """The 28-state UPB in 3x3x4."""
    return replace(build_layered((3, 3, 4), 0), family="example334")


def removed_states(dims: Sequence[int], n: int = 0) -> tuple[StateSet, ProductState]:
    """The 8(n+1) excluded states, plus the F^(n)(0,0,0) state the stopper replaces.

    Returned separately because the completeness count treats the flagged
    state on its own.
    """
    dims = validate_layered(dims, n)
    out: list[ProductState] = []
    for t in range(n + 1):
        for tile in ("A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"):
            if tile in ("A4", "B4"):
                out.extend(_tile_states(dims, t, tile, include_zero=True))
            else:
                for s in _tile_states(dims, t, tile, include_zero=True):
                    if s.label.index == (0, 0):
                        out.append(s)
    flagged = next(
        s for s in _tile_states(dims, n, "F", include_zero=True) if s.label.index == (0, 0, 0)
    )
    family = "example334" if dims == (3, 3, 4) and n == 0 else "layered"
    return StateSet(dims, tuple(out), n, family), flagged


def complete_basis(dims: Sequence[int], n: int = 0) -> StateSet:
    """(UPB minus stopper) + removed + flagged: a complete orthogonal product basis."""
    upb = build_layered(dims, n)
    removed, flagged = removed_states(dims, n)
    states = [s for s in upb.states if s.label.tile != "S"] + list(removed.states) + [flagged]
    return StateSet(upb.dims, tuple(states), n, "custom")


def shifts_upb() -> StateSet:
    """The four-state SHIFTS UPB in 2x2x2."""
    s = 1 / np.sqrt(2)
    zero, one = np.array([1, 0]), np.array([0, 1])
    plus, minus = np.array([s, s]), np.array([s, -s])
    rows = [
        [zero, one, plus],
        [one, plus, zero],
        [plus, zero, one],
        [minus, minus, minus],
    ]
    states = tuple(product_state(r, StateLabel("psi", 0, (i,))) for i, r in enumerate(rows))
    return StateSet((2, 2, 2), states, 0, "shifts")


# ---------------------------------------------------------------------------
# grid tilings


@dataclass
class Tile:
    label: str
    layer: int
    cells: frozenset  # {(row, col)}
    removed: bool = False


@dataclass
class GridTiling:
    cut: Bipartition
    shape: tuple[int, int]
    tiles: list[Tile] = field(default_factory=list)
    column_labels: list[str] = field(default_factory=list)
    row_labels: list[str] = field(default_factory=list)

    def cell_owner(self) -> dict:
        owner = {}
        for tile in self.tiles:
            for cell in tile.cells:
                if cell in owner:
                    raise ValueError(f"cell {cell} covered twice ({owner[cell]}, {tile.label})")
                owner[cell] = tile
        return owner

    def tile(self, label: str, layer: int = 0) -> Tile:
        for t in self.tiles:
            if t.label == label and t.layer == layer:
                return t
        raise KeyError((label, layer))

    def point_reflect(self, cells) -> frozenset:
        r, c = self.shape
        return frozenset((r - 1 - i, c - 1 - j) for i, j in cells)


def _support_cells(states, dims, cut: Bipartition) -> frozenset:
    cells = set()
    for s in states:
        supports = [np.flatnonzero(np.abs(v) > 0) for v in s.locals]
        for combo in itertools.product(*supports):
            row = np.ravel_multi_index([combo[p] for p in cut.left], [dims[p] for p in cut.left])
            col = np.ravel_multi_index([combo[p] for p in cut.right], [dims[p] for p in cut.right])
            cells.add((int(row), int(col)))
    return frozenset(cells)


def grid(dims: Sequence[int], n: int, cut: Bipartition | str) -> GridTiling:
    """Cells of each tile under a single-party-vs-rest cut.

    A tile's cells are the computational-basis supports of its states
    (including the dropped (0,0) state, which spans the same block).
    """
    dims = validate_layered(dims, n)
    if isinstance(cut, str):
        cut = Bipartition.parse(cut, 3)
    cut.validate(3)
    if len(cut.left) != 1:
        raise ValueError(f"grid cut must isolate one party on the left, got {cut}")
    nrows = dims[cut.left[0]]
    right_dims = [dims[p] for p in cut.right]
    ncols = int(np.prod(right_dims))
    tiles = []
    for t in range(n + 1):
        for name in ("A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"):
            states = _tile_states(dims, t, name, include_zero=True)
            tiles.append(Tile(name, t, _support_cells(states, dims, cut), removed=name in ("A4", "B4")))
    tiles.append(Tile("F", n, _support_cells(_tile_states(dims, n, "F", True), dims, cut)))
    cols = ["".join(str(i) for i in np.unravel_index(c, right_dims)) for c in range(ncols)]
    rows = [str(i) for i in range(nrows)]
    return GridTiling(cut, (nrows, ncols), tiles, cols, rows)


_LAYER_GLYPHS = ["123456", "abcdef", "ghijkl", "mnopqr", "stuvwx"]
_TILE_ORDER = ("A1", "A2", "A3", "B1", "B2", "B3")


def glyph(tile: Tile) -> str:
    if tile.removed:
        return "#"
    if tile.label == "F":
        return "F"
    return _LAYER_GLYPHS[tile.layer][_TILE_ORDER.index(tile.label)]


def render_grid(tiling: GridTiling) -> str:
    """ASCII picture: one glyph per tile, '#' for the removed corner cells."""
    owner = tiling.cell_owner()
    nrows, ncols = tiling.shape
    width = max(len(c) for c in tiling.column_labels)
    right = "".join(PARTY_NAMES[p] for p in tiling.cut.right)
    left = "".join(PARTY_NAMES[p] for p in tiling.cut.left)
    corner = f"{left}\\{right}"
    pad = len(corner) + 1
    lines = [corner.ljust(pad) + " ".join(c.rjust(width) for c in tiling.column_labels)]
    for r in range(nrows):
        cells = []
        for c in range(ncols):
            tile = owner.get((r, c))
            cells.append((glyph(tile) if tile else ".").rjust(width))
        lines.append(tiling.row_labels[r].ljust(pad) + " ".join(cells))
    lines.append("")
    legend = []
    for tile in tiling.tiles:
        name = "F" if tile.label == "F" else tile.label
        legend.append(f"{glyph(tile)}={name}^({tile.layer})")
    lines.append("legend: " + " ".join(legend) + "  (# = removed corner state)")
    return "\n".join(lines)
