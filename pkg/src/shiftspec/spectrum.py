"""Spectrum membership, complex-plane scanning and boundary extraction.

Membership at a point: with an invertible shift part, lambda belongs to
the spectrum iff both growth rates are >= 1; with a non-invertible shift
part the forward rate alone decides.  Numerically the test runs against a
tolerance band, R >= 1 - eps, because thin spectra (circles, lemniscates)
are measure-zero curves that an exact >= 1 test on floating-point
estimates would miss entirely.  Ties at exactly 1 - eps classify inside
(spectra are closed sets).

Scanning evaluates the signed log-margin field

    phi(lambda) = min(log R+, log R-)        (invertible shift)
    phi(lambda) = log R+                     (non-invertible)

on cell corners of a rectangular grid; a cell with mixed corner flags is a
boundary cell.  Cells whose corner values merely come close to the
threshold (within one observed corner oscillation) are also refined, so a
band thinner than a cell cannot slip between corner samples undetected.
Base-cell classifications are fixed by the base corners; refinement only
adds finer leaf detail used by area estimates and boundary extraction.

For n-shifts the operator splits over residue classes mod n into n
ordinary weighted shifts, and the spectrum is the union of the residue
spectra; the scanner folds that union into a single field, so an n = 1
"union" run is bit-identical to a direct scan.

Boundary extraction is marching squares over the refined leaves.  Fat
spectra trace the inside/outside interface of the band.  Thin spectra
would yield the two offset edges of the band instead; there the extractor
switches to the centerline field psi = (log R+ - log R-) / 2 (product over
residue classes), whose zero set is exactly the set where both rates equal
1, crossed transversally.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, SpecError
from .radii import RadiusEstimate, rate_field
from .shifts import ShiftModel

__all__ = [
    "OUTSIDE",
    "INSIDE",
    "BOUNDARY",
    "CLASS_NAMES",
    "MembershipResult",
    "RegionGrid",
    "BoundaryComponent",
    "BoundaryPolyline",
    "membership",
    "scan",
    "decompose_union",
    "extract_boundary",
    "default_box",
]

OUTSIDE, INSIDE, BOUNDARY = 0, 1, 2
CLASS_NAMES = ("outside", "inside", "boundary")

_BIG = 64.0  # log-scale clamp for infinities in oscillation/interpolation logic


@dataclass(frozen=True)
class MembershipResult:
    lam: complex
    forward: RadiusEstimate
    backward: RadiusEstimate | None
    in_spectrum: bool
    margin: float


@dataclass
class RegionGrid:
    """Scanned classification of a rectangular lambda region.

    base_class/depth are (ny, nx) arrays indexed [iy, ix]; node fields live
    on the virtual fine lattice of the deepest refinement level, keyed by
    integer node coordinates (gx, gy) with spacing (hx, hy) / 2**max_depth.
    leaves are the terminal cells (level, cx, cy, cls) of the refinement.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    k_max: int
    eps: float
    tau: float
    max_depth: int
    invertible: bool
    base_class: np.ndarray
    depth: np.ndarray
    node_phi: dict = field(repr=False)
    node_psi: dict | None = field(repr=False)
    leaves: list = field(repr=False)
    center_r_plus: np.ndarray = field(repr=False)
    center_r_minus: np.ndarray = field(repr=False)
    center_margin: np.ndarray = field(repr=False)

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def cell_diagonal(self) -> float:
        return float(np.hypot(self.hx, self.hy))

    def node_xy(self, gx: int, gy: int) -> tuple[float, float]:
        sc = 1 << self.max_depth
        return (self.x0 + gx * self.hx / sc, self.y0 + gy * self.hy / sc)

    def cell_center(self, ix: int, iy: int) -> complex:
        return complex(self.x0 + (ix + 0.5) * self.hx, self.y0 + (iy + 0.5) * self.hy)

    def area_estimate(self) -> float:
        """Leaf-cell area: inside counts fully, boundary counts half."""
        total = 0.0
        cell = self.hx * self.hy
        for level, _cx, _cy, cls in self.leaves:
            a = cell / (4.0 ** level)
            if cls == INSIDE:
                total += a
            elif cls == BOUNDARY:
                total += 0.5 * a
        return total

    def class_counts(self) -> dict[str, int]:
        return {name: int(np.sum(self.base_class == code))
                for code, name in enumerate(CLASS_NAMES)}


@dataclass(frozen=True)
class BoundaryComponent:
    vertices: list
    closed: bool


@dataclass(frozen=True)
class BoundaryPolyline:
    components: list


def default_box(model: ShiftModel) -> tuple[float, float, float, float]:
    """Square box guaranteed to enclose the spectrum.

    Centered at the mean sampled diagonal value c; the spectrum lies in
    |lambda - c| <= sup|w| + sup|d - c| (shift plus recentered diagonal),
    padded by 10%.
    """
    a, b = model.diagonals.window(2)
    dvals = model.diagonals.values(a, b)
    c = complex(np.mean(dvals))
    half = (model.weight_sup + float(np.max(np.abs(dvals - c)))) * 1.1
    if half == 0.0:
        half = 1.0
    return (c.real - half, c.real + half, c.imag - half, c.imag + half)


def _check_box(model: ShiftModel, box) -> None:
    a, b = model.diagonals.window(2)
    dvals = model.diagonals.values(a, b)
    c = complex(np.mean(dvals))
    rho = model.weight_sup + float(np.max(np.abs(dvals - c)))
    x0, x1, y0, y1 = box
    if x0 > c.real - rho or x1 < c.real + rho or y0 > c.imag - rho or y1 < c.imag + rho:
        warnings.warn(
            f"scan box {box} does not contain the spectral enclosure "
            f"|lambda - {c}| <= {rho}; parts of the spectrum may be missed",
            stacklevel=3,
        )


class _UnionField:
    """phi/psi/rate evaluation folded over residue submodels."""

    def __init__(self, submodels: list[ShiftModel], k_max: int, threads: int):
        self.submodels = submodels
        self.k_max = k_max
        self.threads = threads
        self.invertible = all(m.invertible_shift for m in submodels)

    def __call__(self, lams: np.ndarray):
        phis, psis, lps, lms = [], [], [], []
        for m in self.submodels:
            f = rate_field(m, lams, self.k_max, want_minus=m.invertible_shift,
                           threads=self.threads)
            lps.append(f.log_plus)
            if m.invertible_shift:
                lms.append(f.log_minus)
                phis.append(np.minimum(f.log_plus, f.log_minus))
                psis.append(0.5 * (np.clip(f.log_plus, -_BIG, _BIG)
                                   - np.clip(f.log_minus, -_BIG, _BIG)))
            else:
                phis.append(f.log_plus)
        phi = phis[0] if len(phis) == 1 else np.maximum.reduce(phis)
        log_plus = lps[0] if len(lps) == 1 else np.maximum.reduce(lps)
        log_minus = None
        if lms:
            log_minus = lms[0] if len(lms) == 1 else np.maximum.reduce(lms)
        psi = None
        if self.invertible:
            psi = psis[0] if len(psis) == 1 else np.multiply.reduce(psis)
        return phi, psi, log_plus, log_minus


def membership(model: ShiftModel, lam: complex, k_max: int = 64,
               eps: float | None = None) -> MembershipResult:
    """Classify a single lambda.  For n-shifts the residue union applies."""
    if eps is None:
        eps = 10.0 / k_max
    tau = float(np.log1p(-eps))
    best = None
    for m in model.submodels():
        f = rate_field(m, np.array([lam]), k_max, want_minus=m.invertible_shift)
        lp = float(f.log_plus[0])
        if m.invertible_shift:
            lm = float(f.log_minus[0])
            phi = min(lp, lm)
            bwd = RadiusEstimate(float(np.exp(lm)), lm, f.k_max,
                                 f.method if np.isfinite(lm) or f.method.startswith("closed")
                                 else "truncated_root",
                                 float(f.unc_minus[0]))
        else:
            phi = lp
            bwd = None
        fwd = RadiusEstimate(float(np.exp(lp)), lp, f.k_max,
                             f.method if np.isfinite(lp) or f.method.startswith("closed")
                             else "truncated_root",
                             float(f.unc_plus[0]))
        if best is None or phi > best[0]:
            best = (phi, fwd, bwd)
    phi, fwd, bwd = best
    return MembershipResult(lam=complex(lam), forward=fwd, backward=bwd,
                            in_spectrum=bool(phi >= tau), margin=float(abs(phi)))


def _corner_keys(level: int, cx: int, cy: int, sc: int):
    st = sc >> level
    gx, gy = cx * st, cy * st
    return ((gx, gy), (gx + st, gy), (gx + st, gy + st), (gx, gy + st))


def _classify(flags) -> int:
    s = sum(1 for v in flags if v)
    if s == 4:
        return INSIDE
    if s == 0:
        return OUTSIDE
    return BOUNDARY


def _want_refine(cls: int, f4, tau: float) -> bool:
    if cls == BOUNDARY:
        return True
    fc = np.clip(f4, tau - _BIG, tau + _BIG)
    osc = float(fc.max() - fc.min())
    if cls == OUTSIDE:
        return bool(fc.max() >= tau - osc)
    return bool(fc.min() <= tau + osc)


def _edge_keys(level: int, cx: int, cy: int, sc: int):
    """All fine-lattice keys on the cell's four edges (corners included)."""
    st = sc >> level
    gx, gy = cx * st, cy * st
    for t in range(st + 1):
        yield (gx + t, gy)
        yield (gx + t, gy + st)
        yield (gx, gy + t)
        yield (gx + st, gy + t)


def _boundary_mixed(values: dict, level: int, cx: int, cy: int, sc: int,
                    thresh: float) -> bool:
    """Sign variation of values - thresh among evaluated nodes on the cell edges.

    Finer neighbors leave hanging nodes on shared edges; a contour that
    crosses an edge without separating the cell's own corners still flips
    the sign at one of those nodes.
    """
    has_lo = has_hi = False
    for key in _edge_keys(level, cx, cy, sc):
        v = values.get(key)
        if v is None:
            continue
        if v >= thresh:
            has_hi = True
        else:
            has_lo = True
        if has_lo and has_hi:
            return True
    return False


def _scan_submodels(submodels, *, box, resolution, k_max, eps, max_depth,
                    cell_budget, threads) -> RegionGrid:
    nx, ny = resolution
    if nx < 1 or ny < 1:
        raise SpecError("resolution must be positive")
    if max_depth < 0:
        raise SpecError("max_depth must be >= 0")
    if eps is None:
        eps = 10.0 / k_max
    if not 0.0 <= eps < 1.0:
        raise SpecError("eps must lie in [0, 1)")
    tau = float(np.log1p(-eps))
    x0, x1, y0, y1 = (float(v) for v in box)
    if not (x1 > x0 and y1 > y0):
        raise SpecError("box must satisfy x0 < x1 and y0 < y1")

    evaluator = _UnionField(submodels, k_max, threads)
    sc = 1 << max_depth
    fx = (x1 - x0) / nx / sc
    fy = (y1 - y0) / ny / sc

    node_phi: dict = {}
    node_psi: dict | None = {} if evaluator.invertible else None

    def ensure(keys) -> None:
        new = sorted(set(keys) - node_phi.keys())
        if not new:
            return
        lams = np.array([complex(x0 + gx * fx, y0 + gy * fy) for gx, gy in new])
        phi, psi, _, _ = evaluator(lams)
        for key, p in zip(new, phi):
            node_phi[key] = float(p)
        if node_psi is not None:
            for key, s in zip(new, psi):
                node_psi[key] = float(s)

    ensure([(ix * sc, iy * sc) for iy in range(ny + 1) for ix in range(nx + 1)])

    base_class = np.empty((ny, nx), dtype=np.int8)
    depth = np.zeros((ny, nx), dtype=np.int8)
    leaves: list = []
    active: list = []
    for iy in range(ny):
        for ix in range(nx):
            f4 = np.array([node_phi[k] for k in _corner_keys(0, ix, iy, sc)])
            cls = _classify([v >= tau for v in f4])
            base_class[iy, ix] = cls
            if max_depth > 0 and _want_refine(cls, f4, tau):
                active.append((ix, iy))
            else:
                leaves.append((0, ix, iy, cls))

    total_children = 0

    def check_budget(n_new: int) -> int:
        total = n_new + total_children
        if total > cell_budget:
            raise BudgetExceeded(
                f"refinement produced {total} cells (budget {cell_budget})",
                count=total, budget=cell_budget)
        return total

    for level in range(1, max_depth + 1):
        if not active:
            break
        children = [(2 * cx + dx, 2 * cy + dy)
                    for cx, cy in active for dy in (0, 1) for dx in (0, 1)]
        total_children = check_budget(len(children))
        keys = []
        for cx, cy in children:
            keys.extend(_corner_keys(level, cx, cy, sc))
        ensure(keys)
        nxt = []
        for cx, cy in children:
            f4 = np.array([node_phi[k] for k in _corner_keys(level, cx, cy, sc)])
            cls = _classify([v >= tau for v in f4])
            depth[cy >> level, cx >> level] = level
            if level < max_depth and _want_refine(cls, f4, tau):
                nxt.append((cx, cy))
            else:
                leaves.append((level, cx, cy, cls))
        active = nxt

    # Harmonization: any leaf whose boundary nodes (own corners or hanging
    # nodes left by finer neighbors) show a sign crossing in the band field
    # or the centerline field gets subdivided, until every crossing sits in
    # a deepest-level leaf.  Contours then never touch a coarse leaf, so
    # marching-squares segments meet exactly at shared edges.
    while max_depth > 0:
        keep, split = [], []
        for leaf in leaves:
            level, cx, cy, _cls = leaf
            if level < max_depth and (
                    _boundary_mixed(node_phi, level, cx, cy, sc, tau)
                    or (node_psi is not None
                        and _boundary_mixed(node_psi, level, cx, cy, sc, 0.0))):
                split.append(leaf)
            else:
                keep.append(leaf)
        if not split:
            break
        total_children = check_budget(4 * len(split))
        split.sort()
        children = [(level + 1, 2 * cx + dx, 2 * cy + dy)
                    for level, cx, cy, _cls in split
                    for dy in (0, 1) for dx in (0, 1)]
        keys = []
        for level, cx, cy in children:
            keys.extend(_corner_keys(level, cx, cy, sc))
        ensure(keys)
        for level, cx, cy in children:
            f4 = np.array([node_phi[k] for k in _corner_keys(level, cx, cy, sc)])
            cls = _classify([v >= tau for v in f4])
            depth[cy >> level, cx >> level] = max(depth[cy >> level, cx >> level], level)
            keep.append((level, cx, cy, cls))
        leaves = keep

    centers = np.array([complex(x0 + (ix + 0.5) * (x1 - x0) / nx,
                                y0 + (iy + 0.5) * (y1 - y0) / ny)
                        for iy in range(ny) for ix in range(nx)])
    phi_c, _psi_c, lp_c, lm_c = evaluator(centers)
    with np.errstate(over="ignore"):
        r_plus = np.exp(lp_c).reshape(ny, nx)
        r_minus = (np.exp(lm_c).reshape(ny, nx) if lm_c is not None
                   else np.full((ny, nx), np.nan))
    margin = np.abs(phi_c).reshape(ny, nx)

    return RegionGrid(x0=x0, x1=x1, y0=y0, y1=y1, nx=nx, ny=ny, k_max=k_max,
                      eps=eps, tau=tau, max_depth=max_depth,
                      invertible=evaluator.invertible,
                      base_class=base_class, depth=depth,
                      node_phi=node_phi, node_psi=node_psi, leaves=leaves,
                      center_r_plus=r_plus, center_r_minus=r_minus,
                      center_margin=margin)


def scan(model: ShiftModel, *, box=None, resolution=(128, 128), k_max: int = 64,
         eps: float | None = None, max_depth: int = 3,
         cell_budget: int = 250_000, threads: int = 1) -> RegionGrid:
    """Classify a lambda grid for a step-1 model (see decompose_union for n-shifts)."""
    if model.step != 1:
        raise SpecError("scan requires a step-1 model; use decompose_union")
    if box is None:
        box = default_box(model)
    else:
        _check_box(model, box)
    return _scan_submodels([model], box=box, resolution=resolution, k_max=k_max,
                           eps=eps, max_depth=max_depth, cell_budget=cell_budget,
                           threads=threads)


def decompose_union(model: ShiftModel, *, box=None, resolution=(128, 128),
                    k_max: int = 64, eps: float | None = None, max_depth: int = 3,
                    cell_budget: int = 250_000, threads: int = 1) -> RegionGrid:
    """Scan an n-shift as the cell-wise union of its residue-class spectra.

    With step 1 this is the identical computation to scan (bit for bit).
    """
    if box is None:
        box = default_box(model)
    else:
        _check_box(model, box)
    return _scan_submodels(model.submodels(), box=box, resolution=resolution,
                           k_max=k_max, eps=eps, max_depth=max_depth,
                           cell_budget=cell_budget, threads=threads)


# marching-squares case table; edges 0=bottom, 1=right, 2=top, 3=left
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(3, 2)], 9: [(0, 2)],
    11: [(1, 2)], 12: [(3, 1)], 13: [(0, 1)], 14: [(3, 0)],
}


def _cell_segments(pts, f4, level_value: float):
    """Segments of the level set inside one cell (linear interpolation)."""
    flags = tuple(v >= level_value for v in f4)
    case = flags[0] + 2 * flags[1] + 4 * flags[2] + 8 * flags[3]
    if case in (0, 15):
        return []
    fc = np.clip(f4, level_value - _BIG, level_value + _BIG)
    # edge -> (corner index pair), canonical orientation shared with neighbors
    pairs = ((0, 1), (1, 2), (3, 2), (0, 3))

    def cross(edge):
        i, j = pairs[edge]
        fi, fj = fc[i], fc[j]
        t = (level_value - fi) / (fj - fi)
        t = min(max(t, 0.0), 1.0)
        (xi, yi), (xj, yj) = pts[i], pts[j]
        return (xi + t * (xj - xi), yi + t * (yj - yi))

    if case in (5, 10):
        center_in = float(np.mean(fc)) >= level_value
        if case == 5:
            edge_pairs = [(0, 1), (3, 2)] if center_in else [(0, 3), (1, 2)]
        else:
            edge_pairs = [(0, 3), (1, 2)] if center_in else [(0, 1), (3, 2)]
    else:
        edge_pairs = _CASES[case]
    segs = []
    for e1, e2 in edge_pairs:
        p, q = cross(e1), cross(e2)
        if p != q:
            segs.append((p, q))
    return segs


def _assemble(segments) -> list[BoundaryComponent]:
    adj: dict = {}
    order = sorted(range(len(segments)),
                   key=lambda s: tuple(sorted(segments[s])))
    for sid in order:
        p, q = segments[sid]
        adj.setdefault(p, []).append((q, sid))
        adj.setdefault(q, []).append((p, sid))
    used = set()

    def walk(start):
        chain = [start]
        cur = start
        while True:
            nxts = [(q, sid) for q, sid in adj[cur] if sid not in used]
            if not nxts:
                break
            q, sid = min(nxts)
            used.add(sid)
            chain.append(q)
            cur = q
        return chain

    components = []
    for endpoint in sorted(k for k, lst in adj.items() if len(lst) == 1):
        if all(sid in used for _, sid in adj[endpoint]):
            continue
        chain = walk(endpoint)
        if len(chain) > 1:
            components.append(BoundaryComponent(
                [complex(x, y) for x, y in chain], closed=False))
    for sid in order:
        if sid in used:
            continue
        start = min(segments[sid])
        chain = walk(start)
        if len(chain) > 1:
            closed = chain[0] == chain[-1]
            if closed:
                chain = chain[:-1]
            components.append(BoundaryComponent(
                [complex(x, y) for x, y in chain], closed=closed))
    components.sort(key=lambda c: min((v.real, v.imag) for v in c.vertices))
    return components


def _has_fat_interior(grid: RegionGrid) -> bool:
    """True when some base cell and its 4 edge neighbors are all inside."""
    inside = grid.base_class == INSIDE
    if grid.ny < 3 or grid.nx < 3:
        return bool(inside.any())
    core = (inside[1:-1, 1:-1] & inside[:-2, 1:-1] & inside[2:, 1:-1]
            & inside[1:-1, :-2] & inside[1:-1, 2:])
    return bool(core.any())


def extract_boundary(grid: RegionGrid, mode: str = "auto") -> BoundaryPolyline:
    """Polylines tracing the spectrum boundary on the refined leaves.

    mode "band" traces the inside/outside interface of the eps-band;
    "centerline" traces the zero set of psi (exact thin-spectrum curve,
    invertible shifts only); "auto" picks centerline for thin spectra.
    """
    if mode not in ("auto", "band", "centerline"):
        raise SpecError(f"unknown extraction mode {mode!r}")
    if mode == "auto":
        mode = ("centerline" if grid.invertible and not _has_fat_interior(grid)
                else "band")
    if mode == "centerline":
        if grid.node_psi is None:
            raise SpecError("centerline extraction needs an invertible shift part")
        values, level_value = grid.node_psi, 0.0
    else:
        values, level_value = grid.node_phi, grid.tau

    sc = 1 << grid.max_depth
    segments = []
    for level, cx, cy, _cls in sorted(grid.leaves):
        keys = _corner_keys(level, cx, cy, sc)
        f4 = np.array([values[k] for k in keys])
        pts = [grid.node_xy(gx, gy) for gx, gy in keys]
        segments.extend(_cell_segments(pts, f4, level_value))
    return BoundaryPolyline(_assemble(segments))
