"""Limit-set covers, h-neighbourhoods, the disk-union surrogate domain and Bergman kernels."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .schottky import Disk, Mobius, SchottkyGroup
from .transfer import DiskDomain
from .words import DEFAULT_WORD_CAP, ResourceCapError, arrow, enumerate_words, image_disk, word_count, word_map


class SurrogateOverlapError(ValueError):
    """Surrogate disks from different Schottky disks would overlap (h too large)."""


class OutsideDomainError(ValueError):
    pass


# -- covers of the limit set -------------------------------------------------


def limit_set_cover(group: SchottkyGroup, depth: int, cap: int = DEFAULT_WORD_CAP) -> np.ndarray:
    """Sorted (left, right) rows of the intervals I_a over words of the given length."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if word_count(group.m, depth) > cap:
        raise ResourceCapError(f"depth {depth} needs {word_count(group.m, depth)} words (cap {cap})")
    # breadth-first, carrying the map of each word's parent: D_w = gamma_{w'}(D_{w_n})
    level = [((a,), Mobius.identity()) for a in group.letters]
    for _ in range(depth - 1):
        level = [
            (w + (c,), g @ group.gen(w[-1]))
            for w, g in level
            for c in group.letters
            if arrow(group.m, w, c)
        ]
    rows = []
    for w, g in level:
        d = image_disk(g, group.disk(w[-1]))
        rows.append((d.center - d.radius, d.center + d.radius))
    rows.sort()
    return np.array(rows)


def cover_depth(group: SchottkyGroup, h: float, cap: int = DEFAULT_WORD_CAP) -> tuple[int, np.ndarray]:
    """Smallest depth whose intervals are all shorter than h/10."""
    depth = 1
    while True:
        cover = limit_set_cover(group, depth, cap)
        if np.max(cover[:, 1] - cover[:, 0]) < h / 10:
            return depth, cover
        depth += 1


def _merge(intervals: np.ndarray) -> np.ndarray:
    out = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return np.array(out)


@dataclass(frozen=True)
class IntervalCover:
    h: float
    components: np.ndarray  # (N, 2) sorted, disjoint
    depth: int

    @property
    def N(self) -> int:
        return len(self.components)


def lambda_neighbourhood(group: SchottkyGroup, h: float, cap: int = DEFAULT_WORD_CAP) -> IntervalCover:
    """Connected components of the real h-neighbourhood of the limit set."""
    if not h > 0:
        raise ValueError("h must be positive")
    depth, cover = cover_depth(group, h, cap)
    fat = np.column_stack([cover[:, 0] - h, cover[:, 1] + h])
    return IntervalCover(h, _merge(fat), depth)


# -- surrogate domain --------------------------------------------------------


@dataclass(frozen=True)
class DiskUnionDomain(DiskDomain):
    """Disjoint disks covering the complex h-neighbourhood of the limit set."""

    members: tuple[int, ...] = ()  # number of h-components merged into each disk

    @property
    def volume(self) -> float:
        return float(sum(math.pi * d.radius**2 for d in self.disks))

    def index_of(self, z) -> np.ndarray:
        """Index of the disk holding each point, -1 outside."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        idx = np.full(z.shape, -1)
        for i, d in enumerate(self.disks):
            idx[np.abs(z - d.center) < d.radius] = i
        return idx

    def boundary_distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        best = np.full(z.shape, -np.inf)
        for d in self.disks:
            best = np.maximum(best, d.radius - np.abs(z - d.center))
        return best


def omega_surrogate(group: SchottkyGroup, h: float, cap: int = DEFAULT_WORD_CAP) -> DiskUnionDomain:
    """One disk per component I_l(h): center its midpoint, radius |I_l(h)|/2 + h.

    Components whose disks would overlap are merged into a single disk around
    their common hull, repeated until the disks are disjoint.
    """
    cover = lambda_neighbourhood(group, h, cap)
    groups = [[lo, hi, 1] for lo, hi in cover.components]
    merged = True
    while merged:
        merged = False
        out = [groups[0]]
        for lo, hi, k in groups[1:]:
            # disks extend h beyond each hull; they overlap when hulls are within 2h
            if lo - out[-1][1] <= 2 * h:
                out[-1][1] = hi
                out[-1][2] += k
                merged = True
            else:
                out.append([lo, hi, k])
        groups = out
    disks, letters = [], []
    for lo, hi, _ in groups:
        d = Disk(0.5 * (lo + hi), 0.5 * (hi - lo) + h)
        # the limit-set points inside this disk must all come from one Schottky disk
        core_lo, core_hi = lo + h, hi - h
        host = [
            b
            for b in group.letters
            if group.disk(b).center - group.disk(b).radius < core_hi
            and group.disk(b).center + group.disk(b).radius > core_lo
        ]
        if len(host) != 1:
            raise SurrogateOverlapError(f"h={h}: a surrogate disk spans {len(host)} Schottky disks")
        disks.append(d)
        letters.append(host[0])
    return DiskUnionDomain(tuple(disks), tuple(letters), float(h), tuple(k for *_, k in groups))


def surrogate_threshold(group: SchottkyGroup, lo: float = 1e-4, hi: float = 1.0, iters: int = 40) -> float:
    """Largest h (by bisection) for which the surrogate disks stay disjoint across Schottky disks."""

    def ok(h):
        try:
            omega_surrogate(group, h)
            return True
        except SurrogateOverlapError:
            return False

    if not ok(lo):
        raise SurrogateOverlapError("no valid surrogate even at the lower bracket")
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def write_cover_csv(covers: list[IntervalCover], path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["h", "index", "left", "right"])
        for cov in covers:
            for i, (lo, hi) in enumerate(cov.components):
                out.writerow([repr(cov.h), i, repr(float(lo)), repr(float(hi))])


def write_volume_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["h", "vol"])
        for h, vol in rows:
            out.writerow([repr(h), repr(vol)])


def fit_loglog(x, y) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def dimension_sweep(group: SchottkyGroup, hs) -> dict:
    """Component counts and surrogate volumes over a sweep of h, with fitted slopes."""
    hs = np.asarray(sorted(hs, reverse=True), dtype=float)
    counts = np.array([lambda_neighbourhood(group, h).N for h in hs])
    vols = np.array([omega_surrogate(group, h).volume for h in hs])
    return {
        "h": hs,
        "N": counts,
        "vol": vols,
        "box_slope": fit_loglog(1 / hs, counts),
        "volume_slope": fit_loglog(1 / hs, vols),
    }


# -- Bergman kernels ---------------------------------------------------------


def bergman_kernel_disk(center: complex, radius: float, z, w, check: bool = True):
    """Reproducing kernel of the Bergman space of the disk D(center, radius)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if check and (np.any(np.abs(z - center) >= radius) or np.any(np.abs(w - center) >= radius)):
        raise OutsideDomainError("kernel arguments must lie strictly inside the disk")
    r2 = radius * radius
    return r2 / (np.pi * (r2 - (z - center) * np.conj(w - center)) ** 2)


def bergman_kernel_union(dom: DiskDomain, z, w):
    """Block-diagonal kernel: zero across different disks, the disk kernel within one."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    z, w = np.broadcast_arrays(z, w)
    iz, iw = _disk_index(dom, z), _disk_index(dom, w)
    if np.any(iz < 0) or np.any(iw < 0):
        raise OutsideDomainError("kernel arguments must lie in the domain")
    out = np.zeros(z.shape, dtype=complex)
    for i, d in enumerate(dom.disks):
        sel = (iz == i) & (iw == i)
        if np.any(sel):
            out[sel] = bergman_kernel_disk(d.center, d.radius, z[sel], w[sel], check=False)
    return out


def _disk_index(dom: DiskDomain, z) -> np.ndarray:
    idx = np.full(z.shape, -1)
    for i, d in enumerate(dom.disks):
        idx[np.abs(z - d.center) < d.radius] = i
    return idx


def polar_rule(disk: Disk, n_radial: int = 32, n_angular: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in the radius times trapezoid in the angle; returns (nodes, weights)."""
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    rad = 0.5 * disk.radius * (x + 1)
    wr = 0.5 * disk.radius * wx * rad  # area element r dr
    ang = 2 * np.pi * np.arange(n_angular) / n_angular
    nodes = disk.center + (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
    weights = (wr[:, None] * np.full(n_angular, 2 * np.pi / n_angular)[None, :]).ravel()
    return nodes, weights


# -- contraction in the surrogate ----------------------------------------------


@dataclass
class ContractionReport:
    h: float
    eta: float
    min_margin_ratio: float  # min dist(gamma_a z, boundary) / h
    passed: bool


def contraction_report(
    group: SchottkyGroup,
    h: float,
    max_length: int = 4,
    samples: int = 100,
    seed: int = 0,
) -> ContractionReport:
    """Fit eta with gamma_a(Omega_b(h)) inside Omega(eta^|a| h) on samples, and check the boundary margin."""
    dom = omega_surrogate(group, h)
    _, fine = cover_depth(group, h / 20)
    lam = 0.5 * (fine[:, 0] + fine[:, 1])  # dense sample of the limit set
    rng = np.random.default_rng(seed)
    eta, margin = 0.0, math.inf
    for b in group.letters:
        own = [d for d, letter in zip(dom.disks, dom.letters) if letter == b]
        # sample inside Omega_b(h): points within h of limit-set points in D_b
        anchors = lam[np.abs(lam - group.disk(b).center) < group.disk(b).radius]
        pick = anchors[rng.integers(len(anchors), size=samples)]
        z = pick + h * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
        assert own
        for n in range(1, max_length + 1):
            for w in enumerate_words(group, n):
                if not arrow(group.m, w, b):
                    continue
                g = word_map(group, w)
                img = (g.a * z + g.b) / (g.c * z + g.d)
                dist = np.min(np.abs(img[:, None] - lam[None, :]), axis=1)
                eta = max(eta, float(np.max(dist / h)) ** (1.0 / n))
                margin = min(margin, float(np.min(dom.boundary_distance(img))) / h)
    return ContractionReport(h, eta, margin, eta < 1 and margin > 1 - eta)
