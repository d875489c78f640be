"""Zeros of det(1 - L_s): the exponent delta, box searches, counting and Weyl fits."""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from .schottky import SchottkyGroup
from .transfer import BasisSpec, DiskDomain, OperatorKind, base_domain, geometry


class ConvergenceError(RuntimeError):
    pass


class ZeroOnContourError(RuntimeError):
    pass


class CoverageError(ValueError):
    pass


class DegenerateFitError(ValueError):
    pass


# -- delta -------------------------------------------------------------------


def leading_eigenvalue(A: np.ndarray, tol: float = 1e-15, max_iter: int = 5000) -> float:
    """Dominant real eigenvalue by power iteration with Rayleigh-quotient stopping."""
    v = np.ones(A.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A @ v
        new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    raise ConvergenceError("power iteration did not converge")


def _real_matrix(group: SchottkyGroup, sigma: float, basis: BasisSpec) -> np.ndarray:
    # real sigma gives a real operator; drop rounding-level imaginary parts
    return geometry(group, "standard", basis).matrix(complex(sigma)).real


def delta_bowen(group: SchottkyGroup, tol: float = 1e-13, basis: BasisSpec | None = None) -> float:
    """Solve lambda(sigma) = 1 for the leading eigenvalue of the real transfer operator."""
    if group.m == 1:
        return 0.0
    return _delta_bowen_cached(group, tol, basis or BasisSpec())


@functools.lru_cache(maxsize=16)
def _delta_bowen_cached(group, tol, basis) -> float:
    f = lambda sig: leading_eigenvalue(_real_matrix(group, sig, basis)) - 1.0
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
    return brentq(f, 1e-6, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def delta_from_determinant(
    group: SchottkyGroup, guess: float, tol: float = 1e-13, basis: BasisSpec | None = None
) -> float:
    """Largest real zero of det(1 - L_sigma), bracketed around ``guess``."""
    basis = basis or BasisSpec()
    geom = geometry(group, "standard", basis)
    f = lambda sig: np.linalg.slogdet(np.eye(geom.matrix(0).shape[0]) - _real_matrix(group, sig, basis))[0]
    lo, hi = guess - 0.05, guess + 0.05
    while f(hi) <= 0:
        hi += 0.1
    while f(lo) >= 0:
        lo -= 0.05
    g = lambda sig: float(np.linalg.det(np.eye(geom.matrix(0).shape[0]) - _real_matrix(group, sig, basis)))
    return brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


# -- determinant evaluator ---------------------------------------------------


class Determinant:
    """Memoized s -> det(1 - L_s) together with its log-derivative, for one discretization."""

    def __init__(self, group, kind="standard", basis=None, domain=None, square=False):
        self.geom = geometry(group, kind, basis, domain)
        self.square = square
        self.n = self.geom.n_disks * self.geom.basis.degree
        self._cache: dict[complex, tuple[complex, float, complex]] = {}
        self.evaluations = 0

    def evaluate(self, s: complex) -> tuple[complex, float, complex]:
        """(phase, log|det|, d/ds log det) with d log det = -tr((1 - A)^{-1} A')."""
        s = complex(s)
        hit = self._cache.get(s)
        if hit is None:
            A, dA = self.geom.matrix_and_derivative(s)
            if self.square:
                A, dA = A @ A, dA @ A + A @ dA
            lu, piv = lu_factor(np.eye(self.n) - A, check_finite=False)
            diag = np.diag(lu)
            swaps = int(np.sum(piv != np.arange(self.n)))
            logabs = float(np.sum(np.log(np.abs(diag))))
            phase = complex(np.prod(diag / np.abs(diag))) * (-1) ** swaps
            dlog = -complex(np.trace(lu_solve((lu, piv), dA, check_finite=False)))
            hit = (phase, logabs, dlog)
            self._cache[s] = hit
            self.evaluations += 1
        return hit

    def log_abs(self, s: complex) -> float:
        """log|det| alone, skipping the derivative."""
        s = complex(s)
        hit = self._cache.get(s)
        if hit is not None:
            return hit[1]
        A = self.geom.matrix(s)
        if self.square:
            A = A @ A
        self.evaluations += 1
        return float(np.linalg.slogdet(np.eye(self.n) - A)[1])

    def phase_logabs(self, s: complex) -> tuple[complex, float]:
        return self.evaluate(s)[:2]

    def __call__(self, s: complex) -> complex:
        phase, logabs, _ = self.evaluate(s)
        return phase * math.exp(logabs) if logabs > -745 else 0j

    def log_derivative(self, s: complex) -> complex:
        return self.evaluate(s)[2]


# -- argument principle ------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    s: complex
    multiplicity: int
    residual: float


@dataclass
class ResonanceSet:
    zeros: list[Zero]
    box: tuple[float, float, float, float]
    params: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(z.multiplicity for z in self.zeros)

    def points(self) -> np.ndarray:
        return np.array([z.s for z in self.zeros], dtype=complex)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["re", "im", "multiplicity", "residual"])
            for z in self.zeros:
                out.writerow([f"{z.s.real:.12f}", f"{z.s.imag:.12f}", z.multiplicity, f"{z.residual:.3e}"])


@dataclass
class _Search:
    det: Determinant
    max_phase_step: float = math.pi / 2
    spacing: float = 0.05
    min_segment: float = 1e-9
    edges: dict = field(default_factory=dict)

    def edge_increment(self, a: complex, b: complex) -> float:
        """Continuous change of arg f along the segment a -> b."""
        rev = (b.real, b.imag, a.real, a.imag)
        if rev in self.edges:
            return -self.edges[rev]
        key = (a.real, a.imag, b.real, b.imag)
        if key not in self.edges:
            n0 = max(2, math.ceil(abs(b - a) / self.spacing))
            pts = [a + (b - a) * k / n0 for k in range(n0 + 1)]
            self.edges[key] = sum(self._segment(p, q) for p, q in zip(pts[:-1], pts[1:]))
        return self.edges[key]

    def _segment(self, p: complex, q: complex) -> float:
        """Bisect until every piece turns the phase by less than the step bound.

        A piece is accepted when the sampled phase step is small and the
        log-derivative at both ends bounds the variation of log f over the
        piece; the second test stops aliasing past zeros close to the contour.
        """
        stack = [(p, q)]
        total = 0.0
        while stack:
            p, q = stack.pop()
            fp, fq = self.det.evaluate(p), self.det.evaluate(q)
            step = float(np.angle(fq[0] / fp[0]))
            reach = max(abs(fp[2]), abs(fq[2])) * abs(q - p)
            if abs(step) < self.max_phase_step and reach < self.max_phase_step:
                total += step
                continue
            if abs(q - p) < self.min_segment:
                raise ZeroOnContourError(f"zero on or near the contour near {p}")
            mid = 0.5 * (p + q)
            stack.append((mid, q))
            stack.append((p, mid))
        return total

    def winding(self, cell) -> int:
        x0, x1, y0, y1 = cell
        c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        tot = sum(self.edge_increment(c[k], c[(k + 1) % 4]) for k in range(4))
        w = tot / (2 * math.pi)
        if abs(w - round(w)) > 1e-6:
            raise ConvergenceError(f"non-integer winding {w} on {cell}")
        return int(round(w))


def _split(search: _Search, cell, w):
    """Split the longer side; shift the cut if it runs through a zero."""
    x0, x1, y0, y1 = cell
    for frac in (0.5, 0.4713, 0.5287, 0.4419, 0.5581):
        try:
            if x1 - x0 >= y1 - y0:
                xm = x0 + frac * (x1 - x0)
                kids = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
            else:
                ym = y0 + frac * (y1 - y0)
                kids = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
            ws = [search.winding(k) for k in kids]
        except ZeroOnContourError:
            continue
        if sum(ws) != w:
            raise AssertionError(f"winding not conserved on {cell}: {w} -> {ws}")
        return list(zip(kids, ws))
    raise ZeroOnContourError(f"could not split {cell} away from zeros")


def _newton(det: Determinant, s0: complex, mult: int, tol: float, max_iter: int = 60):
    s = complex(s0)
    for _ in range(max_iter):
        dl = det.log_derivative(s)
        if dl == 0 or not np.isfinite(dl):
            break
        step = mult / dl
        s -= step
        if abs(step) < 1e-14 * max(1.0, abs(s)):
            break
    return s, abs(det(s))


def find_resonances(
    group: SchottkyGroup,
    box: tuple[float, float, float, float],
    basis: BasisSpec | None = None,
    tol: float = 1e-8,
    domain: DiskDomain | str | None = "auto",
    kind: OperatorKind | str = "standard",
    min_cell: float = 1e-3,
    newton_cell: float = 0.5,
    spacing: float = 0.05,
) -> ResonanceSet:
    """Locate zeros of det(1 - L_s) in [sx0, sx1] x [t0, t1] by recursive winding numbers."""
    sx0, sx1, t0, t1 = map(float, box)
    if not (sx0 < sx1 and t0 < t1) or not all(map(math.isfinite, box)):
        raise ValueError("box must be bounded with min < max")
    tmax = max(abs(t0), abs(t1))
    if basis is None:
        basis = BasisSpec(default_degree(group, tmax))
    if isinstance(domain, str):
        domain = default_domain(group, tmax) if domain == "auto" else base_domain(group)
    det = Determinant(group, kind, basis, domain)
    search = _Search(det, spacing=spacing)

    cell = (sx0, sx1, t0, t1)
    for attempt in range(6):
        try:
            w_root = search.winding(cell)
            break
        except ZeroOnContourError:
            if attempt == 5:
                raise
            cell = (cell[0] - 1e-3, cell[1] + 1e-3, cell[2] - 1e-3, cell[3] + 1e-3)

    zeros: list[Zero] = []
    queue = [(cell, w_root)]
    while queue:
        c, w = queue.pop(0)
        if w == 0:
            continue
        size = max(c[1] - c[0], c[3] - c[2])
        center = complex(0.5 * (c[0] + c[1]), 0.5 * (c[2] + c[3]))
        if (w == 1 and size <= newton_cell) or size < min_cell:
            s, res = _newton(det, center, w, tol)
            pad = 1e-9
            inside = c[0] - pad <= s.real <= c[1] + pad and c[2] - pad <= s.imag <= c[3] + pad
            if inside and res < tol:
                zeros.append(Zero(s, w, res))
                continue
            if size < min_cell:
                raise ConvergenceError(f"refinement failed in {c}: residual {res:.3g}")
        queue.extend(_split(search, c, w))

    zeros.sort(key=lambda z: (round(z.s.imag, 9), round(z.s.real, 9)))
    params = {
        "degree": basis.degree,
        "rho": basis.rho,
        "points": basis.points,
        "domain_h": getattr(domain, "h", None),
        "domain_disks": len(domain),
        "operator": det.geom.n_words,
        "tol": tol,
        "min_cell": min_cell,
        "contour_box": list(cell),
        "winding": w_root,
        "evaluations": det.evaluations,
    }
    return ResonanceSet(zeros, (sx0, sx1, t0, t1), params)


def default_degree(group: SchottkyGroup, tmax: float) -> int:
    longest = max(2 * d.radius for d in group.disks)
    return max(24, math.ceil(1.5 * tmax * longest))


def default_domain(group: SchottkyGroup, tmax: float) -> DiskDomain:
    """Surrogate h-neighbourhood with h = min(0.02, 1/T); falls back to the Schottky disks."""
    from .domains import SurrogateOverlapError, omega_surrogate

    h = min(0.02, 1.0 / max(tmax, 1.0))
    try:
        return omega_surrogate(group, h)
    except SurrogateOverlapError:
        return base_domain(group)


# -- counting ----------------------------------------------------------------


IM_TOL = 1e-9


def count(rs: ResonanceSet, mode: str, sigma: float, T: float, center: float = 1.0) -> int:
    """Multiplicity-weighted count with Re s >= sigma and Im s in [0, T] (N) or |Im s - center| <= T (M)."""
    sx0, sx1, t0, t1 = rs.box
    if sigma < sx0 - 1e-12:
        raise CoverageError(f"sigma={sigma} is left of the searched box")
    if mode == "N":
        if t0 > 0 or T > t1 + 1e-12:
            raise CoverageError("Im window [0, T] not covered")
        # real zeros come out of Newton with Im of either sign at rounding level
        sel = lambda s: -IM_TOL <= s.imag <= T
    elif mode == "M":
        if center - T < t0 - 1e-12 or center + T > t1 + 1e-12:
            raise CoverageError("Im window around center not covered")
        sel = lambda s: abs(s.imag - center) <= T
    else:
        raise ValueError("mode must be 'N' or 'M'")
    return sum(z.multiplicity for z in rs.zeros if z.s.real >= sigma and sel(z.s))


def theoretical_exponent(delta: float, sigma: float) -> float:
    return 1 + delta - (3 * delta + 2) / (2 * delta + 2) * (2 * sigma - delta)


@dataclass(frozen=True)
class WeylFit:
    slope: float
    intercept: float
    r2: float
    theory: float


def fit_weyl_exponent(rs: ResonanceSet, sigma: float, T_grid, delta: float | None = None) -> WeylFit:
    T_grid = np.asarray(T_grid, dtype=float)
    counts = np.array([count(rs, "N", sigma, T) for T in T_grid], dtype=float)
    keep = counts > 0
    if keep.sum() < 4:
        raise DegenerateFitError("need at least 4 grid points with nonzero counts")
    x, y = np.log(T_grid[keep]), np.log(counts[keep])
    if np.ptp(x) == 0:
        raise DegenerateFitError("T grid is degenerate")
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 1.0
    delta = rs.params.get("delta") if delta is None else delta
    theory = theoretical_exponent(delta, sigma) if delta is not None else float("nan")
    return WeylFit(float(slope), float(icpt), r2, theory)


@dataclass(frozen=True)
class FreeBoxes:
    empty: list[tuple[float, float, float, float]]
    tested: int
    density: float


def resonance_free_boxes(rs: ResonanceSet, strip: tuple[float, float], lam: float) -> FreeBoxes:
    """Test the boxes [s_lo, s_hi] + i[n, n + n^lam] over the covered integers n >= 1."""
    s_lo, s_hi = strip
    sx0, sx1, t0, t1 = rs.box
    if s_lo < sx0 - 1e-12 or s_hi > sx1 + 1e-12:
        raise CoverageError("strip is not inside the searched box")
    pts = rs.points()
    empty, tested = [], 0
    n = max(1, math.ceil(t0))
    while True:
        height = n**lam if lam > 0 else 1.0
        if n + height > t1:
            break
        tested += 1
        hit = np.any((pts.real >= s_lo) & (pts.real <= s_hi) & (pts.imag >= n) & (pts.imag <= n + height))
        if not hit:
            empty.append((s_lo, s_hi, float(n), float(n + height)))
        n += 1
    return FreeBoxes(empty, tested, len(empty) / tested if tested else float("nan"))
