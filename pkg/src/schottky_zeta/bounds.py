"""Numerical checks of the counting argument: phases, oscillatory averages, HS norms and Jensen bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .domains import DiskUnionDomain, omega_surrogate, polar_rule
from .schottky import SchottkyGroup
from .transfer import BasisCapError, BasisSpec, OperatorKind, assemble, composed_triples, operator_pairs
from .words import (
    ResourceCapError,
    TauTooLargeError,
    Word,
    arrow,
    build_partition_Z,
    disk_grid,
    free_reduce,
    inverse_letter,
    log_derivative,
    mirror,
    upsilon,
    word_map,
)


class BranchCutError(ValueError):
    """The principal logarithm of a derivative is discontinuous at the requested point."""


class QuadratureError(RuntimeError):
    pass


class SeparationError(ValueError):
    pass


# -- phase ---------------------------------------------------------------------


@dataclass(frozen=True)
class PhasePair:
    b: int
    a_word: Word
    b_word: Word
    D_ab: float

    @property
    def diagonal(self) -> bool:
        return self.a_word == self.b_word


def separation_scale(group: SchottkyGroup, a: Word, b: Word) -> float:
    """D_ab = sqrt(U_a U_b / U_{a bbar}), the product word taken freely reduced."""
    ab = free_reduce(group.m, tuple(a) + mirror(group.m, b))
    return math.sqrt(upsilon(group, a) * upsilon(group, b) / upsilon(group, ab))


def make_pair(group: SchottkyGroup, b: int, a_word: Word, b_word: Word) -> PhasePair:
    a_word, b_word = tuple(a_word), tuple(b_word)
    if not a_word or not b_word:
        raise ValueError("phase words must be nonempty")
    if not (arrow(group.m, a_word, b) and arrow(group.m, b_word, b)):
        raise ValueError(f"words must both compose with the letter {b}")
    return PhasePair(b, a_word, b_word, separation_scale(group, a_word, b_word))


def _principal_log_derivative(group: SchottkyGroup, word: Word, b: int, z):
    g = word_map(group, word)
    ref = group.disk(b).center
    w = g.c * np.asarray(z, dtype=complex) + g.d
    sgn = 1.0 if g.c * ref + g.d >= 0 else -1.0
    # the principal argument of (cz+d)^-2 stays continuous while sgn*(cz+d) is in the right half-plane
    if np.any((sgn * w).real <= 0):
        raise BranchCutError(f"{word}: principal branch of log g' is discontinuous on the sample")
    return log_derivative(g, z, ref)


def phase(group: SchottkyGroup, pair: PhasePair, z):
    """Phi(z) = L(g_a'(z)) - L(g_b'(z)) with L the principal complex logarithm."""
    if pair.diagonal:
        return np.zeros_like(np.asarray(z, dtype=complex))
    return _principal_log_derivative(group, pair.a_word, pair.b, z) - _principal_log_derivative(
        group, pair.b_word, pair.b, z
    )


def phase_derivative(group: SchottkyGroup, pair: PhasePair, z, n: int = 1):
    """n-th derivative 2 (-1)^n (n-1)! (u_a^n - u_b^n) with u = c/(cz+d)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = np.asarray(z, dtype=complex)
    ga, gb = word_map(group, pair.a_word), word_map(group, pair.b_word)
    ua = ga.c / (ga.c * z + ga.d)
    ub = gb.c / (gb.c * z + gb.d)
    return 2.0 * (-1) ** n * math.factorial(n - 1) * (ua**n - ub**n)


def phase_derivative_fd(group: SchottkyGroup, pair: PhasePair, z, eps: float = 1e-5):
    z = np.asarray(z, dtype=complex)
    return (phase(group, pair, z + eps) - phase(group, pair, z - eps)) / (2 * eps)


# -- phase-derivative report -----------------------------------------------------


def random_word(group: SchottkyGroup, n: int, target: int, rng: np.random.Generator) -> Word:
    """Uniform-ish reduced word of length n that composes with the target letter."""
    m = group.m
    while True:
        word = [int(rng.integers(1, 2 * m + 1))]
        while len(word) < n:
            c = int(rng.integers(1, 2 * m + 1))
            if c != inverse_letter(m, word[-1]):
                word.append(c)
        if arrow(m, tuple(word), target):
            return tuple(word)


def sample_pairs(group: SchottkyGroup, max_len: int, samples: int, seed: int = 0, min_len: int = 1) -> list[PhasePair]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < samples:
        b = int(rng.integers(1, 2 * group.m + 1))
        na, nb = (int(rng.integers(min_len, max_len + 1)) for _ in range(2))
        a_word, b_word = random_word(group, na, b, rng), random_word(group, nb, b, rng)
        if a_word != b_word:
            out.append(make_pair(group, b, a_word, b_word))
    return out


@dataclass
class PhaseLevel:
    max_len: int
    ratio_min: float
    ratio_max: float
    nth_constant: float  # C with |Phi^(n)| / (n! D) <= C^n for n <= 4
    n1_constant: float  # same fit restricted to n = 1
    r0: float
    lower_constant: float  # min |Phi(z) - Phi(z')| / (D |z - z'|) for |z - z'| < r0
    entry_min: float  # min |c_a| U_a^(1/2)
    entry_max: float
    fd_residual: float


@dataclass
class PhaseReport:
    levels: list[PhaseLevel]

    def level(self, n: int) -> PhaseLevel:
        return next(lv for lv in self.levels if lv.max_len == n)

    def drift(self, name: str, lo: int, hi: int) -> float:
        """Ratio (>= 1) between a constant at two word lengths."""
        x, y = getattr(self.level(lo), name), getattr(self.level(hi), name)
        return max(x / y, y / x)


def phase_derivative_report(
    group: SchottkyGroup,
    word_len_range=(1, 5),
    samples: int = 200,
    seed: int = 0,
    grid: int = 4,
) -> PhaseReport:
    """Measure the phase-derivative constants on sampled pairs, one level per maximal word length."""
    levels = []
    for max_len in range(word_len_range[0], word_len_range[1] + 1):
        pairs = sample_pairs(group, max_len, samples, seed=seed + max_len)
        ratios, cn, c1, fd = [], [], [], 0.0
        for p in pairs:
            z = disk_grid(group.disk(p.b), grid, grid, shrink=0.95)
            d1 = np.abs(phase_derivative(group, p, z, 1))
            ratios.append(d1 / p.D_ab)
            for n in range(1, 5):
                val = np.abs(phase_derivative(group, p, z, n)) / (math.factorial(n) * p.D_ab)
                cn.append(float(np.max(val)) ** (1.0 / n))
                if n == 1:
                    c1.append(float(np.max(val)))
            fd = max(fd, float(np.max(np.abs(phase_derivative_fd(group, p, z) - phase_derivative(group, p, z)))))
        ratios = np.concatenate(ratios)
        C0, C = float(ratios.min()), max(cn)
        # largest r0 with C r0 / (1 - C r0) <= C0 / 2
        r0 = C0 / (C * (2.0 + C0))
        low = math.inf
        ang = np.exp(2j * np.pi * np.arange(8) / 8)
        for p in pairs:
            disk = group.disk(p.b)
            z = disk_grid(disk, grid, grid, shrink=0.5)
            for rr in (0.25 * r0, 0.5 * r0, 0.99 * r0):
                z2 = (z[:, None] + rr * ang[None, :]).ravel()
                z1 = np.repeat(z, len(ang))
                inside = np.abs(z2 - disk.center) < disk.radius
                diff = np.abs(phase(group, p, z1[inside]) - phase(group, p, z2[inside]))
                low = min(low, float(np.min(diff / (p.D_ab * rr))))
        words = {w for p in pairs for w in (p.a_word, p.b_word)}
        entries = [abs(word_map(group, w).c) * math.sqrt(upsilon(group, w)) for w in words]
        levels.append(
            PhaseLevel(
                max_len=max_len,
                ratio_min=C0,
                ratio_max=float(ratios.max()),
                nth_constant=C,
                n1_constant=max(c1),
                r0=r0,
                lower_constant=low,
                entry_min=min(entries),
                entry_max=max(entries),
                fd_residual=fd,
            )
        )
    return PhaseReport(levels)


# -- averaged oscillatory integrals ---------------------------------------------------


def target_disks(dom: DiskUnionDomain, b: int) -> list:
    return [d for d, letter in zip(dom.disks, dom.letters) if letter == b]


def _bergman_pair(dom: DiskUnionDomain, z, w):
    """Block-diagonal kernel B(z, w) for arrays already known to lie in the domain."""
    out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
    iz, iw = dom.index_of(z), dom.index_of(w)
    for i, d in enumerate(dom.disks):
        sel = (iz == i) & (iw == i)
        if np.any(sel):
            r2 = d.radius**2
            out[sel] = r2 / (np.pi * (r2 - (z[sel] - d.center) * np.conj(w[sel] - d.center)) ** 2)
    return out


def _oscillatory_nodes(group, pair, dom, f_kind, sigma, T, density):
    """Polar nodes on every target disk, refined so that t Phi moves by about 1/density rad per node at t = T."""
    nodes, weights = [], []
    for d in target_disks(dom, pair.b):
        ring = d.center + d.radius * np.exp(2j * np.pi * np.arange(16) / 16)
        slope = 0.0 if pair.diagonal else float(np.max(np.abs(phase_derivative(group, pair, ring))))
        k = T * slope * d.radius
        x, w = polar_rule(d, math.ceil(density * max(12, k)), math.ceil(density * max(24, 2 * k)))
        nodes.append(x)
        weights.append(w)
    if not nodes:
        raise ValueError(f"the domain has no disk for letter {pair.b}")
    z, w = np.concatenate(nodes), np.concatenate(weights)
    phi = phase(group, pair, z)
    if f_kind == "unit":
        f = np.ones_like(z)
    elif f_kind == "hs-kernel":
        ga, gb = word_map(group, pair.a_word), word_map(group, pair.b_word)
        la = _principal_log_derivative(group, pair.a_word, pair.b, z)
        lb = _principal_log_derivative(group, pair.b_word, pair.b, z)
        f = np.exp(sigma * la) * np.conj(np.exp(sigma * lb)) * _bergman_pair(dom, ga(z), gb(z))
    else:
        raise ValueError("f_kind must be 'unit' or 'hs-kernel'")
    return phi, w * f


def averaged_oscillatory_integral(
    group: SchottkyGroup,
    pair: PhasePair,
    h: float,
    T: float,
    f_kind: str = "unit",
    sigma: float = 0.0,
    density: float = 1.0,
    domain: DiskUnionDomain | None = None,
    t_floor: int = 200,
) -> float:
    """I_T = (1/T) int_0^T |int_{Omega_b(h)} e^{it Phi} f dvol| dt.

    The z-integral uses polar rules on the surrogate disks; the t-integral is a
    trapezoid rule with at least ``t_floor`` nodes and 8 nodes per oscillation
    of the phase spread.  ``density`` scales every node count.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    dom = omega_surrogate(group, h) if domain is None else domain
    phi, wf = _oscillatory_nodes(group, pair, dom, f_kind, sigma, T, density)
    spread = float(np.ptp(phi.real))
    n_t = math.ceil(density * max(t_floor, 8 * T * spread / (2 * math.pi))) + 1
    t = np.linspace(0.0, T, n_t)
    vals = np.empty(n_t)
    step = max(1, 2_000_000 // len(phi))
    for i0 in range(0, n_t, step):
        tt = t[i0 : i0 + step]
        vals[i0 : i0 + step] = np.abs(np.exp(1j * tt[:, None] * phi[None, :]) @ wf)
    return float(trapezoid(vals, t) / T)


def oscillatory_check(group, pair, h, T, f_kind="unit", sigma=0.0, tol=0.01) -> tuple[float, float]:
    """I_T and the relative change when the quadrature densities are doubled."""
    dom = omega_surrogate(group, h)
    base = averaged_oscillatory_integral(group, pair, h, T, f_kind, sigma, 1.0, dom)
    fine = averaged_oscillatory_integral(group, pair, h, T, f_kind, sigma, 2.0, dom)
    rel = abs(fine - base) / abs(fine) if fine else 0.0
    if rel >= tol:
        raise QuadratureError(f"doubling the quadrature moved I_T by {rel:.2e}")
    return fine, rel


@dataclass
class DecayFit:
    pair: PhasePair
    T: np.ndarray
    I: np.ndarray
    slope: float
    self_consistency: float


def oscillatory_decay(
    group: SchottkyGroup,
    pair: PhasePair,
    T_range=(10.0, 1000.0),
    n_T: int = 7,
    kappa: float = 0.1,
    f_kind: str = "unit",
    sigma: float = 0.0,
) -> DecayFit:
    """Sweep T over [lo/D, hi/D] with h = kappa/T and fit the log-log slope of I_T."""
    Ts = np.geomspace(T_range[0] / pair.D_ab, T_range[1] / pair.D_ab, n_T)
    vals, worst = [], 0.0
    for T in Ts:
        val, rel = oscillatory_check(group, pair, kappa / T, T, f_kind, sigma)
        vals.append(val)
        worst = max(worst, rel)
    vals = np.array(vals)
    slope = float(np.polyfit(np.log(Ts), np.log(vals), 1)[0])
    return DecayFit(pair, Ts, vals, slope, worst)


def representative_pairs(group: SchottkyGroup, count: int = 5, max_len: int = 3) -> list[PhasePair]:
    """Deterministic spread of pairs: sorted by D_ab, evenly picked."""
    pool = sample_pairs(group, max_len, 60, seed=11)
    pool.sort(key=lambda p: (p.D_ab, p.a_word, p.b_word))
    idx = np.linspace(0, len(pool) - 1, count).round().astype(int)
    return [pool[i] for i in idx]


# -- separation ----------------------------------------------------------------------


@dataclass
class SeparationReport:
    h: float
    candidates: list[float]
    violations: list[int | None]  # None where tau = c h is not admissible
    max_c: float  # largest c with every admissible candidate <= c violation-free (0 if the first fails)
    onset_c: float  # smallest c with every admissible candidate >= c violation-free


def _pairs_by_target(group: SchottkyGroup, tau: float) -> dict[int, list[Word]]:
    out: dict[int, list[Word]] = {}
    for w, b in operator_pairs(group.m, build_partition_Z(group, tau).words):
        out.setdefault(b, []).append(w)
    return out


def count_separation_violations(group: SchottkyGroup, dom: DiskUnionDomain, tau: float, grid: int = 5) -> int:
    """Pairs a != b of operator words with a common target whose sampled images share a surrogate disk."""
    bad = 0
    for b, words in _pairs_by_target(group, tau).items():
        z = disk_grid(group.disk(b), grid, 2 * grid)
        owners: dict[int, set] = {}
        for w in words:
            idx = dom.index_of(word_map(group, w)(z))
            for i in set(idx.tolist()) - {-1}:
                owners.setdefault(i, set()).add(w)
        bad += sum(len(ws) * (len(ws) - 1) // 2 for ws in owners.values())
    return bad


def check_separation(group: SchottkyGroup, h: float, c_candidates) -> SeparationReport:
    dom = omega_surrogate(group, h)
    cs = sorted(float(c) for c in c_candidates)
    viol: list[int | None] = []
    for c in cs:
        try:
            viol.append(count_separation_violations(group, dom, c * h))
        except TauTooLargeError:
            viol.append(None)
    admissible = [(c, v) for c, v in zip(cs, viol) if v is not None]
    max_c = 0.0
    for c, v in admissible:
        if v:
            break
        max_c = c
    onset = math.inf
    for c, v in reversed(admissible):
        if v:
            break
        onset = c
    return SeparationReport(h, cs, viol, max_c, onset)


# -- Hilbert-Schmidt norm --------------------------------------------------------------


@dataclass
class HSCheck:
    formula_value: float
    direct_value: float
    rel_err: float
    reduced_value: float  # only pairs with a common tau0-prefix
    cross_prefix_value: complex  # everything else; exactly 0 under separation
    n_words: int


def hs_norm_formula(
    group: SchottkyGroup,
    triples,
    s: complex,
    dom: DiskUnionDomain,
    n_radial: int = 24,
    n_angular: int = 48,
) -> tuple[complex, complex]:
    """(prefix-sharing part, remainder) of sum_b sum_{a,a'} int g_a'^s conj(g_a''^s) B(g_a z, g_a' z)."""
    reduced, rest = 0j, 0j
    for dst, b in zip(dom.disks, dom.letters):
        z, wts = polar_rule(dst, n_radial, n_angular)
        entries = []
        for a0, a1, t in triples:
            if t != b:
                continue
            g = word_map(group, a0 + a1)
            img = g(z)
            comp = dom.index_of(img)
            if comp[0] < 0 or np.any(comp != comp[0]):
                raise SeparationError(f"image of a surrogate disk under {a0 + a1} leaves the domain")
            weight = np.exp(s * log_derivative(g, z, dst.center))
            entries.append((a0, int(comp[0]), img, weight))
        for a0, ia, za, wa in entries:
            for b0, ib, zb, wb in entries:
                if ia != ib:
                    term = 0j  # block-diagonal kernel vanishes across components
                else:
                    d = dom.disks[ia]
                    r2 = d.radius**2
                    ker = r2 / (np.pi * (r2 - (za - d.center) * np.conj(zb - d.center)) ** 2)
                    term = complex(np.sum(wts * wa * np.conj(wb) * ker))
                if a0 == b0:
                    reduced += term
                else:
                    rest += term
    return reduced, rest


def hs_norm_check(
    group: SchottkyGroup,
    tau0: float,
    tau1: float,
    s: complex,
    h: float,
    degree: int = 12,
) -> HSCheck:
    dom = omega_surrogate(group, h)
    triples = composed_triples(group, tau0, tau1)
    reduced, rest = hs_norm_formula(group, triples, s, dom)
    formula = (reduced + rest).real
    tm = assemble(group, OperatorKind.composed(tau0, tau1), s, BasisSpec(degree), dom)
    direct = float(np.sum(np.abs(tm.matrix) ** 2))
    return HSCheck(formula, direct, abs(formula - direct) / abs(formula), reduced.real, rest, len(triples))


def hs_norm_direct(group: SchottkyGroup, tau0: float, tau1: float, s: complex, dom, degree: int = 12) -> float:
    tm = assemble(group, OperatorKind.composed(tau0, tau1), s, BasisSpec(degree), dom)
    return float(np.sum(np.abs(tm.matrix) ** 2))


# -- Jensen bound --------------------------------------------------------------------------


@dataclass
class JensenBound:
    sigma: float
    T: float
    K: float
    sigma0: float
    r1: float
    r2: float
    circle_term: float  # int_0^T mean over the r2-circle of log|f|
    center_term: float  # int_0^T log|f(sigma0 + it)|
    bound: float


def jensen_radii(delta: float, sigma: float, K: float) -> tuple[float, float, float]:
    sigma0 = delta + K
    r1 = math.sqrt((sigma0 - sigma) ** 2 + 1.0)
    return sigma0, r1, r1 + 1.0 / K


def _squared_composed_det(group, tau0, tau1, h, tmax, degree):
    from .resonances import Determinant, default_degree

    dom = omega_surrogate(group, h)
    M = default_degree(group, tmax) if degree is None else degree
    return Determinant(group, OperatorKind.composed(tau0, tau1), BasisSpec(M), dom, square=True)


def jensen_grid(
    group: SchottkyGroup,
    sigmas,
    Ts,
    K: float = 3.0,
    tau0: float = 0.02,
    tau1: float = 0.01,
    h: float = 0.02,
    n_theta: int = 32,
    n_t: int = 200,
    delta: float | None = None,
    degree: int | None = None,
) -> list[JensenBound]:
    """Jensen bounds on a (sigma, T) grid; the t-grid of the largest T is shared by the smaller ones.

    Jensen on the circles |s - s0| = r2 gives, per t,
        M(t) <= (mean_theta log|f(s0 + r2 e^{i theta})| - log|f(s0)|) / log(r2/r1),
    and N(sigma, T) <= int_0^T M(t) dt.
    """
    from .resonances import delta_bowen

    delta = delta_bowen(group) if delta is None else delta
    Ts = sorted(float(T) for T in Ts)
    tmax = Ts[-1]
    t = np.linspace(0.0, tmax, n_t + 1)
    for T in Ts:
        if not np.any(np.isclose(t, T)):
            raise ValueError(f"T={T} is not on the shared t-grid")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    out = []
    for sigma in sorted(float(x) for x in sigmas):
        sigma0, r1, r2 = jensen_radii(delta, sigma, K)
        det = _squared_composed_det(group, tau0, tau1, h, tmax + r2, degree)
        circle = np.array(
            [np.mean([det.log_abs(sigma0 + r2 * np.exp(1j * th) + 1j * tt) for th in theta]) for tt in t]
        )
        center = np.array([det.log_abs(sigma0 + 1j * tt) for tt in t])
        scale = 1.0 / math.log(r2 / r1)
        for T in Ts:
            k = int(np.argmin(np.abs(t - T))) + 1
            ci, ce = float(trapezoid(circle[:k], t[:k])), float(trapezoid(center[:k], t[:k]))
            out.append(JensenBound(sigma, T, K, sigma0, r1, r2, ci, ce, scale * (ci - ce)))
    return out


def jensen_upper_count(
    group: SchottkyGroup,
    sigma: float,
    T: float,
    K: float = 3.0,
    tau0: float = 0.02,
    tau1: float = 0.01,
    h: float = 0.02,
    **kwargs,
) -> float:
    return jensen_grid(group, [sigma], [T], K, tau0, tau1, h, **kwargs)[0].bound


def pointwise_log_det(group: SchottkyGroup, s: complex, tau0: float, tau1: float, h: float = 0.02, degree: int = 24) -> float:
    """-log|det(1 - L^2)| for the composed operator at one point."""
    return -_squared_composed_det(group, tau0, tau1, h, abs(s.imag) + 1, degree).log_abs(s)


# -- main estimate ----------------------------------------------------------------------------


@dataclass
class MainEstimateRow:
    sigma: float
    T: float
    h: float
    tau0: float
    tau1: float
    mean_hs: float


@dataclass
class MainEstimateTable:
    rows: list[MainEstimateRow]
    exponents: dict[float, float]
    theory: dict[float, float]
    skipped: list[tuple[float, float, str]] = field(default_factory=list)


def main_estimate_scan(
    group: SchottkyGroup,
    sigma_grid,
    T_grid,
    c: float = 1.0,
    tau1_scale: float = 0.1,
    n_t: int = 200,
    degree: int = 12,
    delta: float | None = None,
) -> MainEstimateTable:
    """Mean of ||L_{tau0,tau1,sigma+it}||_HS^2 over t in [0, T] with h = 1/T, tau0 = c h, tau1 ~ T^(-delta/(2 delta+2))."""
    from .domains import SurrogateOverlapError
    from .resonances import delta_bowen, theoretical_exponent

    delta = delta_bowen(group) if delta is None else delta
    rows, skipped = [], []
    for T in sorted(float(x) for x in T_grid):
        h = 1.0 / T
        tau0, tau1 = c * h, tau1_scale * T ** (-delta / (2 * delta + 2))
        try:
            dom = omega_surrogate(group, h)
            t = np.linspace(0.0, T, n_t)
            for sigma in sorted(float(x) for x in sigma_grid):
                vals = [hs_norm_direct(group, tau0, tau1, sigma + 1j * tt, dom, degree) for tt in t]
                rows.append(MainEstimateRow(sigma, T, h, tau0, tau1, float(trapezoid(vals, t) / T)))
        except (TauTooLargeError, SurrogateOverlapError, SeparationError) as exc:
            skipped.append((T, h, str(exc)))
    exps, theory = {}, {}
    for sigma in sorted({r.sigma for r in rows}):
        sel = [r for r in rows if r.sigma == sigma]
        if len(sel) >= 2:
            exps[sigma] = float(np.polyfit(np.log([r.T for r in sel]), np.log([r.mean_hs for r in sel]), 1)[0])
        theory[sigma] = theoretical_exponent(delta, sigma) - 1.0
    return MainEstimateTable(rows, exps, theory, skipped)


# -- suite ------------------------------------------------------------------------------------

SEPARATION_CANDIDATES = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
TAU_SWEEP = ((0.04, 0.03), (0.02, 0.01), (0.01, 0.005), (0.005, 0.002), (0.002, 0.001))


def _entry(passed: bool, **values) -> dict:
    return {"status": "pass" if passed else "fail", **values}


def _suite_phase(group, delta):
    rep = phase_derivative_report(group, (1, 5))
    lo = min(lv.ratio_min for lv in rep.levels)
    hi = max(lv.ratio_max for lv in rep.levels)
    fd = max(lv.fd_residual for lv in rep.levels)
    drift = max(rep.drift("ratio_min", 3, 5), rep.drift("ratio_max", 3, 5))
    return _entry(lo >= 0.1 and hi <= 10 and fd < 1e-7 and drift < 2, ratio_min=lo, ratio_max=hi, fd_residual=fd, drift=drift)


def _suite_oscillatory(group, delta):
    fits = [oscillatory_decay(group, p) for p in representative_pairs(group)]
    slopes = [f.slope for f in fits]
    worst = max(f.self_consistency for f in fits)
    return _entry(max(slopes) <= -0.8 and worst < 0.01, slopes=slopes, self_consistency=worst)


def _suite_separation(group, delta):
    reps = [check_separation(group, h, SEPARATION_CANDIDATES) for h in (0.1, 0.05, 0.025)]
    cs = [r.max_c for r in reps]
    variation = (max(cs) - min(cs)) / max(cs) if max(cs) > 0 else math.inf
    return _entry(min(cs) > 0 and variation < 0.2, max_c=cs, onset_c=[r.onset_c for r in reps], variation=variation)


def _suite_hs(group, delta):
    chk = hs_norm_check(group, 0.02, 0.01, delta + 0.5, 0.05)
    return _entry(
        chk.rel_err < 1e-3 and chk.cross_prefix_value == 0 and chk.formula_value > 0,
        formula=chk.formula_value,
        direct=chk.direct_value,
        rel_err=chk.rel_err,
        cross_prefix=abs(chk.cross_prefix_value),
    )


def _suite_jensen(group, delta):
    from .resonances import count, find_resonances

    sigmas, Ts = [delta / 2, 0.75 * delta, delta], [5.0, 10.0]
    rs = find_resonances(group, (delta / 2 - 0.01, delta + 0.02, 0.0, max(Ts)))
    grid = jensen_grid(group, sigmas, Ts, delta=delta, n_t=40)
    rows = [(jb.sigma, jb.T, jb.bound, count(rs, "N", jb.sigma, jb.T)) for jb in grid]
    dominated = all(b >= n for _, _, b, n in rows)
    monotone = all(
        jensen_bound_at(grid, s1, T) >= jensen_bound_at(grid, s2, T) for T in Ts for s1, s2 in zip(sigmas, sigmas[1:])
    )
    return _entry(dominated and monotone, rows=[list(r) for r in rows])


def jensen_bound_at(grid: list[JensenBound], sigma: float, T: float) -> float:
    return next(jb.bound for jb in grid if jb.sigma == sigma and jb.T == T)


def _suite_pointwise(group, delta):
    vals = [pointwise_log_det(group, delta + 1.0, t0, t1) for t0, t1 in TAU_SWEEP]
    mags = [abs(v) for v in vals]
    return _entry(all(x >= y for x, y in zip(mags, mags[1:])), values=vals)


def _suite_main(group, delta):
    sigmas = [delta / 2, delta, (delta + 1) / 2]
    tab = main_estimate_scan(group, sigmas, [10, 20, 40], delta=delta)
    exps = [tab.exponents[s] for s in sigmas]
    ok = abs(exps[0] - delta) <= 0.3 and all(x > y for x, y in zip(exps, exps[1:]))
    return _entry(ok, exponents=exps, theory=[tab.theory[s] for s in sigmas], skipped=[list(x) for x in tab.skipped])


SUITES = {
    "phase_derivatives": _suite_phase,
    "oscillatory_decay": _suite_oscillatory,
    "separation": _suite_separation,
    "hs_norm": _suite_hs,
    "jensen": _suite_jensen,
    "pointwise_estimate": _suite_pointwise,
    "main_estimate": _suite_main,
}


def run_suite(group: SchottkyGroup, names=None) -> dict:
    """Run the named checks (all by default); each entry has a status of pass, fail or error."""
    from .resonances import delta_bowen

    delta = delta_bowen(group)
    out = {}
    for name in names or SUITES:
        try:
            out[name] = SUITES[name](group, delta)
        except (ResourceCapError, BasisCapError):
            raise
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            out[name] = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
    return out
