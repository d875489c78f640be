"""Matrix discretizations of transfer operators, Fredholm determinants and zeta products.

Functions on a union of disks are expanded per disk in the orthonormal
Bergman monomials phi_n(z) = sqrt((n+1)/(pi r^2)) ((z-c)/r)^n.  The matrix
entry <L phi_n^(src), phi_k^(dst)> is read off from samples of L phi_n on a
circle of radius rho*r_dst by a discrete Cauchy (FFT) rule.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .schottky import Disk, SchottkyGroup, fixed_points, translation_length
from .words import (
    DEFAULT_WORD_CAP,
    ResourceCapError,
    Word,
    arrow,
    build_partition_Z,
    enumerate_closed_words,
    image_disk,
    inverse_letter,
    operator_pairs,
    word_map,
)


class BranchCutError(ValueError):
    pass


class DomainMappingError(ValueError):
    """Some word does not map a domain disk into a single domain disk."""


class BasisCapError(RuntimeError):
    pass


MAX_BASIS_DIM = 20000


@dataclass(frozen=True)
class BasisSpec:
    degree: int = 24
    rho: float | None = None
    points: int | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be positive")
        rho = self.rho if self.rho is not None else (0.7 if self.degree <= 32 else 0.85)
        pts = self.points if self.points is not None else 4 * self.degree
        if not 0.3 <= rho <= 0.9:
            raise ValueError("rho must lie in [0.3, 0.9]")
        if pts < 4 * self.degree:
            raise ValueError("need at least 4*degree quadrature points")
        object.__setattr__(self, "rho", float(rho))
        object.__setattr__(self, "points", int(pts))


@dataclass(frozen=True)
class DiskDomain:
    """Disjoint disks carrying the Bergman space; ``letters[i]`` is the base disk holding disk i."""

    disks: tuple[Disk, ...]
    letters: tuple[int, ...]
    h: float | None = None

    def __len__(self) -> int:
        return len(self.disks)


def base_domain(group: SchottkyGroup) -> DiskDomain:
    return DiskDomain(tuple(group.disks), tuple(group.letters))


@dataclass(frozen=True)
class OperatorKind:
    """Which words index the operator: standard, refined(tau), composed(tau0, tau1) or an explicit partition."""

    kind: str = "standard"
    tau0: float | None = None
    tau1: float | None = None
    partition: tuple[Word, ...] | None = None

    @classmethod
    def standard(cls) -> OperatorKind:
        return cls("standard")

    @classmethod
    def refined(cls, tau: float) -> OperatorKind:
        return cls("refined", tau0=float(tau))

    @classmethod
    def composed(cls, tau0: float, tau1: float) -> OperatorKind:
        return cls("composed", tau0=float(tau0), tau1=float(tau1))

    @classmethod
    def from_partition(cls, words) -> OperatorKind:
        return cls("partition", partition=tuple(sorted(tuple(w) for w in words)))

    @property
    def label(self) -> str:
        if self.kind == "standard":
            return "standard"
        if self.kind == "refined":
            return f"refined({self.tau0!r})"
        if self.kind == "composed":
            return f"composed({self.tau0!r},{self.tau1!r})"
        return f"partition({len(self.partition)})"


def operator_words(group: SchottkyGroup, kind: OperatorKind) -> list[tuple[Word, int]]:
    """(word, target letter) pairs indexing the operator, in deterministic order."""
    m = group.m
    if kind.kind == "standard":
        return [((a,), b) for b in group.letters for a in group.letters if arrow(m, (a,), b)]
    if kind.kind == "refined":
        return operator_pairs(m, build_partition_Z(group, kind.tau0).words)
    if kind.kind == "partition":
        return operator_pairs(m, kind.partition)
    if kind.kind == "composed":
        return sorted((a0 + a1, b) for a0, a1, b in composed_triples(group, kind.tau0, kind.tau1))
    raise ValueError(f"unknown operator kind {kind.kind!r}")


def composed_triples(group: SchottkyGroup, tau0: float, tau1: float) -> list[tuple[Word, Word, int]]:
    """(a0, a1, b) for the composed operator: a1 carries the target b and a0 is chained onto a1's first letter."""
    m = group.m
    p0 = operator_pairs(m, build_partition_Z(group, tau0).words)
    p1 = operator_pairs(m, build_partition_Z(group, tau1).words)
    by_target: dict[int, list[Word]] = {}
    for w, t in p0:
        by_target.setdefault(t, []).append(w)
    return sorted((a0, a1, b) for a1, b in p1 for a0 in by_target.get(a1[0], []))


# -- complex powers ----------------------------------------------------------


def complex_power(w, s):
    """Principal power w**s = exp(s (log|w| + i Arg w)), undefined on (-inf, 0]."""
    w = complex(w)
    if w.imag == 0 and w.real <= 0:
        raise BranchCutError(f"{w} lies on the branch cut")
    return cmath.exp(s * cmath.log(w))


# -- assembly ----------------------------------------------------------------


@dataclass
class OperatorGeometry:
    """s-independent data of a discretized operator: per-block sampled log-derivatives and basis values."""

    n_disks: int
    basis: BasisSpec
    dst_scale: np.ndarray  # (n_disks, M) factors turning Cauchy coefficients into entries
    blocks: dict = field(default_factory=dict)  # (dst, src) -> (logd (W,K), phis (W,K,M))
    n_words: int = 0

    def matrix(self, s: complex) -> np.ndarray:
        M, K = self.basis.degree, self.basis.points
        A = np.zeros((self.n_disks * M, self.n_disks * M), dtype=complex)
        for (j, i), (logd, phis) in self.blocks.items():
            weights = np.exp(s * logd)  # (W, K)
            vals = np.einsum("wk,wkn->kn", weights, phis)  # samples of L phi_n on the circle
            coef = np.fft.fft(vals, axis=0)[:M] / K  # (k, n)
            A[j * M : (j + 1) * M, i * M : (i + 1) * M] = coef * self.dst_scale[j][:, None]
        return A

    def matrix_and_derivative(self, s: complex) -> tuple[np.ndarray, np.ndarray]:
        """The matrix and its s-derivative (weights gain a factor log gamma')."""
        M, K = self.basis.degree, self.basis.points
        A = np.zeros((self.n_disks * M, self.n_disks * M), dtype=complex)
        dA = np.zeros_like(A)
        for (j, i), (logd, phis) in self.blocks.items():
            weights = np.exp(s * logd)
            for target, wts in ((A, weights), (dA, weights * logd)):
                vals = np.einsum("wk,wkn->kn", wts, phis)
                coef = np.fft.fft(vals, axis=0)[:M] / K
                target[j * M : (j + 1) * M, i * M : (i + 1) * M] = coef * self.dst_scale[j][:, None]
        return A, dA


def _locate(domain: DiskDomain, img: Disk, candidates) -> int:
    for i in candidates:
        d = domain.disks[i]
        if abs(img.center - d.center) + img.radius < d.radius:
            return i
    raise DomainMappingError(
        f"image disk ({img.center:.6g}, r={img.radius:.3g}) is not inside a single domain disk;"
        " shrink h or tau"
    )


def prepare_geometry(
    group: SchottkyGroup,
    kind: OperatorKind,
    basis: BasisSpec,
    domain: DiskDomain | None = None,
) -> OperatorGeometry:
    domain = base_domain(group) if domain is None else domain
    words = operator_words(group, kind)
    M, K, rho = basis.degree, basis.points, basis.rho
    if len(domain) * M > MAX_BASIS_DIM:
        raise BasisCapError(f"basis dimension {len(domain) * M} exceeds {MAX_BASIS_DIM}")
    maps = [word_map(group, w) for w, _ in words]
    n = np.arange(M)
    theta = 2 * np.pi * np.arange(K) / K
    by_letter: dict[int, list[int]] = {}
    for i, b in enumerate(domain.letters):
        by_letter.setdefault(b, []).append(i)

    collected: dict[tuple[int, int], tuple[list, list]] = {}
    for j, (dst, b) in enumerate(zip(domain.disks, domain.letters)):
        z = dst.center + rho * dst.radius * np.exp(1j * theta)
        for (w, t), g in zip(words, maps):
            if t != b:
                continue
            i = _locate(domain, image_disk(g, dst), by_letter.get(w[0], []))
            src = domain.disks[i]
            den = g.c * z + g.d
            sgn = 1.0 if g.c * dst.center + g.d >= 0 else -1.0
            logd = -2.0 * np.log(sgn * den)
            u = ((g.a * z + g.b) / den - src.center) / src.radius
            phis = u[:, None] ** n[None, :] * np.sqrt((n + 1) / (np.pi * src.radius**2))[None, :]
            lst = collected.setdefault((j, i), ([], []))
            lst[0].append(logd)
            lst[1].append(phis)

    geom = OperatorGeometry(
        n_disks=len(domain),
        basis=basis,
        dst_scale=np.array([rho ** (-n) * d.radius * np.sqrt(np.pi / (n + 1)) for d in domain.disks]),
        n_words=len(words),
    )
    for key in sorted(collected):
        logds, phis = collected[key]
        geom.blocks[key] = (np.array(logds), np.array(phis))
    return geom


@functools.lru_cache(maxsize=32)
def _cached_geometry(group, kind, basis, domain) -> OperatorGeometry:
    return prepare_geometry(group, kind, basis, domain)


def geometry(
    group: SchottkyGroup,
    kind: OperatorKind | str = "standard",
    basis: BasisSpec | None = None,
    domain: DiskDomain | None = None,
) -> OperatorGeometry:
    """Cached s-independent operator data; evaluate with ``.matrix(s)``."""
    if isinstance(kind, str):
        kind = OperatorKind(kind)
    basis = BasisSpec() if basis is None else basis
    domain = base_domain(group) if domain is None else domain
    return _cached_geometry(group, kind, basis, domain)


@dataclass
class TransferMatrix:
    s: complex
    matrix: np.ndarray
    kind: OperatorKind
    basis: BasisSpec
    domain: DiskDomain

    def block(self, dst: int, src: int) -> np.ndarray:
        M = self.basis.degree
        return self.matrix[dst * M : (dst + 1) * M, src * M : (src + 1) * M]


def assemble(
    group: SchottkyGroup,
    kind: OperatorKind | str = "standard",
    s: complex = 1.0,
    basis: BasisSpec | None = None,
    domain: DiskDomain | None = None,
) -> TransferMatrix:
    geom = geometry(group, kind, basis, domain)
    if isinstance(kind, str):
        kind = OperatorKind(kind)
    return TransferMatrix(complex(s), geom.matrix(complex(s)), kind, geom.basis, domain if domain is not None else base_domain(group))


# -- determinants and traces ---------------------------------------------------


@dataclass(frozen=True)
class DetResult:
    value: complex
    log_abs: float
    phase: complex  # unit complex number

    def __complex__(self) -> complex:
        return self.value


def fredholm_det(tm, square: bool = False) -> DetResult:
    """det(I - A) (or det(I - A^2)) by LU factorization, with log-magnitude form."""
    A = tm.matrix if isinstance(tm, TransferMatrix) else np.asarray(tm)
    if square:
        A = A @ A
    sign, logabs = np.linalg.slogdet(np.eye(A.shape[0]) - A)
    with np.errstate(over="ignore"):
        value = complex(sign) * math.exp(logabs) if logabs < 700 else complex("inf")
    return DetResult(value, float(logabs), complex(sign))


def zeta_det(group: SchottkyGroup, s: complex, basis: BasisSpec | None = None) -> complex:
    return fredholm_det(assemble(group, "standard", s, basis)).value


def trace_power_lefschetz(
    group: SchottkyGroup,
    kind: OperatorKind | str,
    s: complex,
    n: int,
    cap: int = DEFAULT_WORD_CAP,
) -> complex:
    """Sum over admissible cycles w_1 -> ... -> w_n -> w_1 of gamma'(x)^s / (1 - gamma'(x))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(kind, str):
        kind = OperatorKind(kind)
    pairs = operator_words(group, kind)
    maps = [word_map(group, w) for w, _ in pairs]
    # after applying pair i, the argument sits in the disk of its first letter,
    # so pair j can follow when its target is that letter
    nxt = {i: [j for j, (_, t) in enumerate(pairs) if t == w[0]] for i, (w, _) in enumerate(pairs)}
    total = 0j
    count = 0

    def visit(path, g):
        nonlocal total, count
        if len(path) == n:
            if pairs[path[0]][1] != pairs[path[-1]][0][0]:
                return
            count += 1
            if count > cap:
                raise ResourceCapError(f"more than {cap} cycles")
            x, _ = fixed_points(g)
            deriv = 1.0 / (g.c * x + g.d) ** 2
            total += cmath.exp(s * math.log(deriv)) / (1.0 - deriv)
            return
        for j in nxt[path[-1]]:
            visit(path + [j], maps[j] @ g)

    for i in range(len(pairs)):
        visit([i], maps[i])
    return total


# -- Selberg zeta product --------------------------------------------------------


def max_letter_contraction(group: SchottkyGroup) -> float:
    """Largest sup |gamma_a'| over the disks D_b with a -> b."""
    theta = 0.0
    for a in group.letters:
        g = group.gen(a)
        pole = -g.d / g.c
        for b in group.letters:
            if arrow(group.m, (a,), b):
                d = group.disk(b)
                dist = abs(d.center - pole) - d.radius
                theta = max(theta, 1.0 / (g.c * dist) ** 2)
    return theta


def _is_min_rotation(w: Word) -> bool:
    return all(w <= w[k:] + w[:k] for k in range(1, len(w)))


def _is_primitive(w: Word) -> bool:
    n = len(w)
    return all(w != w[p:] + w[:p] for p in range(1, n) if n % p == 0)


def primitive_classes(group: SchottkyGroup, length_cut: float, cap: int = DEFAULT_WORD_CAP):
    """(word, length) for primitive conjugacy classes with translation length <= length_cut."""
    theta = max_letter_contraction(group)
    n_max = max(1, math.ceil(length_cut / -math.log(theta)))
    out = []
    for n in range(1, n_max + 1):
        for w in enumerate_closed_words(group, n, cap):
            if _is_min_rotation(w) and _is_primitive(w):
                ell = translation_length(word_map(group, w))
                if ell <= length_cut:
                    out.append((w, ell))
    return out


@dataclass(frozen=True)
class ZetaProduct:
    value: complex
    error_estimate: float
    n_classes: int
    k_cut: int


def selberg_zeta_product(
    group: SchottkyGroup,
    s: complex,
    length_cut: float = 20.0,
    k_cut: int | None = None,
    delta: float | None = None,
    margin: float = 0.3,
) -> ZetaProduct:
    """Truncated Euler product over primitive closed geodesics of length <= length_cut."""
    if delta is None:
        from .resonances import delta_bowen

        delta = delta_bowen(group)
    s = complex(s)
    if s.real <= delta + margin:
        raise ValueError(f"Re(s)={s.real:.4g} must exceed delta+{margin} = {delta + margin:.4g}")
    classes = _cached_classes(group, float(length_cut))
    if not classes:
        return ZetaProduct(1.0 + 0j, 0.0, 0, 0)
    lengths = np.array([ell for _, ell in classes])
    ell_min = lengths.min()
    if k_cut is None:
        # drop factors whose total contribution is below 1e-17
        k_cut = 0
        while len(lengths) * math.exp(-(s.real + k_cut + 1) * ell_min) > 1e-17:
            k_cut += 1
    ks = np.arange(k_cut + 1)
    log_z = np.sum(np.log1p(-np.exp(-(s + ks[:, None]) * lengths[None, :])))
    err = len(classes) * math.exp(-(s.real - delta) * length_cut)
    return ZetaProduct(complex(np.exp(log_z)), err, len(classes), k_cut)


@functools.lru_cache(maxsize=16)
def _cached_classes(group, length_cut):
    return tuple(primitive_classes(group, length_cut))


def cylinder_zeta(length: float, s: complex, k_cut: int = 200) -> complex:
    """Closed form for the cyclic group: two primitive classes of the same length."""
    ks = np.arange(k_cut + 1)
    return complex(np.prod((1.0 - np.exp(-(s + ks) * length)) ** 2))


def matrix_trace_power(tm: TransferMatrix, n: int) -> complex:
    return complex(np.trace(np.linalg.matrix_power(tm.matrix, n)))

