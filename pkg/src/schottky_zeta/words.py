"""Reduced words, word-indexed disks and derivative weights, and partitions."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .schottky import Disk, Mobius, SchottkyGroup

Word = tuple  # tuple[int, ...]; the empty tuple is the empty word

DEFAULT_WORD_CAP = 10**7
DEFAULT_MEMBER_CAP = 10**6


class ResourceCapError(RuntimeError):
    """A word or member count would exceed the configured cap."""


class CompositionError(ValueError):
    pass


class TauTooLargeError(ValueError):
    pass


# -- combinatorics -----------------------------------------------------------


def inverse_letter(m: int, a: int) -> int:
    return a + m if a <= m else a - m


def mirror(m: int, word: Word) -> Word:
    """Word of the inverse element: reversed, each letter inverted."""
    return tuple(inverse_letter(m, a) for a in reversed(word))


def parent(word: Word) -> Word:
    return word[:-1]


def is_prefix(a: Word, b: Word) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def arrow(m: int, a: Word, b) -> bool:
    """True when a -> b, i.e. the concatenation ab is reduced.  ``b`` may be a letter."""
    if isinstance(b, int):
        b = (b,)
    if not a or not b:
        return True
    return b[0] != inverse_letter(m, a[-1])


def concat(m: int, a: Word, b: Word) -> Word:
    if not arrow(m, a, b):
        raise CompositionError(f"{a} does not compose with {b}")
    return tuple(a) + tuple(b)


def is_reduced(m: int, word: Word) -> bool:
    return all(arrow(m, word[i : i + 1], word[i + 1 : i + 2]) for i in range(len(word) - 1))


def free_reduce(m: int, word: Word) -> Word:
    """Cancel adjacent inverse letters until the word is reduced."""
    out: list[int] = []
    for a in word:
        if out and out[-1] == inverse_letter(m, a):
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def word_count(m: int, n: int) -> int:
    return 1 if n == 0 else 2 * m * (2 * m - 1) ** (n - 1)


def enumerate_words(group: SchottkyGroup, n: int, cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """All reduced words of length n in lexicographic order."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    if word_count(group.m, n) > cap:
        raise ResourceCapError(f"{word_count(group.m, n)} words of length {n} exceed cap {cap}")
    words: list[Word] = [()]
    for _ in range(n):
        words = [w + (b,) for w in words for b in group.letters if arrow(group.m, w, b)]
    return words


def enumerate_closed_words(group: SchottkyGroup, n: int, cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """Cyclically reduced words of length n (the last letter also composes with the first)."""
    return [w for w in enumerate_words(group, n, cap) if n == 1 or arrow(group.m, w[-1:], w[:1])]


# -- geometry of words -------------------------------------------------------


def word_map(group: SchottkyGroup, word: Word) -> Mobius:
    g = Mobius.identity()
    for a in word:
        g = g @ group.gen(a)
    return g


def image_disk(g: Mobius, disk: Disk) -> Disk:
    """Exact image of a real-centered disk under a real Moebius map (pole outside the disk)."""
    lo, hi = disk.center - disk.radius, disk.center + disk.radius
    den_lo, den_hi = g.c * lo + g.d, g.c * hi + g.d
    if den_lo * den_hi <= 0:
        raise ValueError("pole of the map lies inside the disk")
    x_lo, x_hi = (g.a * lo + g.b) / den_lo, (g.a * hi + g.b) / den_hi
    # radius from r / |den_lo den_hi| avoids cancellation in x_hi - x_lo
    return Disk(0.5 * (x_lo + x_hi), disk.radius / abs(den_lo * den_hi))


def word_disk(group: SchottkyGroup, word: Word) -> Disk:
    """D_a = gamma_{a'}(D_{a_n}) for a nonempty word a."""
    if not word:
        raise ValueError("word disk needs a nonempty word")
    return image_disk(word_map(group, word[:-1]), group.disk(word[-1]))


def interval_length(group: SchottkyGroup, word: Word) -> float:
    return 2.0 * word_disk(group, word).radius


def default_target(group: SchottkyGroup, word: Word) -> int:
    """Smallest letter b with word -> b; fixes the basepoint o_word = o_b."""
    return next(b for b in group.letters if arrow(group.m, word, b))


def log_derivative(g: Mobius, z, ref: complex):
    """Branch of log g'(z) = -2 log(cz+d) that is continuous on a disk containing ``ref``.

    The sign of cz+d is fixed by its value at ``ref``; on a disk avoiding the
    pole this keeps Arg g' inside (-pi, pi), i.e. it is the principal value.
    """
    w = g.c * np.asarray(z) + g.d
    sgn = 1.0 if (g.c * ref + g.d).real >= 0 else -1.0
    return -2.0 * np.log(sgn * w)


def upsilon(group: SchottkyGroup, word: Word, target: int | None = None) -> float:
    if not word:
        return 1.0
    b = default_target(group, word) if target is None else target
    g = word_map(group, word)
    o = group.basepoints[b - 1]
    return float(abs(1.0 / (g.c * o + g.d) ** 2))


# -- partitions --------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    tau: float
    words: tuple[Word, ...]
    kind: str  # "Z" or "Y"

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def _check_tau(group: SchottkyGroup, tau: float) -> None:
    if not tau > 0:
        raise ValueError("tau must be positive")
    smallest = min(2.0 * d.radius for d in group.disks)
    if tau >= smallest:
        raise TauTooLargeError(f"tau={tau} must be below the smallest base interval {smallest:.6g}")


def build_partition_Z(group: SchottkyGroup, tau: float, cap: int = DEFAULT_MEMBER_CAP) -> Partition:
    """Words whose interval first drops to length <= tau, found by depth-first descent."""
    _check_tau(group, tau)
    out: list[Word] = []
    stack = [((a,), Mobius.identity() @ group.gen(a)) for a in reversed(group.letters)]
    while stack:
        word, g = stack.pop()
        children = []
        for c in group.letters:
            if not arrow(group.m, word, c):
                continue
            child = word + (c,)
            if 2.0 * image_disk(g, group.disk(c)).radius <= tau:
                out.append(child)
                if len(out) > cap:
                    raise ResourceCapError(f"partition exceeds {cap} members")
            else:
                children.append((child, g @ group.gen(c)))
        stack.extend(reversed(children))
    return Partition(tau, tuple(sorted(out)), "Z")


def build_partition_Y(group: SchottkyGroup, tau: float, cap: int = DEFAULT_MEMBER_CAP) -> Partition:
    """Distinct parents of mirrored Z(tau) words, sorted lexicographically."""
    z = build_partition_Z(group, tau, cap)
    ys = sorted({parent(mirror(group.m, w)) for w in z.words})
    if any(len(w) == 0 for w in ys):
        raise TauTooLargeError("Y(tau) contains the empty word; decrease tau")
    return Partition(tau, tuple(ys), "Y")


def operator_pairs(m: int, z_words) -> list[tuple[Word, int]]:
    """(word, target letter) pairs of the operator built from a partition.

    For b in the partition, the mirror of b is (word, target): the word acts on
    functions restricted to the target disk.  Tying the target to the dropped
    letter is what makes 1-eigenfunctions of the standard operator carry over.
    """
    pairs = set()
    for w in z_words:
        if len(w) < 2:
            raise TauTooLargeError("partition words must have length >= 2")
        r = mirror(m, w)
        pairs.add((r[:-1], r[-1]))
    return sorted(pairs)


def check_partition(group: SchottkyGroup, part: Partition) -> bool:
    """Unique-prefix property at depth max|member|+1, checked exhaustively."""
    depth = max(len(w) for w in part.words) + 1
    members = set(part.words)
    for w in enumerate_words(group, depth):
        hits = sum(1 for k in range(1, depth + 1) if w[:k] in members)
        if hits != 1:
            return False
    return True


def write_partition_csv(group: SchottkyGroup, part: Partition, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["word", "interval_length", "upsilon"])
        for w in part.words:
            out.writerow(["-".join(map(str, w)), repr(interval_length(group, w)), repr(upsilon(group, w))])


# -- distortion estimates ----------------------------------------------------


def disk_grid(disk: Disk, n_radii: int = 7, n_angles: int = 7, shrink: float = 0.98) -> np.ndarray:
    """Center plus a polar grid of points inside the disk (50 points by default)."""
    rad = disk.radius * shrink * np.arange(1, n_radii + 1) / n_radii
    ang = 2 * np.pi * np.arange(n_angles) / n_angles
    pts = disk.center + (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
    return np.concatenate([[complex(disk.center)], pts])


@dataclass
class DistortionReport:
    max_length: int
    theta1: float
    theta2: float
    contraction_const: float
    distortion1: float
    distortion2: float
    upsilon_ratio: float
    basepoint_ratio: float
    mirror_ratio: float
    multiplicative_ratio: float

    def constants(self) -> dict[str, float]:
        return {
            "contraction": self.contraction_const,
            "distortion1": self.distortion1,
            "distortion2": self.distortion2,
            "upsilon": self.upsilon_ratio,
            "basepoint": self.basepoint_ratio,
            "mirror": self.mirror_ratio,
            "multiplicative": self.multiplicative_ratio,
        }


def _spread(values) -> float:
    """Smallest C with every value in [1/C, C]."""
    v = np.log(np.asarray(values, dtype=float))
    return float(math.exp(max(v.max(), -v.min())))


def distortion_report(group: SchottkyGroup, max_length: int = 6, grid: int = 7) -> DistortionReport:
    """Measure the constants of the basic distortion estimates over words of length <= max_length."""
    m = group.m
    grids = {b: disk_grid(group.disk(b), grid, grid) for b in group.letters}
    log_min_by_len: dict[int, float] = {}
    log_max_by_len: dict[int, float] = {}
    d1, d2, ups_ratio, base_ratio = [], [], [], []
    ups_cache: dict[Word, float] = {}

    for n in range(1, max_length + 1):
        lo, hi = math.inf, -math.inf
        for w in enumerate_words(group, n):
            g = word_map(group, w)
            ups = upsilon(group, w)
            ups_cache[w] = ups
            per_disk = []
            for b in group.letters:
                if not arrow(m, w, b):
                    continue
                vals = np.abs(1.0 / (g.c * grids[b] + g.d) ** 2)
                lv = np.log(vals)
                lo, hi = min(lo, lv.min()), max(hi, lv.max())
                d1.append(vals.max() / vals.min())
                per_disk.append(vals)
                ups_ratio.extend([vals.max() / ups, ups / vals.min()])
                base_ratio.append(upsilon(group, w, b) / ups)
            allv = np.concatenate(per_disk)
            d2.append(allv.max() / allv.min())
        log_min_by_len[n], log_max_by_len[n] = lo, hi

    # fit log|gamma'| ~ n log theta + const along the extreme envelopes
    ns = np.arange(1, max_length + 1)
    slope2, icpt2 = np.polyfit(ns, [log_max_by_len[n] for n in ns], 1)
    slope1, icpt1 = np.polyfit(ns, [log_min_by_len[n] for n in ns], 1)
    theta1, theta2 = math.exp(slope1), math.exp(slope2)
    c_upper = max(log_max_by_len[n] - n * slope2 for n in ns)
    c_lower = max(n * slope1 - log_min_by_len[n] for n in ns)
    contraction = math.exp(max(c_upper, c_lower, 0.0))

    mirror_r = [ups_cache[mirror(m, w)] / ups_cache[w] for w in ups_cache]
    mult_r = []
    half = max_length // 2
    short = [w for w in ups_cache if len(w) <= half]
    for a, b in itertools.product(short, short):
        if arrow(m, a, b) and len(a) + len(b) <= max_length:
            mult_r.append(ups_cache[a + b] / (ups_cache[a] * ups_cache[b]))

    return DistortionReport(
        max_length=max_length,
        theta1=theta1,
        theta2=theta2,
        contraction_const=contraction,
        distortion1=float(max(d1)),
        distortion2=float(max(d2)),
        upsilon_ratio=float(max(ups_ratio)),
        basepoint_ratio=_spread(base_ratio),
        mirror_ratio=_spread(mirror_r),
        multiplicative_ratio=_spread(mult_r),
    )
