"""Moebius maps, Schottky data and preset surface families."""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DET_TOL = 1e-12
POLE_TOL = 1e-14


class GeometryError(ValueError):
    """Schottky data cannot be built or is inconsistent."""


class NotHyperbolicError(ValueError):
    pass


class PoleError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Mobius:
    """Unit-determinant real 2x2 matrix acting by z -> (az+b)/(cz+d).

    Stored with c > 0, or c == 0 and a > 0, so that the PSL2 sign ambiguity
    is resolved deterministically.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # products of long words have huge entries; judge det relative to their scale
        scale = max(1.0, abs(self.a * self.d) + abs(self.b * self.c))
        if not math.isfinite(det) or det <= -DET_TOL * scale:
            raise GeometryError(f"matrix must have positive determinant, got {det}")
        if abs(det - 1.0) > DET_TOL * scale:
            if det <= 0:
                raise GeometryError(f"matrix must have positive determinant, got {det}")
            k = 1.0 / math.sqrt(det)
            vals = (self.a * k, self.b * k, self.c * k, self.d * k)
        else:
            vals = (self.a, self.b, self.c, self.d)
        a, b, c, d = vals
        if c < 0 or (c == 0 and a < 0):
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "d", float(d))

    @classmethod
    def identity(cls) -> Mobius:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> Mobius:
        (a, b), (c, d) = m
        return cls(a, b, c, d)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: Mobius) -> Mobius:
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> Mobius:
        return Mobius(self.d, -self.b, -self.c, self.a)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __call__(self, z):
        return mobius_apply(self, z)


def mobius_apply(g: Mobius, z):
    """Apply g on the extended plane; ``math.inf`` stands for the point at infinity."""
    if isinstance(z, np.ndarray):
        return (g.a * z + g.b) / (g.c * z + g.d)
    if z == math.inf or (isinstance(z, complex) and cmath.isinf(z)):
        return math.inf if g.c == 0 else g.a / g.c
    den = g.c * z + g.d
    if den == 0:
        return math.inf
    return (g.a * z + g.b) / den


def mobius_derivative(g: Mobius, z):
    den = g.c * z + g.d
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError(f"derivative of {g} has a pole at {z}")
    return 1.0 / den**2


def _require_hyperbolic(g: Mobius) -> float:
    tr = abs(g.trace)
    if tr <= 2.0 + DET_TOL:
        raise NotHyperbolicError(f"|trace| = {tr} is not > 2")
    return tr


def fixed_points(g: Mobius) -> tuple[float, float]:
    """Return (attracting, repelling) fixed points of a hyperbolic element."""
    tr = _require_hyperbolic(g)
    if g.c == 0:
        # z -> (a/d) z + b/d: finite fixed point b/(d-a), the other at infinity
        finite = g.b / (g.d - g.a)
        if abs(g.a / g.d) > 1:
            return math.inf, finite
        return finite, math.inf
    disc = math.sqrt(tr * tr - 4.0)
    roots = [((g.a - g.d) + sgn * disc) / (2.0 * g.c) for sgn in (1.0, -1.0)]
    # |g'(x)| = 1/(cx+d)^2 < 1 at the attracting point
    roots.sort(key=lambda x: -abs(g.c * x + g.d))
    return roots[0], roots[1]


def translation_length(g: Mobius) -> float:
    tr = _require_hyperbolic(g)
    return 2.0 * math.acosh(tr / 2.0)


@dataclass(frozen=True)
class Disk:
    center: float
    radius: float

    def contains(self, z, margin: float = 0.0):
        return np.abs(np.asarray(z) - self.center) < self.radius - margin


@dataclass(frozen=True)
class SchottkyGroup:
    """Schottky data: 2m disks on the real line and their pairing maps.

    Letters run 1..2m; the inverse of letter a is a+m (or a-m).  ``disks[a-1]``
    is D_a and ``generators[a-1]`` maps the complement of D_{a bar} onto D_a.
    """

    m: int
    disks: tuple[Disk, ...]
    generators: tuple[Mobius, ...]
    name: str = "custom"
    basepoints: tuple[complex, ...] = field(default=())

    def __post_init__(self):
        if len(self.disks) != 2 * self.m or len(self.generators) != 2 * self.m:
            raise GeometryError("need exactly 2m disks and 2m generators")
        if not self.basepoints:
            object.__setattr__(self, "basepoints", tuple(complex(d.center) for d in self.disks))

    @property
    def letters(self) -> range:
        return range(1, 2 * self.m + 1)

    def inv(self, a: int) -> int:
        return a + self.m if a <= self.m else a - self.m

    def gen(self, a: int) -> Mobius:
        return self.generators[a - 1]

    def disk(self, a: int) -> Disk:
        return self.disks[a - 1]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "name": self.name,
            "disks": [{"center": d.center, "radius": d.radius} for d in self.disks],
            "generators": [[[g.a, g.b], [g.c, g.d]] for g in self.generators],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SchottkyGroup:
        try:
            m = int(data["m"])
            disks = tuple(Disk(float(d["center"]), float(d["radius"])) for d in data["disks"])
            gens = tuple(Mobius.from_matrix(g) for g in data["generators"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed group definition: {exc}") from exc
        return cls(m=m, disks=disks, generators=gens, name=str(data.get("name", "custom")))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def min_gap(self) -> float:
        gaps = [
            abs(d1.center - d2.center) - d1.radius - d2.radius
            for i, d1 in enumerate(self.disks)
            for d2 in self.disks[i + 1 :]
        ]
        return min(gaps)


def load_group(path) -> SchottkyGroup:
    with open(path) as fh:
        return SchottkyGroup.from_dict(json.load(fh))


def save_group(group: SchottkyGroup, path) -> None:
    Path(path).write_text(json.dumps(group.to_dict(), indent=2))


# -- validation --------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }


def validate_schottky(group: SchottkyGroup, samples: int = 256, tol: float = 1e-9) -> ValidationReport:
    checks = []

    gap = group.min_gap
    checks.append(Check("disjoint_closures", gap > 0, gap))

    worst = 0.0
    for a in group.letters:
        prod = group.gen(a) @ group.gen(group.inv(a))
        worst = max(worst, float(np.max(np.abs(prod.matrix() - np.eye(2)))))
    checks.append(Check("inverse_pairs", worst < 1e-12, 1e-12 - worst))

    theta = 2 * np.pi * np.arange(samples) / samples
    worst_radius = 0.0
    probe_ok = True
    for a in group.letters:
        g, src, dst = group.gen(a), group.disk(group.inv(a)), group.disk(a)
        pts = src.center + src.radius * np.exp(1j * theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            img = mobius_apply(g, pts)
        dev = np.abs(np.abs(img - dst.center) - dst.radius)
        worst_radius = max(worst_radius, float(np.nanmax(dev)) if np.all(np.isfinite(dev)) else math.inf)
        probe = src.center + 2.0 * src.radius + 1.0
        if group.disk(a).contains(probe) or not dst.contains(mobius_apply(g, probe)):
            # the probe must lie outside D_{a bar}; shift further out if it hit another disk
            probe = src.center - 2.0 * src.radius - 1.0
        if not dst.contains(mobius_apply(g, probe)):
            probe_ok = False
    checks.append(Check("boundary_mapping", worst_radius < tol, tol - worst_radius))
    checks.append(Check("exterior_probe", probe_ok, 1.0 if probe_ok else -1.0))

    bp = min(
        group.disk(a).radius - abs(group.basepoints[a - 1] - group.disk(a).center) for a in group.letters
    )
    checks.append(Check("basepoints_inside", bp > 0, bp))
    return ValidationReport(checks)


# -- presets -----------------------------------------------------------------


def _isometric_disks(gens: list[Mobius]) -> list[Disk]:
    # D_a is the interior of the isometric circle of gamma_a^{-1}
    return [Disk(g.a / g.c, 1.0 / abs(g.c)) for g in gens]


def _hyperbolic_about_unit(length: float, scale: float = 1.0) -> Mobius:
    """Hyperbolic element with fixed points +-scale and translation length ``length``."""
    ch, sh = math.cosh(length / 2), math.sinh(length / 2)
    return Mobius(ch, sh * scale, sh / scale, ch)


def cylinder(length: float) -> SchottkyGroup:
    if not length > 0:
        raise GeometryError("length must be positive")
    g = _hyperbolic_about_unit(length)
    gens = [g, g.inverse()]
    return _finish(1, gens, f"cylinder({length:g})")


def funnel3(l1: float, l2: float, l3: float) -> SchottkyGroup:
    """Three-funnel surface: gamma_1, gamma_2, gamma_1 gamma_2^{-1} have lengths l1, l2, l3.

    gamma_1 has axis through +-1 and gamma_2 has axis through +-e^dist, where
    the distance between the axes solves the pants trace relation.
    """
    if min(l1, l2, l3) <= 0:
        raise GeometryError("lengths must be positive")
    c1, s1 = math.cosh(l1 / 2), math.sinh(l1 / 2)
    c2, s2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    cosh_d = (math.cosh(l3 / 2) + c1 * c2) / (s1 * s2)
    dist = math.acosh(cosh_d)
    g1 = _hyperbolic_about_unit(l1)
    g2 = _hyperbolic_about_unit(l2, scale=math.exp(dist))
    gens = [g1, g2, g1.inverse(), g2.inverse()]
    return _finish(2, gens, f"funnel3({l1:g},{l2:g},{l3:g})")


def _finish(m: int, gens: list[Mobius], name: str) -> SchottkyGroup:
    disks = _isometric_disks(gens)
    group = SchottkyGroup(m=m, disks=tuple(disks), generators=tuple(gens), name=name)
    if group.min_gap <= 0:
        raise GeometryError(f"{name}: Schottky disks intersect (gap {group.min_gap:.3g})")
    return group


PRESETS = {"cylinder": cylinder, "funnel3": funnel3}


def build_preset(kind: str, *lengths: float) -> SchottkyGroup:
    try:
        factory = PRESETS[kind]
    except KeyError:
        raise ValueError(f"unknown preset {kind!r}; choose from {sorted(PRESETS)}") from None
    return factory(*lengths)
