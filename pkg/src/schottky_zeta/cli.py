"""Command-line front end: validate, delta, resonances, count, zeta and verify."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .schottky import GeometryError, SchottkyGroup, build_preset, load_group, validate_schottky
from .transfer import BasisCapError, BasisSpec, zeta_det
from .words import ResourceCapError

log = logging.getLogger("schottky_zeta")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

CONFIG_KEYS = {
    "preset",
    "lengths",
    "group_file",
    "box",
    "degree",
    "out",
    "cache",
    "cap_words",
    "tol",
    "sigma",
    "T",
    "mode",
    "points",
    "length_cut",
}


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str | None = "funnel3"
    lengths: tuple[float, ...] = (6.0, 6.0, 6.0)
    group_file: str | None = None
    box: tuple[float, float, float, float] | None = None
    degree: int | None = None
    out: str = "."
    cache: bool = True
    cap_words: int = 10**7
    tol: float = 1e-8
    sigma: float | None = None
    T: float | None = None
    mode: str = "N"
    points: list[complex] = field(default_factory=list)
    length_cut: float = 20.0

    def validate(self) -> None:
        if self.group_file is None and self.preset is None:
            raise InputError("need a preset or a group file")
        if self.group_file is None and (not self.lengths or any(not x > 0 for x in self.lengths)):
            raise InputError("lengths must be positive")
        if self.box is not None:
            s0, s1, t0, t1 = self.box
            if not (s0 < s1 and t0 < t1):
                raise InputError("box must satisfy sigma0 < sigma1 and t0 < t1")
        for name in ("degree", "cap_words", "tol", "length_cut"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise InputError(f"{name} must be positive")
        if self.T is not None and not self.T > 0:
            raise InputError("T must be positive")
        if self.mode not in ("N", "M"):
            raise InputError("mode must be N or M")

    def group(self) -> SchottkyGroup:
        try:
            if self.group_file is not None:
                return load_group(self.group_file)
            return build_preset(self.preset, *self.lengths)
        except json.JSONDecodeError as exc:
            raise InputError(f"cannot parse {self.group_file}: {exc}") from exc
        except (OSError, GeometryError, TypeError) as exc:
            raise InputError(str(exc)) from exc

    def manifest(self, command: str, group: SchottkyGroup) -> dict:
        """Everything that determines the output, in canonical form."""
        return {
            "command": command,
            "version": __version__,
            "group": group.to_dict(),
            "box": list(self.box) if self.box else None,
            "degree": self.degree,
            "cap_words": self.cap_words,
            "tol": self.tol,
            "sigma": self.sigma,
            "T": self.T,
            "mode": self.mode,
            "points": [[p.real, p.imag] for p in self.points],
            "length_cut": self.length_cut,
        }


def config_hash(manifest: dict) -> str:
    return hashlib.sha256(json.dumps(manifest, sort_keys=True).encode()).hexdigest()[:16]


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in str(text).split(","))
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise InputError(f"expected {n} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise InputError("numbers must be finite")
    return vals


def _complexes(items) -> list[complex]:
    try:
        return [complex(str(x).replace(" ", "")) for x in items]
    except ValueError as exc:
        raise InputError(f"bad complex number in {items!r}") from exc


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        if "group_file" in data:
            cfg.preset = None
            path = Path(data["group_file"])
            cfg.group_file = str(path if path.is_absolute() else Path(args.config).parent / path)
        if "preset" in data:
            cfg.preset = data["preset"]
        if "lengths" in data:
            cfg.lengths = _floats(",".join(map(str, data["lengths"])))
        if "box" in data:
            cfg.box = _floats(",".join(map(str, data["box"])), 4)
        if "points" in data:
            cfg.points = _complexes(data["points"])
        if "cache" in data:
            cfg.cache = bool(data["cache"])
        for key in ("degree", "cap_words"):
            if key in data:
                cfg.__dict__[key] = int(data[key])
        for key in ("tol", "sigma", "T", "length_cut"):
            if key in data:
                cfg.__dict__[key] = float(data[key])
        for key in ("out", "mode"):
            if key in data:
                cfg.__dict__[key] = str(data[key])
    if args.preset:
        cfg.preset, cfg.group_file = args.preset, None
    if args.lengths:
        cfg.lengths = _floats(args.lengths)
    if args.group:
        cfg.group_file = args.group
    if args.box:
        cfg.box = _floats(args.box, 4)
    if args.degree is not None:
        cfg.degree = args.degree
    if args.out:
        cfg.out = args.out
    if args.cache:
        cfg.cache = args.cache == "on"
    if args.cap_words is not None:
        cfg.cap_words = args.cap_words
    for key in ("sigma", "T", "tol"):
        if getattr(args, key, None) is not None:
            cfg.__dict__[key] = getattr(args, key)
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    if getattr(args, "points", None):
        cfg.points = _complexes(args.points.split(","))
    cfg.validate()
    return cfg


# -- artifacts -------------------------------------------------------------------


def _artifact(cfg: RunConfig, stem: str, digest: str, suffix: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{stem}_{digest}{suffix}"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _clean(obj):
    """JSON-safe copy with non-finite floats spelled out."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _header(digest: str) -> list[str]:
    return [f"# config_hash={digest}", f"# version={__version__}"]


def cache_dir() -> Path:
    return Path(os.environ.get("SCHOTTKY_CACHE_DIR", Path.home() / ".cache" / "schottky_zeta"))


# -- commands ---------------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    group = cfg.group()
    digest = config_hash(cfg.manifest("validate", group))
    report = validate_schottky(group)
    path = _artifact(cfg, "validate", digest, ".json")
    _write_json(path, {"config_hash": digest, "version": __version__, "group": group.name, **_clean(report.to_dict())})
    if not report.passed:
        print(f"validation failed: {', '.join(report.failed())}", file=sys.stderr)
        return EXIT_CHECK
    print(path)
    return EXIT_OK


def cmd_delta(cfg: RunConfig) -> int:
    from .resonances import delta_bowen, delta_from_determinant

    group = cfg.group()
    _require_valid(group)
    digest = config_hash(cfg.manifest("delta", group))
    basis = BasisSpec(cfg.degree or 24)
    d = delta_bowen(group, basis=basis)
    record = {"config_hash": digest, "version": __version__, "group": group.name, "delta_bowen": d}
    if group.m > 1:
        d2 = delta_from_determinant(group, d, basis=basis)
        record.update(delta_determinant=d2, agreement=abs(d - d2))
    path = _artifact(cfg, "delta", digest, ".json")
    _write_json(path, record)
    print(path)
    return EXIT_OK


def _resonances(cfg: RunConfig, group: SchottkyGroup, digest: str):
    from .resonances import ResonanceSet, Zero, find_resonances

    key = hashlib.sha256(
        json.dumps({"g": group.fingerprint(), "box": cfg.box, "degree": cfg.degree, "tol": cfg.tol}).encode()
    ).hexdigest()[:16]
    cached = cache_dir() / f"resonances_{key}.json"
    if cfg.cache and cached.exists():
        data = json.loads(cached.read_text())
        zeros = [Zero(complex(*z["s"]), z["multiplicity"], z["residual"]) for z in data["zeros"]]
        return ResonanceSet(zeros, tuple(data["box"]), data["params"])
    basis = BasisSpec(cfg.degree) if cfg.degree else None
    rs = find_resonances(group, cfg.box, basis=basis, tol=cfg.tol)
    if cfg.cache:
        cached.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "zeros": [{"s": [z.s.real, z.s.imag], "multiplicity": z.multiplicity, "residual": z.residual} for z in rs.zeros],
            "box": list(rs.box),
            "params": _clean(rs.params),
        }
        cached.write_text(json.dumps(payload))
    return rs


def cmd_resonances(cfg: RunConfig) -> int:
    group = cfg.group()
    _require_valid(group)
    if cfg.box is None:
        raise InputError("resonances needs --box sigma0,sigma1,t0,t1")
    digest = config_hash(cfg.manifest("resonances", group))
    rs = _resonances(cfg, group, digest)
    path = _artifact(cfg, "resonances", digest, ".csv")
    with open(path, "w", newline="") as fh:
        for line in _header(digest):
            fh.write(line + "\n")
        out = csv.writer(fh)
        out.writerow(["re", "im", "multiplicity", "residual"])
        for z in rs.zeros:
            out.writerow([f"{z.s.real:.12f}", f"{z.s.imag:.12f}", z.multiplicity, f"{z.residual:.3e}"])
    _write_json(
        _artifact(cfg, "resonances", digest, ".json"),
        {"config_hash": digest, "version": __version__, "box": list(rs.box), "total": rs.total, "params": _clean(rs.params)},
    )
    print(path)
    return EXIT_OK


def cmd_count(cfg: RunConfig) -> int:
    from .resonances import count

    group = cfg.group()
    _require_valid(group)
    if cfg.box is None or cfg.sigma is None or cfg.T is None:
        raise InputError("count needs --box, --sigma and --T")
    digest = config_hash(cfg.manifest("count", group))
    rs = _resonances(cfg, group, digest)
    n = count(rs, cfg.mode, cfg.sigma, cfg.T)
    path = _artifact(cfg, "count", digest, ".json")
    _write_json(path, {"config_hash": digest, "version": __version__, "mode": cfg.mode, "sigma": cfg.sigma, "T": cfg.T, "count": n})
    print(path)
    return EXIT_OK


def cmd_zeta(cfg: RunConfig) -> int:
    from .transfer import selberg_zeta_product

    group = cfg.group()
    _require_valid(group)
    if not cfg.points:
        raise InputError("zeta needs --points s1,s2,...")
    digest = config_hash(cfg.manifest("zeta", group))
    _check_product_cap(group, cfg)
    basis = BasisSpec(cfg.degree or 24)
    path = _artifact(cfg, "zeta", digest, ".csv")
    with open(path, "w", newline="") as fh:
        for line in _header(digest):
            fh.write(line + "\n")
        out = csv.writer(fh)
        out.writerow(["re_s", "im_s", "re_det", "im_det", "re_product", "im_product", "product_error"])
        for s in cfg.points:
            det = zeta_det(group, s, basis)
            try:
                prod = selberg_zeta_product(group, s, length_cut=cfg.length_cut)
                pv, err = prod.value, prod.error_estimate
            except ValueError:
                pv, err = complex("nan"), float("nan")
            out.writerow([repr(s.real), repr(s.imag), repr(det.real), repr(det.imag), repr(pv.real), repr(pv.imag), repr(err)])
    print(path)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .bounds import run_suite

    group = cfg.group()
    _require_valid(group)
    digest = config_hash(cfg.manifest("verify", group))
    report = run_suite(group)
    path = _artifact(cfg, "verify", digest, ".json")
    _write_json(path, {"config_hash": digest, "version": __version__, "group": group.name, "suites": _clean(report)})
    print(path)
    failed = [name for name, entry in report.items() if entry["status"] != "pass"]
    if failed:
        print(f"failed suites: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _check_product_cap(group: SchottkyGroup, cfg: RunConfig) -> None:
    from .transfer import max_letter_contraction
    from .words import word_count

    n_max = max(1, math.ceil(cfg.length_cut / -math.log(max_letter_contraction(group))))
    need = word_count(group.m, n_max)
    if need > cfg.cap_words:
        raise ResourceCapError(f"length cut {cfg.length_cut} needs words of length {n_max} ({need} > cap {cfg.cap_words})")


def _require_valid(group: SchottkyGroup) -> None:
    report = validate_schottky(group)
    if not report.passed:
        raise InputError(f"invalid Schottky data: {', '.join(report.failed())}")


COMMANDS = {
    "validate": cmd_validate,
    "delta": cmd_delta,
    "resonances": cmd_resonances,
    "count": cmd_count,
    "zeta": cmd_zeta,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schottky-zeta", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--preset", choices=["cylinder", "funnel3"])
    common.add_argument("--lengths", help="comma-separated boundary lengths")
    common.add_argument("--group", help="JSON group definition file")
    common.add_argument("--box", help="sigma0,sigma1,t0,t1")
    common.add_argument("--degree", type=int, help="monomials per disk")
    common.add_argument("--out", help="output directory")
    common.add_argument("--cache", choices=["on", "off"])
    common.add_argument("--cap-words", type=int, dest="cap_words")
    common.add_argument("--tol", type=float)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "count":
            p.add_argument("--sigma", type=float)
            p.add_argument("--T", type=float, dest="T")
            p.add_argument("--mode", choices=["N", "M"])
        if name == "zeta":
            p.add_argument("--points", help="comma-separated complex points, e.g. 1.2+3j,0.8+1j")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ResourceCapError, BasisCapError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
