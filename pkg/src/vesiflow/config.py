"""Run configuration: INI sections with flat ``key = value`` entries.

Example::

    [grid]
    n = 64
    length = 6.283185307179586

    [params]
    mu_b = 1.0
    mu = 1.0
    kappa = 1.0
    C0 = 0.0
    eta = 0.0
    gamma = 1.0

    [initial]
    preset = single-mode      ; single-mode | random-smooth | file
    mode = 1, 0
    amplitude = 0.01

    [run]
    integrator = imex         ; linear | imex | picard
    dt = 0.01
    t_end = 1.0
    output = out
    cadence = 10

Relative paths (``output``, ``[initial] path``) are resolved against the
directory holding the config file.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .evolution import INTEGRATORS
from .fields import HeightField, random_smooth, single_mode
from .params import MaterialParams

PRESETS = ("single-mode", "random-smooth", "file")


@dataclass(frozen=True)
class InitialSpec:
    preset: str = "single-mode"
    mode: tuple = (1, 0)
    amplitude: float = 0.01
    phase: float = 0.0
    seed: int = 0
    decay: float = 4.0
    max_mode: int | None = None
    path: Path | None = None


@dataclass(frozen=True)
class VerifyOptions:
    """Knobs of the verification suites."""

    bvp_m: int = 2000
    refine: bool = True
    n_tuples: int = 12
    seed: int = 0
    theta: float = 3.0 * np.pi / 5.0
    vartheta: float = (np.pi - 3.0 * np.pi / 5.0) / 10.0
    output: Path = Path(".")


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    length: float = 2.0 * np.pi
    params: MaterialParams = field(default_factory=MaterialParams)
    initial: InitialSpec = field(default_factory=InitialSpec)
    integrator: str = "imex"
    dt: float = 0.01
    t_end: float = 1.0
    output: Path = Path("out")
    cadence: int = 1
    picard_tol: float = 1e-12
    picard_max_iter: int = 50
    verify: VerifyOptions = field(default_factory=VerifyOptions)
    raw: dict = field(default_factory=dict)

    def initial_height(self) -> HeightField:
        """Build the initial height and enforce ``max|h0| < gamma / 2``."""
        spec = self.initial
        if spec.preset == "single-mode":
            h = single_mode(self.n, self.length, spec.mode, spec.amplitude, spec.phase)
        elif spec.preset == "random-smooth":
            h = random_smooth(self.n, self.length, spec.seed, spec.decay, spec.amplitude, spec.max_mode)
        else:
            from .io import SnapshotFormatError, read_snapshot

            try:
                h = read_snapshot(spec.path)
            except (OSError, SnapshotFormatError) as exc:
                raise ConfigError(f"cannot read initial snapshot: {exc}") from exc
            if h.n != self.n or not np.isclose(h.length, self.length):
                raise ConfigError(f"initial snapshot grid (N={h.n}, L={h.length}) does not match [grid]")
        limit = 0.5 * self.params.gamma
        if h.sup_norm >= limit:
            raise ConfigError(
                f"initial amplitude max|h0| = {h.sup_norm:.6g} violates the small-data bound max|h0| < gamma/2 = {limit:.6g}"
            )
        return h


def _get(section, key, conv, default):
    if section is None or key not in section:
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {exc}") from exc


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _mode(raw: str) -> tuple:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError("mode needs two integers")
    return int(parts[0]), int(parts[1])


def _optional_int(raw: str):
    return None if raw.lower() in ("", "none") else int(raw)


KNOWN_KEYS = {
    "grid": {"n", "length"},
    "params": {"mu_b", "mu", "kappa", "c0", "eta", "gamma"},
    "initial": {"preset", "mode", "amplitude", "phase", "seed", "decay", "max_mode", "path"},
    "run": {"integrator", "dt", "t_end", "output", "cadence", "picard_tol", "picard_max_iter"},
    "oracle": {"bvp_m", "refine", "n_tuples", "seed", "alpha_scale"},
    "verify": {"theta", "vartheta", "output"},
}


def parse_config(text: str, base_dir=".") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for name in parser.sections():
        if name not in KNOWN_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - KNOWN_KEYS[name]
        if unknown:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    base = Path(base_dir)
    sec = {name: (parser[name] if parser.has_section(name) else None) for name in KNOWN_KEYS}

    n = _get(sec["grid"], "n", int, 64)
    if n < 4 or n & (n - 1):
        raise ConfigError(f"[grid] n = {n} must be a power of two >= 4")
    length = _get(sec["grid"], "length", float, 2.0 * np.pi)
    if not length > 0:
        raise ConfigError("[grid] length must be positive")

    p = sec["params"]
    alpha_scale = _get(sec["oracle"], "alpha_scale", float, 1.0)
    try:
        params = MaterialParams(
            mu_b=_get(p, "mu_b", float, 1.0),
            mu=_get(p, "mu", float, 1.0),
            kappa=_get(p, "kappa", float, 1.0),
            C0=_get(p, "c0", float, 0.0),
            eta=_get(p, "eta", float, 0.0),
            gamma=_get(p, "gamma", float, 1.0),
            alpha_scale=alpha_scale,
        )
    except ValueError as exc:
        raise ConfigError(f"[params] {exc}") from exc

    i = sec["initial"]
    preset = _get(i, "preset", str, "single-mode")
    if preset not in PRESETS:
        raise ConfigError(f"[initial] preset must be one of {PRESETS}, got {preset!r}")
    path = _get(i, "path", str, None)
    if preset == "file" and not path:
        raise ConfigError("[initial] preset = file needs a path")
    initial = InitialSpec(
        preset=preset,
        mode=_get(i, "mode", _mode, (1, 0)),
        amplitude=_get(i, "amplitude", float, 0.01),
        phase=_get(i, "phase", float, 0.0),
        seed=_get(i, "seed", int, 0),
        decay=_get(i, "decay", float, 4.0),
        max_mode=_get(i, "max_mode", _optional_int, None),
        path=(base / path) if path else None,
    )
    if not initial.amplitude >= 0:
        raise ConfigError("[initial] amplitude must be nonnegative")

    r = sec["run"]
    integrator = _get(r, "integrator", str, "imex")
    if integrator not in INTEGRATORS:
        raise ConfigError(f"[run] integrator must be one of {INTEGRATORS}, got {integrator!r}")
    dt = _get(r, "dt", float, 0.01)
    t_end = _get(r, "t_end", float, 1.0)
    cadence = _get(r, "cadence", int, 1)
    if not dt > 0:
        raise ConfigError("[run] dt must be positive")
    if not t_end > 0:
        raise ConfigError("[run] t_end must be positive")
    if cadence < 1:
        raise ConfigError("[run] cadence must be >= 1")

    o, v = sec["oracle"], sec["verify"]
    verify = VerifyOptions(
        bvp_m=_get(o, "bvp_m", int, 2000),
        refine=_get(o, "refine", _bool, True),
        n_tuples=_get(o, "n_tuples", int, 12),
        seed=_get(o, "seed", int, 0),
        theta=_get(v, "theta", float, 3.0 * np.pi / 5.0),
        vartheta=_get(v, "vartheta", float, (np.pi - 3.0 * np.pi / 5.0) / 10.0),
        output=base / _get(v, "output", str, "."),
    )
    raw = {name: dict(parser[name]) for name in parser.sections()}
    return RunConfig(
        n=n,
        length=length,
        params=params,
        initial=initial,
        integrator=integrator,
        dt=dt,
        t_end=t_end,
        output=base / _get(r, "output", str, "out"),
        cadence=cadence,
        picard_tol=_get(r, "picard_tol", float, 1e-12),
        picard_max_iter=_get(r, "picard_max_iter", int, 50),
        verify=verify,
        raw=raw,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
