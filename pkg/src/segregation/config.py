"""Experiment configuration files.

Configs are INI-style text with sections; every key has a default, and
:meth:`ExperimentConfig.describe` lists the effective values so that a report
is self-describing.  Example::

    [run]
    mode = simulate
    eps = 1.0

    [kernels]
    sigma1 = 10
    sigma2 = 1.5

    [initial]
    rho1 = triangle(0, 1)
    rho2 = triangle(0, 1)

    [particles]
    N = 50
    T = 2
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from . import kernels as kn
from .errors import ConfigError
from .grid import GridDensity

MODES = ("simulate", "steady-kr", "steady-asymptotic", "coercivity-check", "eps-map", "compare")

DEFAULTS = {
    "run": {"mode": "simulate", "eps": "1.0", "out": ""},
    "kernels": {
        "base_family": "gaussian",
        "base_amplitude": "1.0",
        "base_width": "1.0",
        "base_table": "",
        "sigma1": "",
        "sigma2": "",
    },
    "masses": {"m1": "1.0", "m2": "1.0"},
    "initial": {"rho1": "triangle(0, 1)", "rho2": "triangle(0, 1)", "atomization": "midpoint", "grid_points": "4001"},
    "particles": {"N": "50", "T": "2.0", "dt": "1e-3", "snapshot_every": "0.5", "bandwidth": "", "snapshot_cells": "800"},
    "steady": {
        "L1": "0.5",
        "L2": "1.0",
        "n1": "64",
        "n2": "64",
        "tol": "1e-10",
        "max_iter": "10000",
        "L2_values": "0.8, 1.0, 1.2",
        "L1_fraction": "0.5",
    },
    "coercivity": {"xi_max": "", "n_xi": "2001"},
    "compare": {"T_long": "20.0", "cells": "1200"},
}

_SPECIES_KEYS = ("family", "amplitude", "width", "table")


@dataclass(frozen=True)
class InitialDensity:
    kind: str
    args: Tuple
    text: str

    def support(self):
        if self.kind == "triangle":
            c, w = self.args
            return c - w, c + w
        if self.kind == "gaussian":
            c, s = self.args
            return c - 8 * s, c + 8 * s
        if self.kind == "uniform":
            return self.args
        raise ValueError(self.kind)

    def to_grid(self, n=4001, base_dir=None) -> GridDensity:
        if self.kind == "table":
            path = Path(self.args[0])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            data = np.loadtxt(path, ndmin=2)
            x, rho = data[:, 0], data[:, 1]
            if np.any(np.diff(x) <= 0) or not np.allclose(np.diff(x), x[1] - x[0]):
                raise ConfigError(f"{path}: x column must be uniform and increasing")
            return GridDensity(x[0], x[1] - x[0], rho)
        a, b = self.support()
        pad = 0.05 * (b - a)
        x = np.linspace(a - pad, b + pad, n)
        if self.kind == "triangle":
            c, w = self.args
            vals = np.maximum(1.0 - np.abs(x - c) / w, 0.0)
        elif self.kind == "gaussian":
            c, s = self.args
            vals = np.exp(-0.5 * ((x - c) / s) ** 2)
        else:
            vals = ((x >= a) & (x <= b)).astype(float)
        return GridDensity(x[0], x[1] - x[0], vals)


_EXPR = re.compile(r"^\s*(triangle|gaussian|uniform|table)\s*\((.*)\)\s*$")


def parse_initial(text, line=None, key=None) -> InitialDensity:
    m = _EXPR.match(text)
    if not m:
        raise ConfigError(f"cannot parse initial density {text!r}; expected triangle(c, w) | gaussian(c, s) | uniform(a, b) | table(path)", line, key)
    kind, inner = m.group(1), m.group(2)
    if kind == "table":
        return InitialDensity(kind, (inner.strip().strip("'\""),), text.strip())
    try:
        args = tuple(float(s) for s in inner.split(","))
    except ValueError:
        raise ConfigError(f"non-numeric arguments in {text!r}", line, key) from None
    if len(args) != 2:
        raise ConfigError(f"{kind} takes two arguments", line, key)
    if kind in ("triangle", "gaussian") and not args[1] > 0:
        raise ConfigError(f"{kind} width must be positive", line, key)
    if kind == "uniform" and not args[1] > args[0]:
        raise ConfigError("uniform(a, b) needs a < b", line, key)
    return InitialDensity(kind, args, text.strip())


@dataclass
class ExperimentConfig:
    """Everything one run needs; see the module docstring for the file format."""

    mode: str = "simulate"
    eps: float = 1.0
    triple: kn.KernelTriple = field(default_factory=lambda: kn.KernelTriple.multiples(1.0, 1.0))
    m1: float = 1.0
    m2: float = 1.0
    init1: InitialDensity = field(default_factory=lambda: parse_initial("triangle(0, 1)"))
    init2: InitialDensity = field(default_factory=lambda: parse_initial("triangle(0, 1)"))
    atomization: str = "midpoint"
    grid_points: int = 4001
    N: int = 50
    T: float = 2.0
    dt: float = 1e-3
    snapshot_every: float = 0.5
    bandwidth: Optional[float] = None
    snapshot_cells: int = 800
    L1: float = 0.5
    L2: float = 1.0
    n1: int = 64
    n2: int = 64
    tol: float = 1e-10
    max_iter: int = 10000
    L2_values: Tuple[float, ...] = (0.8, 1.0, 1.2)
    L1_fraction: float = 0.5
    xi_max: Optional[float] = None
    n_xi: int = 2001
    T_long: float = 20.0
    compare_cells: int = 1200
    out: str = ""
    base_dir: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._check()

    def _check(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}", field="mode")
        for name in ("eps", "m1", "m2", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive", field=name)
        if self.N < 2:
            raise ConfigError("N must be at least 2", field="N")
        if self.T < 0:
            raise ConfigError("T must be non-negative", field="T")

    @property
    def rho1_0(self):
        return self.init1.to_grid(self.grid_points, self.base_dir)

    @property
    def rho2_0(self):
        return self.init2.to_grid(self.grid_points, self.base_dir)

    @property
    def z1(self):
        return self.m1 / (self.m1 + self.m2)

    @property
    def mass_total(self):
        return self.m1 + self.m2

    def describe(self):
        """``section.key = value`` lines for every effective setting."""
        lines = []
        for section, keys in DEFAULTS.items():
            for key in keys:
                value = self.raw.get(section, {}).get(key, keys[key])
                lines.append(f"{section}.{key} = {value}")
        return lines


def _find_line(text, section, key):
    current = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return no
    return None


def _kernel_from(get, prefix, base_dir):
    family = get(f"{prefix}_family").lower()
    if family == kn.GAUSSIAN:
        return kn.Kernel(kn.GAUSSIAN, get(f"{prefix}_amplitude", float), get(f"{prefix}_width", float))
    if family == kn.TABULATED:
        path = Path(get(f"{prefix}_table"))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return kn.load_table(path).scaled(get(f"{prefix}_amplitude", float))
    raise ConfigError(f"unknown kernel family {family!r}", field=f"{prefix}_family")


def loads(text, base_dir=None) -> ExperimentConfig:
    if not text.strip():
        raise ConfigError("empty config")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    known_sections = set(DEFAULTS)
    raw = {}
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown section [{section}]", _find_line(text, section, "") or None)
        allowed = set(DEFAULTS[section])
        if section == "kernels":
            allowed |= {f"{p}_{k}" for p in ("s1", "s2", "k") for k in _SPECIES_KEYS}
        for key, value in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key in [{section}]", _find_line(text, section, key), key)
            raw.setdefault(section, {})[key] = value.strip()
    if not raw:
        raise ConfigError("config defines no settings")

    def getter(section):
        def get(key, conv=str):
            value = raw.get(section, {}).get(key)
            if value is None and section == "kernels" and key.split("_")[0] in ("s1", "s2", "k"):
                base_key = "base_" + key.split("_", 1)[1]
                value = raw.get(section, {}).get(base_key, DEFAULTS[section][base_key])
            if value is None:
                value = DEFAULTS[section].get(key, "")
            try:
                return conv(value)
            except ValueError:
                raise ConfigError(f"cannot convert {value!r} with {conv.__name__}", _find_line(text, section, key), key) from None

        return get

    run = getter("run")
    kg = getter("kernels")
    base = _kernel_from(kg, "base", base_dir)
    ksec = raw.get("kernels", {})

    def species_kernel(prefix, sigma_key):
        if any(f"{prefix}_{k}" in ksec for k in _SPECIES_KEYS):
            return _kernel_from(kg, prefix, base_dir)
        sigma = ksec.get(sigma_key, "")
        if sigma == "":
            return base
        try:
            return base.scaled(float(sigma))
        except ValueError:
            raise ConfigError(f"cannot convert {sigma!r} to float", _find_line(text, "kernels", sigma_key), sigma_key) from None

    try:
        s1 = species_kernel("s1", "sigma1")
        s2 = species_kernel("s2", "sigma2")
        k = _kernel_from(kg, "k", base_dir) if any(f"k_{x}" in ksec for x in _SPECIES_KEYS) else base
    except (OSError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field="kernels") from None

    ms = getter("masses")
    ini = getter("initial")
    pa = getter("particles")
    st = getter("steady")
    co = getter("coercivity")
    cp = getter("compare")

    def opt_float(get, key):
        v = get(key)
        return float(v) if v != "" else None

    def floats(get, key):
        return tuple(float(s) for s in get(key).split(",") if s.strip())

    init1 = parse_initial(ini("rho1"), _find_line(text, "initial", "rho1"), "rho1")
    init2 = parse_initial(ini("rho2"), _find_line(text, "initial", "rho2"), "rho2")
    atomization = ini("atomization")
    if atomization not in ("sup", "midpoint"):
        raise ConfigError("atomization must be 'sup' or 'midpoint'", _find_line(text, "initial", "atomization"), "atomization")

    try:
        cfg = ExperimentConfig(
            mode=run("mode"),
            eps=run("eps", float),
            triple=kn.KernelTriple(s1, s2, k),
            m1=ms("m1", float),
            m2=ms("m2", float),
            init1=init1,
            init2=init2,
            atomization=atomization,
            grid_points=ini("grid_points", int),
            N=pa("N", int),
            T=pa("T", float),
            dt=pa("dt", float),
            snapshot_every=pa("snapshot_every", float),
            bandwidth=opt_float(pa, "bandwidth"),
            snapshot_cells=pa("snapshot_cells", int),
            L1=st("L1", float),
            L2=st("L2", float),
            n1=st("n1", int),
            n2=st("n2", int),
            tol=st("tol", float),
            max_iter=st("max_iter", int),
            L2_values=floats(st, "L2_values"),
            L1_fraction=st("L1_fraction", float),
            xi_max=opt_float(co, "xi_max"),
            n_xi=co("n_xi", int),
            T_long=cp("T_long", float),
            compare_cells=cp("cells", int),
            out=run("out"),
            base_dir=base_dir,
            raw=raw,
        )
    except ConfigError as exc:
        if exc.field is not None and exc.line is None:
            for section in DEFAULTS:
                line = _find_line(text, section, exc.field)
                if line is not None:
                    raise ConfigError(str(exc).split("] ", 1)[-1].replace("config: ", ""), line, exc.field) from None
        raise
    return cfg


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, base_dir=str(path.parent))
