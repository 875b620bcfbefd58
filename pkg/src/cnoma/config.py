"""Flat ``section.key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Every key is optional; omitted keys
take the reference-scenario defaults listed in :data:`DEFAULTS`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .model import (
    RELAY_OFFSET_DB,
    ConstantVariance,
    ErrorModel,
    PerfectCsi,
    ScaledVariance,
    SystemConfig,
    config_for_power_sweep,
)
from .montecarlo import McConfig
from .quadrature import QuadratureSpec

log = logging.getLogger(__name__)

REFERENCE_GRID = "perfect, scaled:1, scaled:5, scaled:20, constant:1e-3, constant:3.3e-3, constant:1e-2"
OUTPUT_GROUPS = ("ue1", "ue2", "un_ue1", "floors", "asymptotes")

DEFAULTS = {
    "system.n0": "1",
    "system.sigma1_sq": "0.36",
    "system.sigma2_sq": "0.16",
    "system.sigma3_sq": "0.64",
    "system.rate1": "1.5",
    "system.rate2": "1",
    "system.gamma_bar1": "",
    "system.gamma_bar2": "",
    "power.lambda_p": "5",
    "power.pt_db": "20",
    "power.relay_offset_db": str(RELAY_OFFSET_DB),
    "power.p1": "",
    "power.p2": "",
    "power.p3": "",
    "error.model": "perfect",
    "error.sigma_c_sq": "0",
    "error.eta": "0",
    "sweep.pt_db_start": "0",
    "sweep.pt_db_stop": "60",
    "sweep.pt_db_step": "2",
    "sweep.error_models": REFERENCE_GRID,
    "sweep.outputs": ", ".join(OUTPUT_GROUPS),
    "mc.trials": "0",
    "mc.seed": "0",
    "mc.chunk_size": str(1 << 16),
    "mc.confidence": "0.99",
    "quad.rel_tol": "1e-10",
    "quad.abs_tol": "1e-14",
    "quad.max_depth": "50",
}


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    pt_db_start: float = 0.0
    pt_db_stop: float = 60.0
    pt_db_step: float = 2.0
    error_model_grid: tuple = ()
    outputs: tuple = OUTPUT_GROUPS
    mc: Optional[McConfig] = None
    relay_offset_db: float = RELAY_OFFSET_DB
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not self.pt_db_step > 0:
            raise ValidationError("sweep.pt_db_step", f"must be > 0, got {self.pt_db_step}")
        if not self.pt_db_start <= self.pt_db_stop:
            raise ValidationError(
                "sweep.pt_db_start",
                f"must not exceed pt_db_stop ({self.pt_db_start} > {self.pt_db_stop})",
            )
        bad = set(self.outputs) - set(OUTPUT_GROUPS)
        if bad:
            raise ValidationError("sweep.outputs", f"unknown output groups {sorted(bad)}")

    def pt_grid(self):
        n = int(math.floor((self.pt_db_stop - self.pt_db_start) / self.pt_db_step + 1e-9)) + 1
        return [round(self.pt_db_start + i * self.pt_db_step, 10) for i in range(n)]


def parse_error_model(text: str) -> ErrorModel:
    """Parse ``perfect``, ``scaled:<eta>`` or ``constant:<sigma_c_sq>``."""
    t = text.strip().lower()
    if t == "perfect":
        return PerfectCsi()
    kind, sep, value = t.partition(":")
    if not sep:
        raise ValueError(f"error model {text!r} needs a value, e.g. scaled:1")
    v = float(value)
    if kind in ("scaled", "eta"):
        return ScaledVariance(v)
    if kind in ("constant", "sigma_c", "const"):
        return ConstantVariance(v)
    raise ValueError(f"unknown error model kind {kind!r}")


def _read_pairs(text: str, path=None):
    pairs = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key = key.strip()
        if key not in DEFAULTS:
            raise ParseError(f"unknown key {key!r}", lineno, path)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r} (first on line {lines[key]})", lineno, path)
        pairs[key] = value.strip()
        lines[key] = lineno
    return pairs, lines


class _Fields:
    def __init__(self, pairs, lines, path):
        self.pairs, self.lines, self.path = pairs, lines, path

    def raw(self, key):
        return self.pairs.get(key, DEFAULTS[key])

    def given(self, key):
        return self.pairs.get(key, "") != ""

    def convert(self, key, fn):
        text = self.raw(key)
        try:
            return fn(text)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"{key}: cannot parse {text!r} ({exc})", self.lines.get(key), self.path)

    def num(self, key):
        return self.convert(key, float)

    def opt_num(self, key):
        return self.num(key) if self.raw(key) != "" else None

    def int(self, key):
        return self.convert(key, int)


def parse_config(text: str, path=None):
    """Parse configuration text into ``(SystemConfig, SweepSpec)``."""
    pairs, lines = _read_pairs(text, path)
    f = _Fields(pairs, lines, path)

    g1, g2 = f.opt_num("system.gamma_bar1"), f.opt_num("system.gamma_bar2")
    if g1 is not None or g2 is not None:
        log.warning("SINR thresholds given directly; rate fields are ignored for those thresholds")

    kind = f.raw("error.model").strip().lower()
    if kind == "perfect":
        error_model = PerfectCsi()
    elif kind == "constant":
        error_model = ConstantVariance(f.num("error.sigma_c_sq"))
    elif kind == "scaled":
        error_model = ScaledVariance(f.num("error.eta"))
    else:
        raise ParseError(f"error.model: unknown model {kind!r}", lines.get("error.model"), path)

    explicit = [f.given(k) for k in ("power.p1", "power.p2", "power.p3")]
    if any(explicit) and not all(explicit):
        raise ValidationError("power", "p1, p2 and p3 must be given together")
    offset = f.num("power.relay_offset_db")
    common = dict(
        n0=f.num("system.n0"),
        sigma1_sq=f.num("system.sigma1_sq"),
        sigma2_sq=f.num("system.sigma2_sq"),
        sigma3_sq=f.num("system.sigma3_sq"),
        error_model=error_model,
        rate1=f.num("system.rate1"),
        rate2=f.num("system.rate2"),
        gamma_bar1=g1,
        gamma_bar2=g2,
    )
    if all(explicit):
        config = SystemConfig(p1=f.num("power.p1"), p2=f.num("power.p2"), p3=f.num("power.p3"), **common)
    else:
        lam = f.num("power.lambda_p")
        if not lam > 1:
            raise ValidationError("power.lambda_p", f"NOMA power ordering requires p2/p1 > 1, got {lam}")
        seed_config = SystemConfig(p1=1.0, p2=lam, p3=1.0, **common)
        config = config_for_power_sweep(seed_config, f.num("power.pt_db"), offset)

    grid = f.convert(
        "sweep.error_models",
        lambda s: tuple(parse_error_model(part) for part in s.split(",") if part.strip()),
    )
    if not grid:
        raise ValidationError("sweep.error_models", "at least one error model is required")
    outputs = tuple(o.strip() for o in f.raw("sweep.outputs").split(",") if o.strip())

    trials = f.int("mc.trials")
    if trials < 0:
        raise ValidationError("mc.trials", f"must be >= 0, got {trials}")
    mc = None
    if trials > 0:
        mc = McConfig(
            trials=trials,
            seed=f.int("mc.seed"),
            chunk_size=f.int("mc.chunk_size"),
            confidence=f.num("mc.confidence"),
        )
    quad = QuadratureSpec(f.num("quad.rel_tol"), f.num("quad.abs_tol"), f.int("quad.max_depth"))
    sweep = SweepSpec(
        base=config,
        pt_db_start=f.num("sweep.pt_db_start"),
        pt_db_stop=f.num("sweep.pt_db_stop"),
        pt_db_step=f.num("sweep.pt_db_step"),
        error_model_grid=grid,
        outputs=outputs,
        mc=mc,
        relay_offset_db=offset,
        quad=quad,
    )
    return config, sweep


def load_config(path):
    """Read and validate a configuration file."""
    p = Path(path)
    return parse_config(p.read_text(), path=str(p))
