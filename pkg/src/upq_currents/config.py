"""Run configuration shared by the suites and the command line."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import yaml

from .errors import ConfigInvalid

SUITES = ("group", "iwasawa", "bargmann", "special", "extension", "qp", "currents", "all")


def default_degree(p: int, q: int) -> int:
    """10 for a single Heisenberg variable, 6 otherwise (keeps bases small)."""
    return 10 if p * (q - p) <= 1 else 6


@dataclass(frozen=True)
class RunConfig:
    suite: str = "all"
    p: int = 1
    q: int = 2
    eps: tuple[int, ...] | None = None
    degree: int | None = None
    seed: int = 42
    samples: int = 20000
    window_min: float = 1e-3
    window_max: float = 10.0
    out_dir: str = "reports"

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigInvalid(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        if not (isinstance(self.p, int) and isinstance(self.q, int)) or not 1 <= self.p <= self.q:
            raise ConfigInvalid(f"need integers q >= p >= 1, got p={self.p}, q={self.q}")
        eps = tuple(int(e) for e in self.eps) if self.eps is not None else (1,) * self.p
        if len(eps) != self.p or any(e not in (1, -1) for e in eps):
            raise ConfigInvalid(f"eps must be {self.p} signs from +1/-1, got {self.eps!r}")
        object.__setattr__(self, "eps", eps)
        deg = default_degree(self.p, self.q) if self.degree is None else int(self.degree)
        if deg < 4:
            raise ConfigInvalid("degree must be >= 4")
        object.__setattr__(self, "degree", deg)
        if self.samples < 100:
            raise ConfigInvalid("samples must be >= 100")
        if not 0 < self.window_min < self.window_max:
            raise ConfigInvalid("need 0 < window_min < window_max")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps"] = list(self.eps)
        return d

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_eps(text) -> tuple[int, ...]:
    """Accept ``"+,-"``, ``"1,-1"`` or a list."""
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).replace(" ", "").split(",") if t]
    out = []
    for t in items:
        t = str(t)
        if t in ("+", "+1", "1"):
            out.append(1)
        elif t in ("-", "-1"):
            out.append(-1)
        else:
            raise ConfigInvalid(f"bad sign {t!r} in eps")
    return tuple(out)


_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path: str | Path) -> dict:
    """Read a flat key/value YAML file; keys mirror the flags (dashes or underscores)."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigInvalid("config file must be a flat mapping")
    out = {}
    for k, v in data.items():
        key = str(k).replace("-", "_")
        if key not in _KEYS:
            raise ConfigInvalid(f"unknown config key {k!r}")
        if isinstance(v, (dict, list)) and key != "eps":
            raise ConfigInvalid(f"config value for {k!r} must be a scalar")
        out[key] = parse_eps(v) if key == "eps" else v
    return out
