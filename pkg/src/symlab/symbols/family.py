"""Symbol families L(a, xi) = sum_j xi_j A_j(a) and their JSON configs."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ConfigError, DomainError
from .expression import Expression

SCHEMA_VERSION = 1
_INLINE_KEYS = {"schema_version", "name", "N", "d", "params", "constants", "matrices"}
_BUILTIN_KEYS = {"schema_version", "builtin", "options"}


@dataclass(frozen=True)
class Parameter:
    name: str
    lo: float
    hi: float


class SymbolFamily:
    """Matrices A_0(a), ..., A_d(a) given by entry expressions.

    ``coefficients(a)`` broadcasts over leading axes of ``a`` (last axis is
    the parameter vector) and returns shape ``(..., d+1, N, N)``.
    """

    def __init__(self, name: str, N: int, d: int, params: list[Parameter],
                 matrices: list, constants: dict | None = None, config: dict | None = None):
        self.name = name
        self.N = int(N)
        self.d = int(d)
        self.params = list(params)
        self.constants = dict(constants or {})
        if len(matrices) != self.d + 1:
            raise ConfigError(f"expected {self.d + 1} matrices, got {len(matrices)}")
        names = {p.name for p in self.params} | set(self.constants)
        if len(names) != len(self.params) + len(self.constants):
            raise ConfigError("parameter and constant names must be distinct")
        self._entries = []
        for M in matrices:
            if len(M) != self.N or any(len(row) != self.N for row in M):
                raise ConfigError(f"each matrix must be {self.N}x{self.N}")
            self._entries.append([[Expression(e, names) for e in row] for row in M])
        self._config = copy.deepcopy(config) if config is not None else self._inline_config(matrices)

    def _inline_config(self, matrices) -> dict:
        cfg: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "N": self.N,
            "d": self.d,
            "params": [{"name": p.name, "lo": p.lo, "hi": p.hi} for p in self.params],
            "matrices": [[list(row) for row in M] for M in matrices],
        }
        if self.constants:
            cfg["constants"] = dict(self.constants)
        return cfg

    def __reduce__(self):
        # compiled expressions are closures; rebuild from the config instead
        return (SymbolFamily.from_config, (self.to_config(),))

    # -- configuration -------------------------------------------------
    def to_config(self) -> dict:
        return copy.deepcopy(self._config)

    @classmethod
    def from_config(cls, cfg: dict) -> "SymbolFamily":
        if not isinstance(cfg, dict):
            raise ConfigError("family config must be a JSON object")
        if cfg.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {cfg.get('schema_version')!r}")
        if "builtin" in cfg:
            extra = set(cfg) - _BUILTIN_KEYS
            if extra:
                raise ConfigError(f"unknown fields in family config: {sorted(extra)}")
            from .builtins import build_builtin

            fam = build_builtin(cfg["builtin"], cfg.get("options", {}))
            fam._config = copy.deepcopy(cfg)
            return fam
        extra = set(cfg) - _INLINE_KEYS
        if extra:
            raise ConfigError(f"unknown fields in family config: {sorted(extra)}")
        missing = {"name", "N", "d", "params", "matrices"} - set(cfg)
        if missing:
            raise ConfigError(f"missing fields in family config: {sorted(missing)}")
        params = []
        for p in cfg["params"]:
            if set(p) != {"name", "lo", "hi"}:
                raise ConfigError("each parameter needs exactly name, lo, hi")
            if not p["lo"] <= p["hi"]:
                raise ConfigError(f"empty range for parameter {p['name']}")
            params.append(Parameter(str(p["name"]), float(p["lo"]), float(p["hi"])))
        constants = cfg.get("constants", {})
        if not all(isinstance(v, (int, float)) for v in constants.values()):
            raise ConfigError("constants must be numbers")
        return cls(str(cfg["name"]), cfg["N"], cfg["d"], params, cfg["matrices"], constants, cfg)

    @classmethod
    def from_json(cls, text: str) -> "SymbolFamily":
        return cls.from_config(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self._config, indent=2, sort_keys=True)

    # -- evaluation ----------------------------------------------------
    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def box(self) -> np.ndarray:
        return np.array([[p.lo, p.hi] for p in self.params], dtype=float).reshape(-1, 2)

    def in_domain(self, a, rtol: float = 1e-12) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        box = self.box
        span = np.maximum(box[:, 1] - box[:, 0], 1.0)
        lo_ok = a >= box[:, 0] - rtol * span
        hi_ok = a <= box[:, 1] + rtol * span
        return np.all(lo_ok & hi_ok, axis=-1)

    def coefficients(self, a, check: bool = False) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape[-1:] != (self.n_params,):
            if self.n_params == 0 and a.ndim == 0:
                a = a.reshape(0)
            else:
                raise DomainError(f"parameter vector must have length {self.n_params}")
        if check and not np.all(self.in_domain(a)):
            raise DomainError(f"parameter {a.tolist()} outside the domain {self.box.tolist()}")
        lead = a.shape[:-1]
        env = {p.name: a[..., k] for k, p in enumerate(self.params)}
        env.update({k: float(v) for k, v in self.constants.items()})
        out = np.zeros(lead + (self.d + 1, self.N, self.N), dtype=complex)
        with np.errstate(invalid="ignore", divide="ignore"):
            for j, M in enumerate(self._entries):
                for r, row in enumerate(M):
                    for c, e in enumerate(row):
                        if e.constant_value is not None:
                            if e.constant_value != 0:
                                out[..., j, r, c] = e.constant_value
                        else:
                            out[..., j, r, c] = e(env)
        if check and not np.all(np.isfinite(out)):
            raise DomainError("coefficients are not finite at the requested parameter")
        return out

    def symbol(self, a, xi, check: bool = False) -> np.ndarray:
        """L(a, xi) with broadcasting between the leading axes of ``a`` and ``xi``."""
        coeffs = self.coefficients(a, check=check)
        xi = np.asarray(xi)
        if xi.shape[-1] != self.d + 1:
            raise DomainError(f"frequency vector must have length {self.d + 1}")
        return np.einsum("...j,...jrc->...rc", xi, coeffs)

    def __repr__(self) -> str:
        return f"SymbolFamily({self.name!r}, N={self.N}, d={self.d}, params={[p.name for p in self.params]})"


def eval_symbol(fam: SymbolFamily, a, xi) -> np.ndarray:
    """Checked evaluation: raises :class:`DomainError` outside the parameter box."""
    return fam.symbol(a, xi, check=True)
