"""Named symbol families.

example1
    3x3 system with a coupling coefficient ``a`` entering through the
    x-slot. Options: ``a`` in {"constant", "x", "holder"}, ``alpha`` for the
    Hölder slot, ``x_range`` and ``a_range``.
example2
    4x4 block system [[Omega, a J], [0, 2 Omega]] with a(x) = x.
friedrichs
    Constant random Hermitian coefficients (seeded).
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .family import Parameter, SymbolFamily

_ZERO3 = [["0"] * 3 for _ in range(3)]


def _identity(n: int) -> list[list[str]]:
    return [["1" if r == c else "0" for c in range(n)] for r in range(n)]


def _check_options(options: dict, allowed: set[str]) -> None:
    extra = set(options) - allowed
    if extra:
        raise ConfigError(f"unknown builtin options: {sorted(extra)}")


def example1(a: str = "constant", alpha: float = 0.5, x_range=(-1.0, 1.0), a_range=(-0.5, 0.5)) -> SymbolFamily:
    x_lo, x_hi = map(float, x_range)
    if a == "constant":
        slot = "a"
        params = [Parameter("a", float(a_range[0]), float(a_range[1])), Parameter("x", x_lo, x_hi)]
        constants = {}
    elif a == "x":
        slot = "x"
        params = [Parameter("x", x_lo, x_hi)]
        constants = {}
    elif a == "holder":
        if not 0 <= alpha:
            raise ConfigError("alpha must be non-negative")
        slot = "abs(x)^alpha"
        params = [Parameter("x", x_lo, x_hi)]
        constants = {"alpha": float(alpha)}
    else:
        raise ConfigError(f"unknown a-slot {a!r}")
    A1 = [["0", "1", "0"], ["1", "0", "0"], ["0", "0", "0"]]
    A2 = [
        ["0", f"x*({slot})", "x"],
        [f"-x*({slot})", "0", "0"],
        [f"x*(1+({slot})^2)", "0", "0"],
    ]
    return SymbolFamily(f"example1-{a}", 3, 2, params, [_identity(3), A1, A2], constants)


def example2(x_range=(-1.0, 1.0)) -> SymbolFamily:
    A1 = [["1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "2", "0"], ["0", "0", "0", "-2"]]
    A2 = [
        ["0", "x", "x^2", "0"],
        ["x", "0", "0", "0"],
        ["0", "0", "0", "2*x"],
        ["0", "0", "2*x", "0"],
    ]
    params = [Parameter("x", float(x_range[0]), float(x_range[1]))]
    return SymbolFamily("example2", 4, 2, params, [_identity(4), A1, A2])


def friedrichs(N: int = 3, d: int = 2, seed: int = 0) -> SymbolFamily:
    rng = np.random.default_rng(seed)
    mats = [_identity(N)]
    for _ in range(d):
        X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        H = 0.5 * (X + X.conj().T)
        mats.append([[repr(complex(H[r, c])) for c in range(N)] for r in range(N)])
    return SymbolFamily(f"friedrichs-{N}x{N}-d{d}", N, d, [], mats)


def build_builtin(name: str, options: dict) -> SymbolFamily:
    if not isinstance(options, dict):
        raise ConfigError("builtin options must be an object")
    if name == "example1":
        _check_options(options, {"a", "alpha", "x_range", "a_range"})
        return example1(**options)
    if name == "example2":
        _check_options(options, {"x_range"})
        return example2(**options)
    if name == "friedrichs":
        _check_options(options, {"N", "d", "seed"})
        return friedrichs(**options)
    raise ConfigError(f"unknown builtin family {name!r}")


def builtin_config(name: str, **options) -> dict:
    return {"schema_version": 1, "builtin": name, "options": dict(options)}


def load_builtin(name: str, **options) -> SymbolFamily:
    return SymbolFamily.from_config(builtin_config(name, **options))
