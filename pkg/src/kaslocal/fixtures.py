"""Backend construction and named function-family fixtures for the runner."""

from __future__ import annotations

import numpy as np

from .config import ConfigError, StructSpec, load_space_file
from .kas import ElementaryCochain
from .spaces import (
    ProductFunction,
    ProductSG,
    SGPoly,
    TorusGrid,
    TrigPoly,
    ball_kernel,
    heat_kernel,
    levy_kernel,
    product_heat,
)
from .spaces.sg import sg_level


def build_backend(spec: StructSpec):
    if spec.name == "torus":
        n = int(spec.params.get("n", 1))
        res = int(spec.params.get("res", 200))
        return TorusGrid(n, res)
    if spec.name == "finite":
        path = spec.params.get("file")
        if not path:
            raise ConfigError("finite backend needs file=PATH")
        return load_space_file(path)
    if spec.name == "sg":
        return sg_level(int(spec.params.get("m", 4)))
    if spec.name == "sg2":
        m = int(spec.params.get("m", 2))
        return ProductSG(sg_level(m), sg_level(m))
    raise ConfigError(f"unknown backend {spec.name!r}")


def backend_for_sweep_point(spec: StructSpec, kernel_name: str, param: str, value: float, values):
    """Backend for one sweep point; torus ball sweeps rescale the grid with r.

    The base resolution applies to the first schedule value and grows by the
    refinement ratio, keeping grid points per ball radius constant.
    """
    if spec.name == "torus" and kernel_name == "ball" and param == "r" and values:
        base = int(spec.params.get("res", 200))
        scaled = int(round(base * float(values[0]) / float(value)))
        adjusted = StructSpec(spec.name, {**spec.params, "res": scaled})
        return build_backend(adjusted)
    return build_backend(spec)


def build_kernel(kernel_spec: StructSpec, backend, override: dict | None = None):
    params = dict(kernel_spec.params)
    if override:
        params.update(override)
    name = kernel_spec.name
    if name == "ball":
        return ball_kernel(backend, float(params["r"]))
    if name == "heat":
        if isinstance(backend, ProductSG):
            return product_heat(float(params["t"]), backend)
        return heat_kernel(backend, float(params["t"]))
    if name == "levy":
        return levy_kernel(backend, float(params["alpha"]))
    raise ConfigError(f"unknown kernel {name!r}")


# ---------------------------------------------------------------------------
# fixtures: named function families producing (F, H) cochain pairs


def _random_trig(dim: int, rng, terms: int = 2) -> TrigPoly:
    out = TrigPoly.const(dim, 0.0)
    for _ in range(terms):
        freq = tuple(int(rng.integers(-3, 4)) for _ in range(dim))
        if all(v == 0 for v in freq):
            freq = (1,) + (0,) * (dim - 1)
        wave = TrigPoly.sin(dim, freq) if rng.random() < 0.5 else TrigPoly.cos(dim, freq)
        out = out + float(rng.normal()) * wave
    return out


def _random_cyl(rng) -> SGPoly:
    coeffs = {}
    for i in range(3):
        for j in range(3 - i):
            if i == j == 0:
                continue
            coeffs[(i, j)] = float(rng.normal())
    return SGPoly(coeffs)


def _torus_fixture(name: str, grid: TorusGrid, p: int, rng):
    dim = grid.n_axes
    if name == "sin":
        fs = [TrigPoly.sin(dim, tuple(1 if a == k else 0 for a in range(dim))) for k in range(p)]
        F = ElementaryCochain(p, [(1.0, fs)], backend=grid)
        return F, F
    if name == "sin-weighted":
        fs = [TrigPoly.sin(dim, tuple(1 if a == k else 0 for a in range(dim))) for k in range(p)]
        g = TrigPoly.const(dim, 2.0) + TrigPoly.cos(dim, (1,) + (0,) * (dim - 1))
        F = ElementaryCochain(p, [(g, fs)], backend=grid)
        return F, F
    if name == "trig-random":
        fs = [_random_trig(dim, rng) for _ in range(p)]
        g = _random_trig(dim, rng, terms=1) + 2.0
        F = ElementaryCochain(p, [(g, fs)], backend=grid)
        return F, F
    if name == "const":
        F = ElementaryCochain(p, [(1.0, [TrigPoly.const(dim, 1.0)] * p)], backend=grid)
        return F, F
    if name == "cancel-pair" and p == 2:
        a, b = _random_trig(dim, rng), _random_trig(dim, rng)
        F = ElementaryCochain(2, [(1.0, [a, b]), (1.0, [b, a])], backend=grid)
        return F, F
    raise ConfigError(f"unknown torus fixture {name!r} for degree {p}")


def _sg_fixture(name: str, lvl, p: int, rng):
    if name == "h1":
        fs = [SGPoly.h1(), SGPoly.h2()][:p] if p <= 2 else None
        if fs is None:
            raise ConfigError("h1 fixture supports degree <= 2")
        F = ElementaryCochain(p, [(1.0, fs)], backend=lvl)
        return F, F
    if name == "cyl-random":
        fs = [_random_cyl(rng) for _ in range(p)]
        g = SGPoly.const(1.0) + 0.5 * SGPoly.h1()
        F = ElementaryCochain(p, [(g, fs)], backend=lvl)
        return F, F
    if name == "cancel-pair" and p == 2:
        a, b = _random_cyl(rng), _random_cyl(rng)
        F = ElementaryCochain(2, [(1.0, [a, b]), (1.0, [b, a])], backend=lvl)
        return F, F
    raise ConfigError(f"unknown gasket fixture {name!r} for degree {p}")


def _finite_fixture(name: str, space, p: int, rng):
    n = space.n_points
    if name == "indicator":
        f = np.zeros(n)
        f[-1] = 1.0
        fs = [f] * p
    elif name == "random":
        fs = [rng.normal(size=n) for _ in range(p)]
    else:
        raise ConfigError(f"unknown finite fixture {name!r}")
    F = ElementaryCochain(p, [(1.0, fs)], backend=space)
    return F, F


def _product_fixture(name: str, prod: ProductSG, p: int, rng):
    one = SGPoly.const(1.0)
    if name == "tensor-h1":
        fs = [ProductFunction.tensor(SGPoly.h1(), one), ProductFunction.tensor(one, SGPoly.h1())][:p]
        F = ElementaryCochain(p, [(1.0, fs)], backend=prod)
        return F, F
    raise ConfigError(f"unknown product fixture {name!r}")


def make_fixture(name: str, backend, p: int, seed: int):
    """(F, H) elementary cochain pair of degree p for a named family."""
    rng = np.random.default_rng(seed)
    if isinstance(backend, TorusGrid):
        return _torus_fixture(name, backend, p, rng)
    if isinstance(backend, ProductSG):
        return _product_fixture(name, backend, p, rng)
    if hasattr(backend, "cells"):
        return _sg_fixture(name, backend, p, rng)
    return _finite_fixture(name, backend, p, rng)


def fixture_function(name: str, backend, seed: int):
    """The scalar function of the degree-1 version of a fixture (for energies)."""
    F, _ = make_fixture(name, backend, 1, seed)
    return F.terms[0][1][0]
