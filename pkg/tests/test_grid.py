import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symlab.errors import DomainError
from symlab.grid import GridFunction, decode_snapshots, encode_snapshots, load_trajectory, save_trajectory


def test_rejects_non_power_of_two():
    with pytest.raises(DomainError):
        GridFunction(np.zeros((1, 12)))


def test_rejects_non_finite():
    v = np.zeros((1, 8))
    v[0, 3] = np.nan
    with pytest.raises(DomainError):
        GridFunction(v)


def test_rejects_ragged_2d():
    with pytest.raises(DomainError):
        GridFunction(np.zeros((1, 8, 16)))


def test_geometry():
    g = GridFunction(np.zeros((2, 16)), L=2.0)
    assert g.dims == 1 and g.n == 16 and g.ncomp == 2
    assert g.h == pytest.approx(0.25)
    assert g.x[0] == -2.0 and g.x[-1] == pytest.approx(2.0 - 0.25)
    assert g.nyquist == pytest.approx(np.pi / 0.25)


def test_spectral_derivative_of_sine():
    g = GridFunction.from_function(lambda x: np.sin(3 * x), 64)
    d = g.derivative()
    assert np.allclose(d.values[0], 3 * np.cos(3 * g.x), atol=1e-12)


def test_norm_and_inner():
    g = GridFunction.from_function(lambda x: np.exp(1j * 2 * x), 32)
    assert g.norm() ** 2 == pytest.approx(2 * np.pi)
    assert g.inner(g) == pytest.approx(2 * np.pi)


def test_band_limited_noise_support():
    rng = np.random.default_rng(0)
    g = GridFunction.band_limited_noise(rng, 64, ncomp=3)
    uh = g.fft()
    assert np.abs(uh[:, g.kabs() > g.nyquist / 2]).max() < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 2]), st.integers(1, 3))
def test_binary_round_trip(seed, dims, ncomp):
    rng = np.random.default_rng(seed)
    n = 8 if dims == 2 else 32
    g = GridFunction(rng.standard_normal((ncomp,) + (n,) * dims) + 1j * rng.standard_normal((ncomp,) + (n,) * dims),
                     L=float(rng.uniform(0.5, 5)))
    back = GridFunction.from_bytes(g.to_bytes())
    assert back.L == g.L
    assert np.array_equal(back.values, g.values)


def test_bad_magic_and_size():
    data = GridFunction(np.ones((1, 8))).to_bytes()
    with pytest.raises(DomainError, match="magic"):
        decode_snapshots(b"XXXX" + data[4:])
    with pytest.raises(DomainError, match="size"):
        decode_snapshots(data[:-16])
    with pytest.raises(DomainError):
        decode_snapshots(data[:10])


def test_mixed_snapshots_rejected():
    with pytest.raises(DomainError):
        encode_snapshots([GridFunction(np.ones((1, 8))), GridFunction(np.ones((1, 16)))])


def test_trajectory_sidecar(tmp_path):
    snaps = [GridFunction(np.full((2, 8), t)) for t in range(3)]
    p = tmp_path / "traj.bin"
    save_trajectory(p, snaps, [0.0, 0.5, 1.0])
    meta = json.loads((tmp_path / "traj.bin.json").read_text())
    assert meta["times"] == [0.0, 0.5, 1.0] and meta["ncomp"] == 2
    back, times = load_trajectory(p)
    assert times == [0.0, 0.5, 1.0]
    assert np.array_equal(back[2].values, snaps[2].values)
    meta["n"] = 16
    (tmp_path / "traj.bin.json").write_text(json.dumps(meta))
    with pytest.raises(DomainError, match="sidecar"):
        load_trajectory(p)
