import math

import numpy as np
import pytest

from sigmaflow.hodge import (HodgeError, TorusField, decomposition_report,
                             divergence, hodge_decompose)


def l2_inner(a_comps, b_comps):
    return sum(float(np.sum(a * b)) for a, b in zip(a_comps, b_comps))


def grid2(n=64):
    axes = np.arange(n) * (2 * math.pi / n)
    return np.meshgrid(axes, axes, indexing="ij")


def test_pure_gradient_field():
    # X = grad(sin x cos 2y): Y must vanish, h recovered up to its mean
    f = TorusField.from_exprs([
        lambda x, y: np.cos(x) * np.cos(2 * y),
        lambda x, y: -2 * np.sin(x) * np.sin(2 * y),
    ], (64, 64))
    y, h = hodge_decompose(f)
    assert max(np.max(np.abs(c)) for c in y.components) < 1e-12
    xx, yy = grid2()
    assert np.max(np.abs(h - np.sin(xx) * np.cos(2 * yy))) < 1e-12


def test_pure_divergence_free_field():
    f = TorusField.from_exprs([
        lambda x, y: -np.sin(y),
        lambda x, y: np.sin(x),
    ], (64, 64))
    y, h = hodge_decompose(f)
    assert np.max(np.abs(h)) < 1e-13
    for a in range(2):
        assert np.max(np.abs(y.components[a] - f.components[a])) < 1e-13


def test_known_mixed_split():
    f = TorusField.from_exprs([
        lambda x, y: np.cos(x) * np.cos(y) - np.sin(y),
        lambda x, y: -np.sin(x) * np.sin(y) + np.sin(x),
    ], (64, 64))
    y, h = hodge_decompose(f)
    xx, yy = grid2()
    assert np.max(np.abs(h - np.sin(xx) * np.cos(yy))) < 1e-12
    assert np.max(np.abs(y.components[0] + np.sin(yy))) < 1e-12
    assert np.max(np.abs(y.components[1] - np.sin(xx))) < 1e-12


def test_report_residuals_2d_and_3d():
    f2 = TorusField.from_exprs([
        lambda x, y: np.sin(x + 2 * y) + np.cos(3 * x),
        lambda x, y: np.exp(np.cos(y)) * np.sin(x),
    ], (64, 64))
    rep = decomposition_report(f2)
    assert rep["div_residual"] < 1e-9
    assert rep["reconstruction"] < 1e-9
    assert rep["potential_mean"] < 1e-12

    f3 = TorusField.from_exprs([
        lambda x, y, z: np.sin(y) * np.cos(z),
        lambda x, y, z: np.sin(z + x),
        lambda x, y, z: np.cos(x) * np.sin(2 * y) + np.cos(z),
    ], (32, 32, 32))
    rep3 = decomposition_report(f3)
    assert rep3["div_residual"] < 1e-9
    assert rep3["reconstruction"] < 1e-9


def test_orthogonality_of_parts():
    f = TorusField.from_exprs([
        lambda x, y: np.sin(x) * np.cos(2 * y) + np.cos(y),
        lambda x, y: np.cos(x + y) + np.sin(3 * x) * np.sin(y),
    ], (64, 64))
    y, h = hodge_decompose(f)
    h_hat = np.fft.fftn(h)
    grads = []
    for a in range(2):
        m = np.fft.fftfreq(64, d=1.0 / 64)
        shape = [None, None]
        shape[a] = slice(None)
        grads.append(np.fft.ifftn(1j * m[tuple(shape)] * h_hat).real)
    ip = l2_inner(y.components, grads)
    scale = math.sqrt(l2_inner(y.components, y.components)
                      * max(l2_inner(grads, grads), 1e-300))
    assert abs(ip) < 1e-9 * max(scale, 1.0)


def test_idempotence():
    f = TorusField.from_exprs([
        lambda x, y, z: np.sin(x) * np.cos(y) + np.sin(2 * z),
        lambda x, y, z: np.cos(x + z),
        lambda x, y, z: np.sin(y - x),
    ], (32, 32, 32))
    y1, h1 = hodge_decompose(f)
    y2, h2 = hodge_decompose(y1)
    assert np.max(np.abs(h2)) < 1e-12
    for a in range(3):
        assert np.max(np.abs(y2.components[a] - y1.components[a])) < 1e-12


def test_divergence_spectral():
    f = TorusField.from_exprs([
        lambda x, y: np.sin(2 * x) * np.cos(y),
        lambda x, y: np.cos(x) * np.sin(3 * y),
    ], (64, 64))
    xx, yy = grid2()
    exact = 2 * np.cos(2 * xx) * np.cos(yy) + 3 * np.cos(xx) * np.cos(3 * yy)
    assert np.max(np.abs(divergence(f) - exact)) < 1e-11


def test_grid_validation():
    with pytest.raises(HodgeError):
        TorusField.from_arrays([np.zeros((63, 63)), np.zeros((63, 63))])
    with pytest.raises(HodgeError):
        TorusField.from_arrays([np.zeros((8, 8))])  # 1d not supported
    with pytest.raises(HodgeError):
        TorusField.from_arrays([np.zeros((8, 8)), np.zeros((8, 16))])
    bad = np.zeros((8, 8))
    bad[0, 0] = np.nan
    with pytest.raises(HodgeError):
        TorusField.from_arrays([bad, np.zeros((8, 8))])
