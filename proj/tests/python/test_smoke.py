# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

import lapepi


def test_version():
    assert lapepi.__version__.count(".") == 2


def test_pyramid_round_trip():
    epi = lapepi.random_epi(seed=3, n_views=11, width=44)
    assert epi.shape == (11, 44)
    pyr = lapepi.build_lapepi(epi)
    assert pyr.level1.shape == (11, 11)
    assert len(pyr.residuals) == 2
    assert np.max(np.abs(pyr.collapse() - epi)) < 1e-12


def test_metrics():
    a = lapepi.toy_epi(n_views=21, width=64, d_max=3.0)
    assert lapepi.psnr(a, a) is None
    assert lapepi.ssim(a, a) == pytest.approx(1.0)
    b = a + 0.1
    # Constant offset of 0.1 at peak 1 is exactly 20 dB.
    assert lapepi.psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_alias_sweep_rows():
    epi = lapepi.toy_epi()
    rows = lapepi.alias_sweep(epi, scales=[1, 2], betas=[10.0, 100.0], rate=3, d_max=9.0)
    assert len(rows) == 4
    assert all(r[3] % 2 == 1 for r in rows)


def test_network_shapes(tmp_path):
    net = lapepi.Network.init(seed=1)
    assert net.parameter_count == 252033
    epi = lapepi.random_epi(seed=5, n_views=3, width=44)
    out = net.reconstruct_epi(epi, alpha_a=3)
    assert out.shape == (7, 44)
    assert np.all(np.isfinite(out))
    path = tmp_path / "m.bin"
    net.save(path)
    again = lapepi.Network.load(path)
    np.testing.assert_array_equal(again.reconstruct_epi(epi), out)


def test_errors_map_to_value_error():
    with pytest.raises(lapepi.LapepiError):
        lapepi.build_lapepi(np.zeros(5))
    with pytest.raises(ValueError):
        lapepi.Network.load("/nonexistent/ckpt.bin")


def test_train_short():
    epis = [lapepi.random_epi(seed=s, n_views=31, width=44) for s in range(2)]
    net, trace = lapepi.train_on_epis(epis, steps=2, batch=1, seed=4)
    assert net.parameter_count == 252033
    assert len(trace) >= 1
    assert np.isfinite(trace[-1][1])
