import numpy as np
import pytest

from swirl.containers import (
    ContainerError,
    pack_coefficients,
    pack_signal,
    read_container,
    unpack_coefficients,
    unpack_signal,
    write_container,
)
from swirl.equivariance import random_coefficients
from swirl.grid import make_grid
from swirl.signal import SpinSignal
from swirl.transforms import inverse
from swirl.wigner import compute_delta


def test_signal_roundtrip(tmp_path, rng):
    grid = make_grid(8)
    sig = SpinSignal(
        (rng.normal(size=(2, 3, 8, 8)) + 1j * rng.normal(size=(2, 3, 8, 8))),
        np.array([0, 1, -1]),
        grid,
    )
    path = tmp_path / "sig.swirl"
    write_container(path, *pack_signal(sig))
    header, arrays = read_container(path)
    (sig2,) = unpack_signal(header, arrays)
    np.testing.assert_array_equal(sig2.samples, sig.samples)
    np.testing.assert_array_equal(sig2.spins, sig.spins)
    assert sig2.grid.n == 8
    assert header["domain"] == "spatial"


def test_coefficients_roundtrip(tmp_path, rng):
    co = random_coefficients(rng, 2, np.array([0, 2]), 8)
    path = tmp_path / "co.swirl"
    write_container(path, *pack_coefficients(co))
    header, arrays = read_container(path)
    (co2,) = unpack_coefficients(header, arrays)
    np.testing.assert_array_equal(co2.coeffs, co.coeffs)
    assert co2.band_limit == 8
    assert header["domain"] == "spectral"


def test_rewrite_is_bit_exact(tmp_path, rng):
    # read -> write with no transform produces identical bytes
    co = random_coefficients(rng, 1, np.array([0]), 4)
    p1, p2 = tmp_path / "a.swirl", tmp_path / "b.swirl"
    write_container(p1, *pack_coefficients(co))
    header, arrays = read_container(p1)
    write_container(p2, header, arrays)
    assert p1.read_bytes() == p2.read_bytes()


def test_domain_mismatch_rejected(tmp_path, rng):
    co = random_coefficients(rng, 1, np.array([0]), 4)
    path = tmp_path / "co.swirl"
    write_container(path, *pack_coefficients(co))
    header, arrays = read_container(path)
    with pytest.raises(ContainerError, match="spatial"):
        unpack_signal(header, arrays)


def test_convention_mismatch_rejected(tmp_path, rng):
    grid = make_grid(8)
    sig = inverse(random_coefficients(rng, 1, np.array([0]), 4), compute_delta(4))
    header, arrays = pack_signal(sig)
    header["convention"] = "other-convention"
    path = tmp_path / "sig.swirl"
    write_container(path, header, arrays)
    header2, arrays2 = read_container(path)
    with pytest.raises(ContainerError, match="convention"):
        unpack_signal(header2, arrays2)
    assert grid.n == 8


def test_not_a_container(tmp_path):
    path = tmp_path / "nope.swirl"
    path.write_bytes(b"\x00\x01binary soup")
    with pytest.raises(ContainerError):
        read_container(path)
    path.write_text('{"format": "something-else", "blocks": []}\n')
    with pytest.raises(ContainerError, match="not a"):
        read_container(path)


def test_truncated_payload(tmp_path, rng):
    co = random_coefficients(rng, 1, np.array([0]), 4)
    path = tmp_path / "co.swirl"
    write_container(path, *pack_coefficients(co))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(ContainerError, match="shorter"):
        read_container(path)


def test_header_block_shape_must_match():
    with pytest.raises(ContainerError):
        write_container("/tmp/never-written.swirl", {"blocks": [{"shape": [2, 2]}]}, [np.zeros((3, 3))])


def test_empty_batch_block(tmp_path):
    grid = make_grid(8)
    sig = SpinSignal(np.zeros((0, 1, 8, 8), dtype=complex), np.array([0]), grid)
    path = tmp_path / "empty.swirl"
    write_container(path, *pack_signal(sig))
    header, arrays = read_container(path)
    (sig2,) = unpack_signal(header, arrays)
    assert sig2.samples.shape == (0, 1, 8, 8)


def test_filter_bank_roundtrip(tmp_path, rng):
    from swirl.containers import pack_filter_bank, unpack_filter_bank
    from swirl.layers import FilterBank, spectral_conv

    bank = FilterBank.random(rng, (0, 1), (0, 1), 2, 3, 8)
    path = tmp_path / "bank.swirl"
    write_container(path, *pack_filter_bank(bank))
    header, arrays = read_container(path)
    bank2 = unpack_filter_bank(header, arrays)
    assert bank2.spins_in == (0, 1) and bank2.channels_out == 3
    for key in bank.weights:
        np.testing.assert_array_equal(bank2.weights[key], bank.weights[key])
    co = random_coefficients(rng, 1, np.array([0, 0, 1, 1]), 8)
    np.testing.assert_array_equal(spectral_conv(co, bank2).coeffs, spectral_conv(co, bank).coeffs)


def test_batch_norm_state_roundtrip(tmp_path, rng):
    from swirl.containers import pack_batch_norm, unpack_batch_norm
    from swirl.layers import BatchNormState, spectral_batch_norm

    co = random_coefficients(rng, 2, np.array([0, 1]), 8)
    _, state = spectral_batch_norm(co, BatchNormState.initialize(2, momentum=0.2), "train")
    path = tmp_path / "bn.swirl"
    write_container(path, *pack_batch_norm(state))
    header, arrays = read_container(path)
    state2 = unpack_batch_norm(header, arrays)
    np.testing.assert_array_equal(state2.running_variance, state.running_variance)
    assert state2.momentum == 0.2
    out1, _ = spectral_batch_norm(co, state, "eval")
    out2, _ = spectral_batch_norm(co, state2, "eval")
    np.testing.assert_array_equal(out1.coeffs, out2.coeffs)


def test_phase_collapse_params_roundtrip(tmp_path, rng):
    from swirl.containers import pack_phase_collapse, unpack_phase_collapse
    from swirl.layers import PhaseCollapseParams

    params = PhaseCollapseParams.random(rng, 2, 4)
    path = tmp_path / "pc.swirl"
    write_container(path, *pack_phase_collapse(params))
    header, arrays = read_container(path)
    params2 = unpack_phase_collapse(header, arrays)
    np.testing.assert_array_equal(params2.w1, params.w1)
    np.testing.assert_array_equal(params2.w2, params.w2)
    np.testing.assert_array_equal(params2.bias, params.bias)
    assert not np.iscomplexobj(params2.w2)
