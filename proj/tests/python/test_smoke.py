"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import mimoep


def test_constellation_roundtrip():
    c = mimoep.build_qam(16)
    assert c.order == 16
    assert c.bits_per_symbol == 4
    energy = sum(abs(p) ** 2 for p in c.points) / c.order
    assert abs(energy - 1.0) < 1e-12
    bits = [1, 0, 1, 1, 0, 0, 1, 0]
    symbols = mimoep.modulate(bits, c)
    assert len(symbols) == 2
    assert mimoep.hard_demap(symbols, c) == bits


def test_snr_conversion():
    assert mimoep.snr_to_noise_var(0.0, 1) == pytest.approx(1.0)
    assert mimoep.snr_to_noise_var(30.0, 6) == pytest.approx(6e-3)


def test_ldpc_chain():
    code = mimoep.build_code(96, 0.5, seed=3)
    assert code.n == 96 and code.k == 48
    rng = mimoep.Rng(1)
    info = [rng.bit() for _ in range(code.k)]
    cw = mimoep.encode(code, info)
    assert mimoep.parity_check(code, cw)
    llrs = [(-9.0 if b else 9.0) for b in cw]
    res = mimoep.decode(code, llrs)
    assert res.parity_ok
    assert list(res.info_bits_hat) == info


def test_detector_matches_exact_map_for_single_antenna():
    c = mimoep.build_qam(16)
    rng = mimoep.Rng(7)
    h = mimoep.sample_channel(1, 1, rng)
    u = np.array([c.points[5]], dtype=complex)
    y = mimoep.transmit(h, u, 0.2, rng)
    priors = [mimoep.uniform_prior(c)]
    cav = mimoep.detect(mimoep.DetectorParams.variant("nubep"), y, h, 0.2, priors, 0, c)
    llr = mimoep.extrinsic_llr(cav.mean[0], cav.var[0], c, 1e30)
    exact = mimoep.map_marginals(y, h, 0.2, priors, c)
    assert np.allclose(llr, exact.extrinsic_bit_llrs, atol=1e-6)


def test_variant_schedules():
    nubep = mimoep.DetectorParams.variant("nubep")
    assert nubep.self_iters == 3
    assert nubep.beta_at(0) == pytest.approx(0.1)
    assert nubep.beta_at(5) == pytest.approx(0.7)
    epd = mimoep.DetectorParams.variant("epd")
    assert epd.eps_at(1) == 0.5
    assert epd.eps_at(10) == 2.0 ** -6


def test_turbo_receive_noiseless():
    c = mimoep.build_qam(4)
    code = mimoep.build_code(96, 0.5, seed=2)
    rng = mimoep.Rng(11)
    h = mimoep.sample_channel(2, 2, rng)
    info = [rng.bit() for _ in range(code.k)]
    cw = mimoep.encode(code, info)
    symbols = mimoep.modulate(cw, c)
    blocks = len(symbols) // 2
    y = np.empty((2, blocks), dtype=complex)
    for p in range(blocks):
        u = np.array(symbols[2 * p : 2 * p + 2], dtype=complex)
        y[:, p] = mimoep.transmit(h, u, 1e-20, rng)
    cfg = mimoep.TurboConfig()
    cfg.turbo_iters = 0
    cfg.detector = mimoep.DetectorParams.variant("nubep")
    res = mimoep.turbo_receive(y, h, 1e-20, c, code, cfg, info)
    assert res.parity_ok
    assert list(res.info_bits_hat) == info
    assert res.per_iter_bit_errors[0] == 0


def test_run_experiment_deterministic():
    cfg = mimoep.ExperimentConfig()
    cfg.constellation = "qpsk"
    cfg.nt = 2
    cfg.nr = 2
    cfg.snr_grid_db = [8.0]
    cfg.variants = ["nubep", "lmmse"]
    cfg.code_n = 96
    cfg.turbo_iters = 1
    cfg.channels = 2
    cfg.codewords = 2
    cfg.seed = 99
    cfg.threads = 2
    a = mimoep.run_experiment(cfg)
    b = mimoep.run_experiment(cfg)
    assert len(a.records) == 2
    for ra, rb in zip(a.records, b.records):
        assert ra.variant == rb.variant
        assert ra.bit_errors == rb.bit_errors
        assert ra.bits_total == rb.bits_total
