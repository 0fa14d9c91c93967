import math

import numpy as np
import pytest

from ctcoding.broadcast_sim import (
    ChannelParams,
    ErasureTrace,
    Workload,
    run_trials,
    simulate_content_type,
    simulate_message_specific,
)
from ctcoding.regions import content_constraints, derive_channel, message_constraints

CH = ChannelParams(0.4, 0.3)
DCH = derive_channel(0.4, 0.3)


def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelParams(1.0, 0.2)


@pytest.mark.parametrize("k1,k2,alpha", [(10, 10, 0.25), (3, 4, 0.5), (0, 4, 0.5)])
def test_workload_validation(k1, k2, alpha):
    with pytest.raises(ValueError):
        Workload(k1, k2, alpha)


def test_float_alpha_accepted_when_integral():
    w = Workload(100, 3800, 0.85)
    assert (w.a1, w.a2) == (85, 3230)


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.85, 1.0])
@pytest.mark.parametrize("mode", ["counting", "coded"])
def test_noiseless_content(alpha, mode):
    w = Workload(1000 if mode == "counting" else 40, 1000 if mode == "counting" else 40, alpha)
    r = simulate_content_type(ChannelParams(0, 0), w, seed=3, mode=mode)
    assert r.T == w.k1 + w.k2
    assert r.T2 == 0 or alpha == 1.0
    assert r.r1 + r.r2 == pytest.approx(1 + alpha, abs=1e-15)


def test_noiseless_message_specific_uncoded():
    r = simulate_message_specific(ChannelParams(0, 0), Workload(300, 200, 0.0), seed=0)
    assert r.T == 500 and r.T2 == 0


def test_message_specific_alpha_one_skips_phase1():
    r = simulate_message_specific(CH, Workload(50, 60, 1.0), seed=4)
    assert r.T1 == 0 and r.kprime1 == r.kprime2 == 0
    assert r.kr1 == r.kr2 == 110


def test_content_alpha_one_skips_phase1():
    r = simulate_content_type(CH, Workload(50, 60, 1.0), seed=4)
    assert r.T1 == 0 and r.kr1 == r.kr2 == 110


def _check_result(r, w):
    assert r.T == r.T1 + r.T2
    assert r.r1 == (w.k1 + w.a2) / r.T
    assert r.r2 == (w.k2 + w.a1) / r.T
    assert r.kprime1 == r.q11 + r.q12 - r.both1
    assert r.kprime2 == r.q21 + r.q22 - r.both2


@pytest.mark.parametrize("seed", range(40))
def test_phase1_stopping_invariant(seed):
    rng = np.random.default_rng(seed)
    e1, e2 = rng.uniform(0, 0.9, size=2)
    k1, k2 = (int(x) * 4 for x in rng.integers(1, 30, size=2))
    alpha = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
    w = Workload(k1, k2, alpha)
    r = simulate_content_type(ChannelParams(e1, e2), w, seed=seed)
    _check_result(r, w)
    for k, sent, cross, quota in ((k1, r.kprime1, r.q12, w.a1), (k2, r.kprime2, r.q21, w.a2)):
        remaining = k - sent
        if remaining == 0:
            assert cross >= quota or (k - sent) + cross == quota
        else:
            assert remaining + cross == quota


@pytest.mark.parametrize("seed", range(20))
def test_phase2_demands(seed):
    rng = np.random.default_rng(100 + seed)
    w = Workload(40, 80, 0.75)
    ch = ChannelParams(*rng.uniform(0, 0.8, size=2))
    r = simulate_content_type(ch, w, seed=seed)
    rem1, rem2 = w.k1 - r.kprime1, w.k2 - r.kprime2
    assert r.kr1 == rem1 + (r.q12 - r.both1) + rem2
    assert r.kr2 == rem2 + (r.q21 - r.both2) + rem1
    # receivers' final holdings
    assert r.q11 + (r.q12 - r.both1) + rem1 == w.k1
    assert r.q21 + rem2 >= w.a2
    assert r.q22 + (r.q21 - r.both2) + rem2 == w.k2
    assert r.q12 + rem1 >= w.a1

    m = simulate_message_specific(ch, w, seed=seed)
    _check_result(m, w)
    assert m.kprime1 == w.k1 - w.a1
    assert m.kr1 == w.a1 + w.a2 + (m.q12 - m.both1)
    assert m.kr2 == w.a1 + w.a2 + (m.q21 - m.both2)


def test_erasure_trace_is_seeded():
    a = ErasureTrace(CH, np.random.default_rng(1))
    b = ErasureTrace(CH, np.random.default_rng(1))
    assert [a.next() for _ in range(1000)] == [b.next() for _ in range(1000)]


def test_erasure_frequencies():
    t = ErasureTrace(CH, np.random.default_rng(2))
    draws = np.array([t.next() for _ in range(200_000)])
    assert draws[:, 0].mean() == pytest.approx(0.6, abs=0.005)
    assert draws[:, 1].mean() == pytest.approx(0.7, abs=0.005)
    both = (draws[:, 0] & draws[:, 1]).mean()
    assert both == pytest.approx(0.42, abs=0.005)


@pytest.mark.parametrize("strategy", ["content", "message"])
def test_coded_never_faster_than_counting(strategy):
    sim = simulate_content_type if strategy == "content" else simulate_message_specific
    w = Workload(30, 50, 0.6)
    for seed in range(30):
        c = sim(CH, w, seed, "counting")
        d = sim(CH, w, seed, "coded")
        assert d.T >= c.T
        assert d.T1 == c.T1 and d.kr1 == c.kr1 and d.kr2 == c.kr2
        if d.innovative_misses == 0:
            assert d.T == c.T


def test_small_field_effects_show_up_only_in_coded_mode(monkeypatch):
    from ctcoding import broadcast_sim
    from ctcoding.gf import PrimeField

    monkeypatch.setattr(broadcast_sim, "CODED_FIELD", PrimeField(2))
    w = Workload(40, 40, 0.5)
    slower = 0
    for seed in range(10):
        c = simulate_content_type(CH, w, seed, "counting")
        d = simulate_content_type(CH, w, seed, "coded")
        assert d.T >= c.T
        slower += d.T > c.T
    assert slower > 0


def test_unknown_mode():
    with pytest.raises(ValueError):
        simulate_content_type(CH, Workload(4, 4, 0.5), 0, "fountain")


# ---------------------------------------------------------------- run_trials


def test_single_trial_aggregate():
    w = Workload(200, 300, 0.5)
    agg = run_trials(CH, w, "content", 1, seed=9)
    single = simulate_content_type(CH, w, 9, trial=0)
    assert agg.mean_T == single.T
    assert agg.mean_r1 == single.r1 and agg.mean_r2 == single.r2
    assert agg.se_T == 0


def test_run_trials_deterministic():
    w = Workload(200, 300, 0.5)
    a = run_trials(CH, w, "message", 5, seed=77)
    b = run_trials(CH, w, "message", 5, seed=77)
    assert a.to_json_dict(per_trial=True) == b.to_json_dict(per_trial=True)
    c = run_trials(CH, w, "message", 5, seed=78)
    assert c.total_T != a.total_T


def test_trials_are_independent_substreams():
    w = Workload(200, 300, 0.5)
    agg = run_trials(CH, w, "content", 4, seed=5)
    assert [r.T for r in agg.results] == [simulate_content_type(CH, w, 5, trial=t).T for t in range(4)]
    assert len({r.T for r in agg.results}) > 1


def test_run_trials_validation():
    with pytest.raises(ValueError):
        run_trials(CH, Workload(4, 4, 0.5), "content", 0, seed=1)
    with pytest.raises(ValueError):
        run_trials(CH, Workload(4, 4, 0.5), "both", 1, seed=1)


def test_json_keys():
    agg = run_trials(CH, Workload(20, 20, 0.5), "content", 2, seed=1)
    keys = set(agg.to_json_dict())
    assert keys == {"strategy", "eps1", "eps2", "alpha", "k1", "k2", "trials", "seed", "mode",
                    "mean_T", "mean_r1", "mean_r2", "se_T"}
    assert "per_trial" in agg.to_json_dict(per_trial=True)


# ---------------------------------------------------------------- agreement with the averages


def _ci(values):
    values = np.asarray(values, dtype=float)
    return values.mean(), 1.96 * values.std(ddof=1) / math.sqrt(len(values))


def test_phase1_duration_per_message():
    w = Workload(2000, 2000, 0.85)
    agg = run_trials(CH, w, "content", 30, seed=11)
    mean, half = _ci([r.T1 / (r.kprime1 + r.kprime2) for r in agg.results])
    assert abs(mean - 1 / (1 - DCH.eps12)) <= half + 1e-3


def test_queue_growth_matches_reception_probability():
    w = Workload(2000, 2000, 0.4)  # case 1: whole types are sent
    agg = run_trials(CH, w, "content", 30, seed=12)
    for attr, kp, phi in (("q12", "kprime1", DCH.phi2), ("q11", "kprime1", DCH.phi1),
                          ("q21", "kprime2", DCH.phi1), ("q22", "kprime2", DCH.phi2)):
        mean, half = _ci([getattr(r, attr) / getattr(r, kp) for r in agg.results])
        assert abs(mean - phi) <= half + 2e-3, attr


def test_achieved_points_on_region_boundaries():
    w = Workload(4000, 4000, 0.7)
    agg = run_trials(CH, w, "content", 10, seed=13)
    binding = max(content_constraints(DCH, 0.7, (agg.mean_r1, agg.mean_r2)))
    assert binding == pytest.approx(1.0, abs=0.01)
    agg = run_trials(CH, w, "message", 10, seed=13)
    binding = max(message_constraints(DCH, 0.7, (agg.mean_r1, agg.mean_r2)))
    assert binding == pytest.approx(1.0, abs=0.01)
