import numpy as np
import pytest

from lmbcontrol.lmb import (
    LmbDensity,
    TruncationConfig,
    UpdateDegenerateError,
    extract_tracks,
    predict,
    psi_z,
    resample,
    top_k_label_subsets,
    update,
)
from lmbcontrol.models import (
    MeasurementModel,
    MotionModel,
    clutter_intensity,
    default_birth_model,
    likelihood,
    measure,
)
from lmbcontrol.rfs import Label, LmbComponent, ParticleDensity, eap_estimate
from conftest import oracle_lmb_update, oracle_subset_ranking, random_lmb

EXACT = TruncationConfig(
    k_subsets=10_000,
    m_assignments=100_000,
    prune_r=1e-300,
    gate_sigma=np.inf,
    hyp_floor=0.0,
)


def _comp(label, r, pos, spread=10.0, n=20, seed=0):
    rng = np.random.default_rng(seed + label.birth_index)
    x = np.zeros((n, 5))
    x[:, 0] = pos[0] + rng.normal(0, spread, n)
    x[:, 1] = pos[1] + rng.normal(0, spread, n)
    w = rng.random(n) + 0.1
    return LmbComponent(label, r, ParticleDensity(w / w.sum(), x))


def test_predict_birth_only():
    rng = np.random.default_rng(3)
    birth = default_birth_model()
    pred = predict(LmbDensity([]), birth, MotionModel(), 1, rng, 200)
    assert len(pred) == 4
    assert [c.r for c in pred.components] == [0.02, 0.02, 0.03, 0.03]
    assert all(c.label.birth_time == 1 for c in pred.components)


def test_predict_survival_scaling():
    rng = np.random.default_rng(4)
    motion = MotionModel()
    prior = LmbDensity([_comp(Label(1, 0), 0.8, (500, 500))])
    pred = predict(prior, default_birth_model(), motion, 2, rng, 50)
    surv = [c for c in pred.components if c.label == Label(1, 0)]
    assert len(surv) == 1
    assert surv[0].r == pytest.approx(motion.p_S * 0.8)
    assert len(pred) == 5


def test_top_k_spec_example():
    dens = LmbDensity(
        [_comp(Label(1, 0), 0.9, (0, 0)), _comp(Label(1, 1), 0.1, (0, 0))]
    )
    a, b = Label(1, 0), Label(1, 1)
    out = top_k_label_subsets(dens, 2)
    assert [s for s, _ in out] == [(a,), (a, b)]
    assert out[0][1] == pytest.approx(0.81)
    assert out[1][1] == pytest.approx(0.09)


def test_top_k_tie_ordering():
    # equal existence: {a,b} before {a} before {b} before {}
    dens = LmbDensity(
        [_comp(Label(1, 0), 0.5, (0, 0)), _comp(Label(1, 1), 0.5, (0, 0))]
    )
    a, b = Label(1, 0), Label(1, 1)
    out = top_k_label_subsets(dens, 4)
    assert [s for s, _ in out] == [(a, b), (a,), (b,), ()]


def test_top_k_full_enumeration_sums_to_one(rng):
    for _ in range(10):
        dens = random_lmb(rng, n_comps=int(rng.integers(1, 7)))
        out = top_k_label_subsets(dens, 2 ** len(dens))
        assert len(out) == 2 ** len(dens)
        assert sum(w for _, w in out) == pytest.approx(1.0, abs=1e-9)


def test_top_k_matches_bruteforce(rng):
    for _ in range(25):
        dens = random_lmb(rng, n_comps=int(rng.integers(1, 8)))
        K = int(rng.integers(1, 2 ** len(dens) + 1))
        got = top_k_label_subsets(dens, K)
        want = oracle_subset_ranking(dens, K)
        assert [s for s, _ in got] == [s for s, _ in want]
        assert np.allclose([w for _, w in got], [w for _, w in want], atol=1e-12)


def test_resample_counts_and_eap():
    rng = np.random.default_rng(5)
    x = np.zeros((2, 5))
    x[1, 0] = 100.0
    d = ParticleDensity(np.array([0.5, 0.5]), x)
    n = 10_000
    out = resample(d, n, rng)
    hits = int(np.sum(out.states[:, 0] > 50))
    assert abs(hits - n // 2) <= 3 * np.sqrt(n)
    assert np.allclose(out.weights, 1.0 / n)
    big = random_particle_density = ParticleDensity(
        np.abs(rng.normal(size=500)) + 0.01, rng.normal(0, 50, (500, 5))
    )
    est0 = eap_estimate(big)
    est1 = eap_estimate(resample(big, 20_000, rng))
    assert np.allclose(est0[:2], est1[:2], atol=3 * 50 / np.sqrt(20_000) * 3)


def test_psi_z_values():
    model = MeasurementModel()
    sensor = np.zeros(2)
    target = np.array([0.0, 400.0, 0, 0, 0])
    z = measure(sensor, target, model)
    Z = z.reshape(1, 2)
    peak = likelihood(z, sensor, target, model)
    got = psi_z(target, sensor, 1, Z, model)
    assert got == pytest.approx(peak / clutter_intensity(z, model))
    assert psi_z(target, sensor, 0, Z, model) == pytest.approx(0.0)  # p_D = 1
    with pytest.raises(IndexError):
        psi_z(target, sensor, 5, Z, model)


def test_update_single_certain_component():
    model = MeasurementModel(lambda_c=10.0)  # heavy clutter
    sensor = np.zeros(2)
    comp = _comp(Label(1, 0), 1.0, (0.0, 500.0), spread=15.0)
    pred = LmbDensity([comp])
    z = np.array([0.0, 510.0])
    post = update(pred, z.reshape(1, 2), sensor, model, EXACT, rng=None)
    assert len(post) == 1
    assert post.components[0].r == pytest.approx(1.0, abs=1e-9)
    before = eap_estimate(comp.density)
    after = eap_estimate(post.components[0].density)
    assert abs(after[1] - 510.0) < abs(before[1] - 510.0)


def test_update_detections_raise_existence():
    model = MeasurementModel()
    sensor = np.zeros(2)
    pred = LmbDensity(
        [
            _comp(Label(1, 0), 0.4, (0.0, 500.0)),
            _comp(Label(1, 1), 0.4, (400.0, -300.0)),
        ]
    )
    Z = np.array([[0.0, 500.0], [np.arctan2(400.0, -300.0), 500.0]])
    post = update(pred, Z, sensor, model, EXACT, rng=None)
    miss = update(pred, np.zeros((0, 2)), sensor, model, EXACT, rng=None)
    post_r = {c.label: c.r for c in post.components}
    miss_r = {c.label: c.r for c in miss.components}
    for lab in (Label(1, 0), Label(1, 1)):
        assert post_r[lab] > miss_r.get(lab, 0.0)


def test_update_empty_prior():
    model = MeasurementModel()
    post = update(
        LmbDensity([]), np.zeros((0, 2)), np.zeros(2), model, EXACT, rng=None
    )
    assert len(post) == 0


def test_update_matches_exhaustive_oracle(rng):
    model = MeasurementModel(R0=600.0, h=0.001)
    sensor = np.zeros(2)
    for trial in range(20):
        n = int(rng.integers(1, 5))
        comps = []
        for i in range(n):
            pos = rng.uniform(-700, 700, size=2)
            comps.append(
                _comp(
                    Label(1, i),
                    float(rng.uniform(0.1, 0.95)),
                    pos,
                    spread=12.0,
                    n=int(rng.integers(3, 9)),
                    seed=trial * 10,
                )
            )
        pred = LmbDensity(comps)
        m = int(rng.integers(0, 4))
        Z = np.column_stack(
            [rng.uniform(-np.pi, np.pi, m), rng.uniform(100.0, 900.0, m)]
        )
        # aim some measurements at actual components
        for j in range(min(m, n)):
            if rng.random() < 0.7:
                Z[j] = measure(sensor, eap_estimate(comps[j].density), model)
        post = update(pred, Z, sensor, model, EXACT, rng=None)
        want = oracle_lmb_update(pred, Z, sensor, model)
        got = {c.label: c for c in post.components}
        assert set(got) == set(want)
        for lab, (r, w) in want.items():
            assert got[lab].r == pytest.approx(min(r, 1.0), abs=1e-12)
            assert np.allclose(got[lab].density.weights, w, atol=1e-12)


def test_update_resampling_particle_count():
    model = MeasurementModel()
    trunc = TruncationConfig(max_particles=64)
    pred = LmbDensity([_comp(Label(1, 0), 0.9, (0.0, 500.0))])
    post = update(
        pred, np.zeros((0, 2)), np.zeros(2), model, trunc, np.random.default_rng(0)
    )
    assert len(post.components[0].density) == 64


def test_extract_tracks_threshold():
    dens = LmbDensity(
        [_comp(Label(1, 0), 0.9, (10, 10)), _comp(Label(1, 1), 0.3, (20, 20))]
    )
    tracks = extract_tracks(dens, 0.5)
    assert len(tracks) == 1
    assert tracks[0][0] == Label(1, 0)


def test_truncation_config_validation():
    with pytest.raises(ValueError):
        TruncationConfig(k_subsets=0)
    with pytest.raises(ValueError):
        TruncationConfig(max_particles=0)
