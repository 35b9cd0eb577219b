import numpy as np
import pytest

from vidseg import appearance as app
from vidseg.superpixel import partition_from_labels
from helpers import rgb_image


def test_k1_closed_form():
    # K=1: the fit is the weighted mean / weighted variance (floored)
    rng = np.random.default_rng(20)
    samples = rng.random((50, 3))
    weights = rng.random(50) + 0.1
    model = app.fit_weighted_gmm(samples, weights, n_components=1, iters=5)
    mean = np.average(samples, axis=0, weights=weights)
    var = np.maximum(np.average((samples - mean) ** 2, axis=0,
                                weights=weights), app.VAR_FLOOR)
    assert np.allclose(model.weights, [1.0])
    assert np.allclose(model.means[0], mean, atol=1e-9)
    assert np.allclose(model.variances[0], var, atol=1e-9)


def test_recovers_separated_clusters():
    rng = np.random.default_rng(21)
    a = rng.normal([0.1, 0.1, 0.1], 0.02, (100, 3))
    b = rng.normal([0.9, 0.9, 0.9], 0.02, (100, 3))
    samples = np.concatenate([a, b])
    model = app.fit_weighted_gmm(samples, np.ones(200), n_components=2,
                                 iters=30, seed=0)
    means = model.means[np.argsort(model.means[:, 0])]
    assert np.allclose(means[0], 0.1, atol=0.02)
    assert np.allclose(means[1], 0.9, atol=0.02)
    assert np.allclose(model.weights, 0.5, atol=0.05)


def test_loglik_monotone_many_seeds():
    rng = np.random.default_rng(22)
    samples = rng.random((200, 3))
    weights = rng.random(200) + 0.05
    for seed in range(20):
        _, trace = app.fit_weighted_gmm(samples, weights, n_components=3,
                                        iters=15, seed=seed,
                                        return_loglik=True)
        diffs = np.diff(trace)
        assert (diffs >= -1e-9).all(), f"seed {seed}: loglik decreased"


def test_duplicate_samples_half_weight_invariance():
    rng = np.random.default_rng(23)
    samples = rng.random((60, 3))
    weights = rng.random(60) + 0.1
    m1 = app.fit_weighted_gmm(samples, weights, 3, iters=10, seed=5)
    dup = np.repeat(samples, 2, axis=0)
    wdup = np.repeat(weights, 2) / 2.0
    m2 = app.fit_weighted_gmm(dup, wdup, 3, iters=10, seed=5)
    order1 = np.lexsort(m1.means.T)
    order2 = np.lexsort(m2.means.T)
    assert np.allclose(m1.means[order1], m2.means[order2], atol=1e-8)
    assert np.allclose(m1.weights[order1], m2.weights[order2], atol=1e-8)


def test_deterministic():
    rng = np.random.default_rng(24)
    samples = rng.random((80, 3))
    weights = np.ones(80)
    m1 = app.fit_weighted_gmm(samples, weights, 4, seed=9)
    m2 = app.fit_weighted_gmm(samples, weights, 4, seed=9)
    assert np.array_equal(m1.means, m2.means)
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.variances, m2.variances)


def test_variance_floor_respected():
    samples = np.tile([[0.5, 0.5, 0.5]], (10, 1)) \
        + np.linspace(0, 1e-6, 10)[:, None]
    model = app.fit_weighted_gmm(samples, np.ones(10), 1)
    assert (model.variances >= app.VAR_FLOOR).all()


def test_zero_weights_rejected():
    with pytest.raises(ValueError, match="zero"):
        app.fit_weighted_gmm(np.random.default_rng(0).random((5, 3)),
                             np.zeros(5))


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        app.fit_weighted_gmm(np.zeros((2, 3)), np.array([1.0, -1.0]))


def test_too_many_components_degrades_with_warning():
    samples = np.array([[0.1] * 3, [0.9] * 3])
    with pytest.warns(UserWarning, match="reducing components"):
        model = app.fit_weighted_gmm(samples, np.ones(2), n_components=5)
    assert model.n_components == 2


def test_log_density_agrees_with_direct_eval():
    model = app.GmmModel(
        weights=np.array([0.3, 0.7]),
        means=np.array([[0.2, 0.2, 0.2], [0.8, 0.8, 0.8]]),
        variances=np.full((2, 3), 0.01),
    )
    x = np.array([[0.25, 0.2, 0.15]])
    direct = 0.0
    for k in range(2):
        diff = x[0] - model.means[k]
        g = np.exp(-0.5 * np.sum(diff**2 / model.variances[k])) \
            / np.sqrt(np.prod(2 * np.pi * model.variances[k]))
        direct += model.weights[k] * g
    assert np.isclose(app.log_density(model, x)[0], np.log(direct))


def _partition_with_colors(colors):
    n = len(colors)
    labels = np.arange(n, dtype=np.int32).reshape(1, n)
    img = rgb_image((np.asarray(colors) * 255).astype(np.uint8)[None])
    return partition_from_labels(labels, img)


def test_appearance_term_symmetric_models_give_half():
    model = app.GmmModel(np.array([1.0]), np.array([[0.5, 0.5, 0.5]]),
                         np.full((1, 3), 0.01))
    p = _partition_with_colors([[0.2, 0.4, 0.6], [0.9, 0.1, 0.5]])
    assert np.allclose(app.appearance_term(model, model, p), 0.5)


def test_appearance_term_prefers_nearer_model():
    fg = app.GmmModel(np.array([1.0]), np.array([[0.9, 0.9, 0.9]]),
                      np.full((1, 3), 0.01))
    bg = app.GmmModel(np.array([1.0]), np.array([[0.1, 0.1, 0.1]]),
                      np.full((1, 3), 0.01))
    # use colors that land exactly on the region means after quantization
    p = _partition_with_colors([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
    term = app.appearance_term(fg, bg, p)
    assert term[0] > 0.99
    assert term[1] < 0.01
    assert (term >= app.EPS_POSTERIOR).all()
    assert (term <= 1 - app.EPS_POSTERIOR).all()


def test_appearance_complement_sums_to_one():
    rng = np.random.default_rng(25)
    fg = app.fit_weighted_gmm(rng.random((40, 3)), np.ones(40), 2, seed=1)
    bg = app.fit_weighted_gmm(rng.random((40, 3)), np.ones(40), 2, seed=2)
    p = _partition_with_colors(rng.random((6, 3)))
    a = app.appearance_term(fg, bg, p)
    b = app.appearance_term(bg, fg, p)
    assert np.allclose(a + b, 1.0, atol=1e-9)


def test_split_by_attention():
    colors = np.arange(12, dtype=float).reshape(4, 3) / 12
    attention = np.array([0.9, 0.5, 0.4, 0.0])
    fg_s, fg_w, bg_s, bg_w = app.split_by_attention(colors, attention, 0.5)
    # threshold is inclusive on the foreground side
    assert np.array_equal(fg_s, colors[:2])
    assert np.allclose(fg_w, [0.9, 0.5])
    assert np.array_equal(bg_s, colors[2:])
    assert np.allclose(bg_w, [0.6, 1.0])
