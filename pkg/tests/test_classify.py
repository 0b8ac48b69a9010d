"""Pointwise classification rules."""

import numpy as np
import pytest

from polsardr.classify import (RULES, PrototypeSet, classify_image, classify_pixel,
                               distance_stack, score_stack)
from polsardr.distances import kl_distance
from polsardr.errors import InvalidObservation
from polsardr.fields import CovarianceField
from polsardr.wishart import WishartModel, sample

from conftest import make_hpd

ID = np.eye(3, dtype=complex)


def _protos(rng, m=3, weights=None, shared_looks=4.0):
    sigmas = np.stack([make_hpd(rng, scale=s) for s in np.linspace(0.5, 3.0, m)])
    return PrototypeSet(sigmas=sigmas, shared_looks=shared_looks, weights=weights)


def test_prototype_set_validation(rng):
    with pytest.raises(ValueError):
        PrototypeSet(sigmas=make_hpd(rng)[None], shared_looks=4.0)  # M = 1
    with pytest.raises(ValueError):
        _protos(rng, weights=np.array([0.9, 0.9, 0.2]))
    with pytest.raises(InvalidObservation):
        PrototypeSet(sigmas=np.stack([ID, np.diag([1., -1, 1]).astype(complex)]),
                     shared_looks=4.0)
    protos = _protos(rng)
    np.testing.assert_allclose(protos.weights, 1 / 3)


def test_pixel_at_prototype_is_classified_to_it(rng):
    protos = _protos(rng)
    for rule in ("ED", "HD", "KL"):
        for m in range(3):
            assert classify_pixel(protos.sigmas[m], protos, rule) == m + 1


def test_weighted_argmin_hand_example(rng):
    # raw KL distances (10, 4, 8) with weights prop. to (0.23, 0.50, 0.28):
    # weighted scores prop. to (2.30, 2.00, 2.24), so class 2 wins even though
    # its raw distance is not uniquely informative of the weights' effect
    w = np.array([0.23, 0.50, 0.28])
    d = np.array([10.0, 4.0, 8.0])
    assert int(np.argmin(w * d)) + 1 == 2
    # same decision through the full rule with simplex-normalized weights
    # (argmin is invariant under the common positive rescaling)
    rng2 = np.random.default_rng(77)
    x = make_hpd(rng2)
    sigmas = []
    for target in d:
        # KL(x, c x) = 6 * (c + 1/c - 2) at 4 looks; pick the c > 1 root
        c = np.roots([1.0, -(2 + target / 6.0), 1.0]).max().real
        sigmas.append(c * x)
    protos = PrototypeSet(sigmas=np.stack(sigmas), shared_looks=4.0, weights=w / w.sum())
    for m, target in enumerate(d):
        assert kl_distance(x, protos.sigmas[m], 4.0) == pytest.approx(target, rel=1e-10)
    assert classify_pixel(x, protos, "KL+OW") == 2


def test_uniform_weights_make_weighted_rule_match_plain_kl(rng):
    protos = _protos(rng)
    field = CovarianceField(sample(WishartModel(protos.sigmas[1], 4),
                                   rng, size=(12, 9)))
    plain = classify_image(field, protos, "KL")
    weighted = classify_image(field, protos, "KL+OW")
    np.testing.assert_array_equal(plain.labels, weighted.labels)


def test_argmin_invariance_under_common_scaling(rng):
    protos = _protos(rng)
    pts = sample(WishartModel(protos.sigmas[0], 4), rng, size=40)
    scores = score_stack(pts, protos, "KL+OW")
    assert np.array_equal(np.argmin(scores, -1), np.argmin(7.3 * scores, -1))


def test_tie_breaks_to_lowest_class_index(rng):
    sigma = make_hpd(rng)
    protos = PrototypeSet(sigmas=np.stack([sigma, sigma]), shared_looks=4.0)
    x = make_hpd(rng)
    for rule in RULES:
        assert classify_pixel(x, protos, rule) == 1


def test_classify_image_uniform_field(rng):
    protos = _protos(rng)
    field = CovarianceField(np.broadcast_to(protos.sigmas[1], (6, 8, 3, 3)).copy())
    cmap = classify_image(field, protos, "ED")
    assert cmap.labels.shape == (6, 8)
    assert np.all(cmap.labels == 2)


def test_classify_image_deterministic_and_marks_bad_pixels(rng):
    protos = _protos(rng)
    data = sample(WishartModel(protos.sigmas[0], 4), rng, size=(5, 7))
    data[2, 3] = np.diag([1.0, -1.0, 1.0])  # not positive definite
    field = CovarianceField(data)
    a = classify_image(field, protos, "KL")
    b = classify_image(field, protos, "KL")
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.labels[2, 3] == 0
    assert np.all(a.labels[:2] > 0)


def test_classify_pixel_rejects_non_pd(rng):
    protos = _protos(rng)
    with pytest.raises(InvalidObservation):
        classify_pixel(np.diag([1.0, -1.0, 1.0]).astype(complex), protos, "KL")


def test_ml_rule_matches_density_argmax(rng):
    protos = _protos(rng)
    pts = sample(WishartModel(protos.sigmas[2], 4), rng, size=30)
    from polsardr.wishart import log_density
    dens = np.stack([log_density(WishartModel(protos.sigmas[m], 4.0), pts,
                                 validate=False) for m in range(3)], axis=-1)
    got = np.argmin(score_stack(pts, protos, "ML"), axis=-1)
    np.testing.assert_array_equal(got, np.argmax(dens, axis=-1))


def test_per_class_looks_selectable(rng):
    sigmas = np.stack([make_hpd(rng), make_hpd(rng, scale=2.0)])
    protos = PrototypeSet(sigmas=sigmas, shared_looks=4.0,
                          class_looks=np.array([3.2, 9.0]))
    pts = sample(WishartModel(sigmas[0], 4), rng, size=10)
    shared = distance_stack(pts, protos, "KL")
    per_class = distance_stack(pts, protos, "KL", use_class_looks=True)
    np.testing.assert_allclose(per_class[:, 0], shared[:, 0] * 3.2 / 4.0, rtol=1e-12)
    np.testing.assert_allclose(per_class[:, 1], shared[:, 1] * 9.0 / 4.0, rtol=1e-12)


def test_unknown_rule_rejected(rng):
    with pytest.raises(ValueError):
        classify_pixel(make_hpd(rng), _protos(rng), "NN")
