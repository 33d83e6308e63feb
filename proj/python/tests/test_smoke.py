import math

import numpy as np
import pytest

import clab


def etf_embeddings(n_classes, per_class, n_augs, dim, seed=0):
    means = clab.simplex_etf(n_classes, dim, seed)
    labels = np.repeat(np.arange(n_classes), per_class)
    z = np.repeat(means[labels][:, None, :], n_augs, axis=1)
    return z, labels.tolist()


def test_identical_embeddings():
    z = np.zeros((3, 1, 4))
    z[:, :, 0] = 1.0
    assert clab.contrastive_loss(z, "dcl") == pytest.approx(math.log(2), abs=1e-12)
    assert clab.contrastive_loss(z, "cl") == pytest.approx(math.log(3), abs=1e-12)


def test_etf_minimum_and_gradient():
    z, labels = etf_embeddings(5, 20, 1, 8)
    assert clab.contrastive_loss(z, "nscl", labels) == pytest.approx(3.1320266, abs=1e-7)
    loss, grad = clab.loss_and_gradient(z, "nscl", labels)
    assert grad.shape == z.shape
    assert np.linalg.norm(grad) < 1e-8
    assert clab.ufm_target_loss(5, 20, 2) == pytest.approx(3.8251738, abs=1e-7)


def test_gradient_against_finite_differences():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(6, 2, 3))
    labels = [0, 0, 1, 1, 2, 2]
    _, grad = clab.loss_and_gradient(z, "dcl", labels)
    h = 1e-6
    numeric = np.zeros_like(z)
    for idx in np.ndindex(z.shape):
        up, down = z.copy(), z.copy()
        up[idx] += h
        down[idx] -= h
        numeric[idx] = (clab.contrastive_loss(up, "dcl") - clab.contrastive_loss(down, "dcl")) / (2 * h)
    assert np.max(np.abs(grad - numeric)) < 1e-6


def test_gap_report_and_bound():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(40, 2, 5))
    labels = np.repeat(np.arange(4), 10).tolist()
    report = clab.loss_gap(z, labels)
    assert report["gap_dcl_nscl"] == pytest.approx(report["dcl"] - report["nscl"], abs=1e-9)
    assert 0 <= report["gap_dcl_nscl"] <= clab.thm1_gap_bound(40, 10)
    assert len(report["per_anchor_ratio"]) == 80


def test_bounds():
    sol = clab.cor1_bound(2, 100, 0.01, 0.1)
    assert sol["bound"] == pytest.approx(0.3217031, abs=1e-6)
    assert sol["bound"] <= clab.general_bound(2, 100, 0.01, 0.1, 16.0)
    assert clab.general_bound(2, 100, 0.01, 0.1, 16.0) <= clab.prop1_bound(2, 100, 0.01, 0.1)
    assert clab.solve_stationary_cubic(1.0, 2.0) == pytest.approx(4.0)
    assert clab.cor1_bound(3, 20, 0.05, 0.0)["a_opt"] is None
    b = clab.batch_gap_bound(1024, 100, 0.05)
    assert b["b_bar"] == 963


def test_similarity_and_dispersion():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(50, 1, 6))
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    assert clab.cka(a, a @ q) == pytest.approx(1.0, abs=1e-9)
    assert clab.rsa(a, a @ q) == pytest.approx(1.0, abs=1e-9)
    z = np.array([[[0.5, 0.0]], [[-0.5, 0.0]], [[2.0, 0.5]], [[2.0, -0.5]]])
    disp = clab.class_dispersion(z, [0, 0, 1, 1])
    assert disp["cdnv_avg"] == pytest.approx(0.0625)
    assert disp["cdnv_sym_avg"] == pytest.approx(0.125)


def test_ufm_and_fewshot():
    run = clab.ufm_train(n_classes=3, per_class=6, n_augs=2, dim=3, steps=300)
    assert run["embeddings"].shape == (18, 2, 3)
    assert run["final_loss"] < run["loss_per_step"][0]
    z, labels = etf_embeddings(4, 6, 2, 4)
    res = clab.mshot_error(z, labels, shots=1, classifier="lp")
    assert res["mean_error"] == 0.0


def test_bundle_round_trip(tmp_path):
    z = np.random.default_rng(3).normal(size=(5, 2, 3)).astype(np.float32).astype(np.float64)
    path = str(tmp_path / "x.emb")
    clab.save_bundle(path, z, [0, 1, 0, 1, 1])
    back, labels = clab.load_bundle(path)
    assert np.array_equal(back, z)
    assert labels == [0, 1, 0, 1, 1]
    (tmp_path / "bad.emb").write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(clab.FormatError):
        clab.load_bundle(str(tmp_path / "bad.emb"))


def test_errors():
    with pytest.raises(clab.DomainError):
        clab.contrastive_loss(np.ones((3, 1, 2)), "nscl")
    with pytest.raises(clab.Error):
        clab.ufm_train(n_classes=5, dim=3, steps=1)
