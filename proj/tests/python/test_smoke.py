import json

import numpy as np
import pytest

import dfwlab


def test_regression_roundtrip():
    p = dfwlab.regression_problem(8, 4, 2, 4, noise_std=0.0, rotation_scale=0.3, seed=3)
    assert p.dims == {"d_x": 8, "d_y": 4, "r": 2, "tasks": 4}
    phi = p.phi_star
    assert np.allclose(phi @ phi.T, np.eye(2), atol=1e-12)
    back = dfwlab.Problem.from_json(p.to_json())
    assert back.hash() == p.hash()


def test_step_and_training():
    p = dfwlab.regression_problem(8, 4, 2, 4, noise_std=0.0, rotation_scale=0.3, seed=3)
    xs, ys, n1 = dfwlab.sample_batch(p, 60, 0.5, seed=1)
    assert len(xs) == 4 and n1 == 30
    for t in range(4):
        assert np.allclose(ys[t], xs[t] @ p.operator_star(t).T, atol=1e-12)
    step = dfwlab.dfw_step(xs, ys, p.phi_star, 0.1)
    assert dfwlab.subspace_distance(step["rep"], p.phi_star) < 1e-10

    init = dfwlab.init_representation(p, gamma=1.0, seed=2)
    rep, records = dfwlab.run_training(p, init, "DFW", iterations=300, batch_size=60, oracle_step_size=True, seed=4)
    assert len(records) == 300
    assert records[-1]["dist"] < 1e-6
    assert dfwlab.subspace_distance(rep, p.phi_star) == pytest.approx(records[-1]["dist"])


def test_kernels():
    a = np.array([[0.5]])
    assert dfwlab.dlyap(a, np.eye(1))[0, 0] == pytest.approx(4.0 / 3.0)
    q, r = dfwlab.orthonormalize_rows(np.array([[2.0, 0.0], [0.0, 3.0]]))
    assert np.allclose(r @ q, np.diag([2.0, 3.0]))
    rot = dfwlab.random_rotation(5, 1.0, seed=1)
    assert np.allclose(rot @ rot.T, np.eye(5), atol=1e-12)
    s = dfwlab.erm_schedule(10**6, 0.5, 1.0, 1.0)
    assert s["simulated_final"] <= s["lemma_bound"]
    assert sum(s["batch_sizes"]) <= 10**6


def test_errors_carry_kind():
    with pytest.raises(dfwlab.DfwError) as info:
        dfwlab.erm_schedule(3, 0.5, 1.0, 1.0)
    assert info.value.kind == "Infeasible"
    with pytest.raises(dfwlab.DfwError):
        dfwlab.subspace_distance(np.ones((1, 2)), np.array([[1.0, 0.0]]))


def test_experiment(tmp_path):
    cfg = dfwlab.presets()[0]
    cfg.update(d_x=8, d_y=4, r=2, tasks=4, trials=2, iterations=5, batch_size=40, split_fraction=0.5,
               output_dir=str(tmp_path), variants=["DFW-T4", "AMD-T4"])
    cfg.pop("transfer", None)
    curves = dfwlab.run_experiment(cfg)
    assert set(curves) == {"DFW-T4", "AMD-T4"}
    assert len(curves["DFW-T4"]["mean"]) == 5
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["trials"]) == 2
