from slcones.cone2 import derive_params
from slcones.diagnostics import THRESHOLDS, diagnose, sample_points


def test_sample_points_deterministic():
    p = derive_params(1.0, 0.3, 0.4)
    assert sample_points(p, 5, seed=1) == sample_points(p, 5, seed=1)


def test_report_structure():
    rep, curve = diagnose(derive_params(1.0, 0.3, 0.4), n_points=4, curve_samples=16)
    assert len(curve) == 32
    for name in ("harmonic", "return_map", "toda", "tzitzeica", "flatness", "killing",
                 "killing_algebra", "spectral", "finite_type", "curve"):
        blk = rep["blocks"][name]
        assert blk["threshold"] == THRESHOLDS.get(name, blk["threshold"])
        assert blk["passed"] == all(v < blk["threshold"] for v in blk["values"].values())
    for name in ("toda", "tzitzeica", "flatness", "killing", "curve", "harmonic"):
        assert rep["blocks"][name]["passed"], name
    assert rep["blocks"]["return_map"]["residual_conj_variant"] < 1e-6
    assert rep["passed"] == (not rep["failed_blocks"])


def test_isotropic_report_passes():
    rep, curve = diagnose(derive_params(0.7, 0.0, 0.0), n_points=4)
    assert rep["classification"] == "isotropic" and rep["passed"] and curve == []
