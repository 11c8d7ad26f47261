import hashlib
import json
import os

import numpy as np
import pytest

from kolmo import cli, storage


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def run(argv):
    return cli.main(argv)


class TestSimulate:
    def test_snapshot_count_example(self, tmp_path):
        out = str(tmp_path / "x.kf")
        rc = run(["simulate", "--re", "13.5", "--n", "2", "--t-total", "100",
                  "--save-every", "5", "--out", out])
        assert rc == 0
        assert storage.read_snapshots(out).count == 21

    def test_deterministic_rerun_byte_identical(self, tmp_path):
        a, b = str(tmp_path / "a.kf"), str(tmp_path / "b.kf")
        for out in (a, b):
            assert run(["simulate", "--re", "14.4", "--t-total", "20",
                        "--save-every", "5", "--seed", "3", "--out", out]) == 0
        assert sha(a) == sha(b)

    def test_manifest_replay_reproduces(self, tmp_path):
        out = str(tmp_path / "x.kf")
        assert run(["simulate", "--re", "14.4", "--t-total", "10",
                    "--save-every", "5", "--seed", "1", "--out", out]) == 0
        h0 = sha(out)
        manifest = json.load(open(out + ".manifest.json"))
        os.unlink(out)
        assert run(manifest["argv"]) == 0
        assert sha(out) == h0


class TestErrors:
    def test_unknown_flag_exits_2(self, tmp_path, capsys):
        assert run(["simulate", "--re", "5", "--t-total", "1",
                    "--bogus", "1", "--out", str(tmp_path / "x.kf")]) == 2

    def test_missing_input_exits_1(self, tmp_path):
        assert run(["label", "--in", str(tmp_path / "absent.kf"),
                    "--out", str(tmp_path / "l.csv")]) == 1

    def test_version_mismatch_hard_error(self, tmp_path):
        out = str(tmp_path / "x.kf")
        run(["simulate", "--re", "5", "--t-total", "10", "--save-every", "5",
             "--out", out])
        raw = bytearray(open(out, "rb").read())
        raw[6] = 9
        open(out, "wb").write(bytes(raw))
        assert run(["label", "--in", out, "--out", str(tmp_path / "l.csv")]) == 1

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        assert run(["run", str(cfg)]) == 2
        cfg.write_text(json.dumps({"stages": [{"args": {}}]}))
        assert run(["run", str(cfg)]) == 2

    def test_failing_stage_exits_1(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"stages": [
            {"cmd": "label", "args": {"in": str(tmp_path / "nope.kf"),
                                      "out": str(tmp_path / "l.csv")}}
        ]}))
        assert run(["run", str(cfg)]) == 1


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Small end-to-end pipeline exercising every stage's plumbing."""
    root = tmp_path_factory.mktemp("pipe")
    cfg = {
        "stages": [
            {"cmd": "simulate", "args": {"re": 14.4, "t_total": 1200,
                                         "save_every": 5, "discard": 200,
                                         "seed": 2, "out": "run.kf"}},
            {"cmd": "reduce", "args": {"in": "run.kf", "out": "aligned.kf",
                                       "phase": True}},
            {"cmd": "train-ae", "args": {"in": "aligned.kf", "dh": 3,
                                         "epochs": 10, "models": 1,
                                         "enc_hidden": "48,24",
                                         "dec_hidden": "24,48",
                                         "out": "model"}},
            {"cmd": "encode", "args": {"model": "model", "in": "aligned.kf",
                                       "out": "model/latent.csv"}},
            {"cmd": "train-map", "args": {"model_dir": "model",
                                          "latent": "model/latent.csv",
                                          "epochs": 20, "models": 1,
                                          "hidden": "24,24",
                                          "lr_drop_epoch": 10}},
            {"cmd": "train-phase", "args": {"model_dir": "model",
                                            "latent": "model/latent.csv",
                                            "epochs": 10, "models": 1,
                                            "hidden": "24,24",
                                            "lr_drop_epoch": 5}},
            {"cmd": "rollout", "args": {"model_dir": "model",
                                        "latent": "model/latent.csv",
                                        "steps": 60, "ic_index": 4,
                                        "out": "roll.csv",
                                        "decode_out": "roll.kf"}},
            {"cmd": "label", "args": {"in": "aligned.kf", "out": "labels.csv"}},
        ]
    }
    cwd = os.getcwd()
    os.chdir(root)
    try:
        path = root / "pipe.json"
        path.write_text(json.dumps(cfg))
        assert run(["run", str(path)]) == 0
    finally:
        os.chdir(cwd)
    return root


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        for name in ("run.kf", "aligned.kf", "model/meta.json", "model/latent.csv",
                     "model/fmap.knet1", "model/gmap.knet1", "roll.csv",
                     "roll.kf", "labels.csv"):
            assert (pipeline / name).exists(), name

    def test_sidecar_columns(self, pipeline):
        header, cols = storage.read_csv(str(pipeline / "aligned.kf.ops.csv"))
        assert header == ["t", "phi_x", "phi_y", "sr_power", "rotated"]
        assert np.all(np.abs(cols["phi_x"]) <= np.pi)

    def test_encode_deterministic(self, pipeline):
        out2 = str(pipeline / "latent2.csv")
        rc = run(["encode", "--model", str(pipeline / "model"),
                  "--in", str(pipeline / "aligned.kf"),
                  "--sidecar", str(pipeline / "aligned.kf.ops.csv"),
                  "--out", out2])
        assert rc == 0
        assert sha(out2) == sha(str(pipeline / "model/latent.csv"))

    def test_stats_stages(self, pipeline):
        root = str(pipeline)
        assert run(["stats", "pdf", "--in", f"{root}/run.kf",
                    "--range-with", f"{root}/roll.kf", "--bins", "24",
                    "--out", f"{root}/truth_pdf.csv"]) == 0
        assert run(["stats", "pdf", "--in", f"{root}/roll.kf",
                    "--range-with", f"{root}/run.kf", "--bins", "24",
                    "--out", f"{root}/roll_pdf.csv"]) == 0
        assert run(["stats", "kl", "--pred", f"{root}/roll_pdf.csv",
                    "--truth", f"{root}/truth_pdf.csv",
                    "--out", f"{root}/kl.csv"]) == 0
        assert run(["stats", "durations", "--labels", f"{root}/labels.csv",
                    "--tau", "5", "--out", f"{root}/dur.csv"]) == 0
        assert run(["stats", "msd", "--in", f"{root}/model/latent.csv",
                    "--unwrap", "--max-lag-steps", "40",
                    "--out", f"{root}/msd.csv"]) == 0
        assert run(["stats", "ensemble", "--model-dir", f"{root}/model",
                    "--truth", f"{root}/aligned.kf",
                    "--latent", f"{root}/model/latent.csv",
                    "--labels", f"{root}/labels.csv",
                    "--n-ics", "30", "--horizon-steps", "6",
                    "--out", f"{root}/ens.csv"]) == 0
        _, cols = storage.read_csv(f"{root}/ens.csv")
        assert len(cols["lead_time"]) == 7
        assert cols["pooled"][0] >= 0

    def test_predict_burst(self, pipeline):
        root = str(pipeline)
        assert run(["predict-burst", "--indicator", "mode02",
                    "--labels", f"{root}/labels.csv", "--in", f"{root}/run.kf",
                    "--tau-b-max", "10", "--max-train", "150",
                    "--out", f"{root}/burst.csv"]) == 0
        header, cols = storage.read_csv(f"{root}/burst.csv")
        assert "majority_pct" in header
        assert len(cols["tau_b"]) == 3

    def test_mismatched_pdf_grids_exit_1(self, pipeline):
        root = str(pipeline)
        assert run(["stats", "pdf", "--in", f"{root}/run.kf", "--bins", "10",
                    "--out", f"{root}/p10.csv"]) == 0
        assert run(["stats", "kl", "--pred", f"{root}/p10.csv",
                    "--truth", f"{root}/truth_pdf.csv"]) == 1
