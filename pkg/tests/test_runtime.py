import json
import time

import pytest

from dynarena.cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from dynarena.judge import JudgeClient, ScoreTableJudge, mock_transport
from dynarena.rating import RatingHyperParams
from dynarena.runtime import (
    ArenaRunError,
    ConfigError,
    JudgeProvider,
    LogReplayProvider,
    MockProvider,
    ProviderError,
    RuntimeConfig,
    load_config,
    read_log,
    replay_log,
    run_arena,
    save_config,
)
from dynarena.runtime.arena import log_path


def small_cfg(**kw):
    base = {"models": [f"m{i}" for i in range(5)], "rounds": 60, "snapshot_every": 20, "seed": 11,
            "injections": [{"round": 30, "model": "late"}]}
    base.update(kw)
    return RuntimeConfig.from_dict(base)


# -- config ------------------------------------------------------------------------------------


def test_config_round_trip(tmp_path):
    cfg = small_cfg(hyperparams={"beta": 60.0})
    p = tmp_path / "cfg.json"
    save_config(cfg, p)
    again = load_config(p)
    assert again.to_dict() == cfg.to_dict()
    assert again.hp == RatingHyperParams(beta=60.0)
    assert load_config(None).hp == RatingHyperParams()


@pytest.mark.parametrize("bad", [
    {"bogus": 1},
    {"models": ["a", "a"]},
    {"models": ["a"], "injections": [{"round": 3, "model": "a"}]},
    {"provider": {"type": "carrier-pigeon"}},
    {"hyperparams": {"p_low": 0.7}},
    {"hyperparams": {"nope": 1}},
    {"converge_sigma": "sometimes"},
    {"dimensions": ["Smell"]},
])
def test_config_errors(bad):
    with pytest.raises((ConfigError, ValueError)):
        RuntimeConfig.from_dict(bad)


def test_unreadable_config(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load_config(p)


# -- arena -------------------------------------------------------------------------------------


def _final_board(out, dim="Alignment"):
    return (out / f"leaderboard_{dim.lower()}.json").read_bytes()


def test_arena_is_byte_deterministic(tmp_path):
    cfg = small_cfg()
    run_arena(cfg, "Alignment", tmp_path / "a")
    run_arena(cfg, "Alignment", tmp_path / "b")
    assert _final_board(tmp_path / "a") == _final_board(tmp_path / "b")
    board = json.loads(_final_board(tmp_path / "a"))
    assert board["round"] == 60 and len(board["rows"]) == 6
    assert [r["rank"] for r in board["rows"]] == list(range(1, 7))
    assert sorted((tmp_path / "a").glob("leaderboard_alignment_r*.json"))[-1].name == "leaderboard_alignment_r00060.json"


def test_log_layout(tmp_path):
    run_arena(small_cfg(), "Perceptual", tmp_path)
    recs = read_log(log_path(tmp_path, "Perceptual"))
    kinds = [r["type"] for r in recs]
    assert kinds[0] == "header" and kinds.count("round") == 60 and kinds.count("inject") == 1
    assert kinds.count("snapshot") == 3
    rnd = next(r for r in recs if r["type"] == "round")
    for key in ("round_index", "model_a", "model_b", "wins_a", "wins_b", "ties", "verdict", "weight",
                "pre", "post", "prompt_ids", "timestamp", "seed_fingerprint"):
        assert key in rnd
    assert rnd["wins_a"] + rnd["wins_b"] + rnd["ties"] == 15


def test_replay_matches_live_state(tmp_path):
    state = run_arena(small_cfg(), "Alignment", tmp_path)
    res = replay_log(log_path(tmp_path, "Alignment"))
    assert res.ok and res.rounds == 60 and res.snapshots_checked == 3
    assert res.state.snapshot() == state.snapshot()


def test_tampered_log_is_detected(tmp_path):
    run_arena(small_cfg(), "Alignment", tmp_path)
    p = log_path(tmp_path, "Alignment")
    lines = p.read_text().splitlines()
    i = next(k for k, x in enumerate(lines) if json.loads(x)["type"] == "round" and json.loads(x)["round_index"] == 25)
    rec = json.loads(lines[i])
    first = rec["model_a"]
    rec["post"][first]["mu"] += 1e-9
    lines[i] = json.dumps(rec)
    p.write_text("\n".join(lines) + "\n")
    res = replay_log(p)
    assert not res.ok and any("round 25" in m for m in res.mismatches)


def test_resume_equals_uninterrupted(tmp_path):
    cfg = small_cfg()
    full = run_arena(cfg, "Alignment", tmp_path / "full")
    run_arena(cfg, "Alignment", tmp_path / "split", rounds=23)
    with pytest.raises(ArenaRunError):
        run_arena(cfg, "Alignment", tmp_path / "split")
    resumed = run_arena(cfg, "Alignment", tmp_path / "split", resume=True)
    assert resumed.snapshot() == full.snapshot()
    assert _final_board(tmp_path / "split") == _final_board(tmp_path / "full")


def test_resume_after_torn_write(tmp_path):
    cfg = small_cfg()
    full = run_arena(cfg, "Alignment", tmp_path / "full")
    run_arena(cfg, "Alignment", tmp_path / "crash", rounds=40)
    p = log_path(tmp_path / "crash", "Alignment")
    data = p.read_bytes()
    # drop the closing snapshot and half of the last round line
    lines = data.splitlines(keepends=True)
    assert json.loads(lines[-1])["type"] == "snapshot"
    kept = b"".join(lines[:-2]) + lines[-2][: len(lines[-2]) // 2]
    p.write_bytes(kept)
    resumed = run_arena(cfg, "Alignment", tmp_path / "crash", resume=True)
    assert resumed.snapshot() == full.snapshot()
    assert replay_log(p).ok


def test_resume_rejects_other_configuration(tmp_path):
    run_arena(small_cfg(), "Alignment", tmp_path, rounds=10)
    with pytest.raises(ArenaRunError):
        run_arena(small_cfg(seed=12), "Alignment", tmp_path, resume=True)


def test_mock_provider_is_round_keyed():
    p, q = MockProvider(3, "Alignment"), MockProvider(3, "Alignment")
    for r in range(1, 5):
        p("a", "b", r, 15)
    assert p("a", "b", 7, 15) == q("a", "b", 7, 15)
    assert MockProvider(3, "Aesthetic")("a", "b", 7, 15) != q("a", "b", 7, 15)


def test_replay_provider_checks_pairing(tmp_path):
    run_arena(small_cfg(), "Alignment", tmp_path, rounds=5)
    recs = read_log(log_path(tmp_path, "Alignment"))
    prov = LogReplayProvider(recs)
    first = recs[1]
    out = prov(first["model_a"], first["model_b"], 1, 15)
    assert (out.wins_a, out.wins_b, out.ties) == (first["wins_a"], first["wins_b"], first["ties"])
    with pytest.raises(ProviderError):
        prov("nobody", "else", 2, 15)


def test_judge_provider_with_mock_transport(tmp_path):
    prompts = [{"id": i, "prompt": f"scene {i}", "checklist": {"categories": ["subject"]}} for i in range(20)]
    table = {f"{m}/{i}.png": s for i in range(20) for m, s in (("strong", 1.0), ("weak", 0.0))}
    client = JudgeClient("http://judge.test/v1", transport=mock_transport(ScoreTableJudge(table)))
    prov = JudgeProvider(client, prompts, "{model}/{prompt_id}.png", seed=4)
    out = prov("strong", "weak", 1, 15)
    assert len(out) == 15 and {v for _, v in out} == {"A"}
    failing = JudgeClient("http://judge.test/v1", transport=mock_transport(lambda body: b"garbage"))
    out = JudgeProvider(failing, prompts, "{model}/{prompt_id}.png", seed=4)("strong", "weak", 1, 5)
    assert [v for _, v in out] == [None] * 5
    client.close()
    failing.close()


# -- command line ------------------------------------------------------------------------------


def _write_cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    save_config(small_cfg(**kw), p)
    return str(p)


def test_cli_arena_and_replay(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    out = tmp_path / "run"
    assert main(["arena", "--config", cfg, "--out-dir", str(out), "--rounds", "30"]) == EXIT_OK
    assert (out / "effective_config.json").exists()
    assert main(["arena", "--config", cfg, "--out-dir", str(out)]) == EXIT_USAGE
    assert main(["arena", "--config", cfg, "--out-dir", str(out), "--resume"]) == EXIT_OK
    capsys.readouterr()
    log = out / "matchlog_alignment.jsonl"
    assert main(["replay", str(log)]) == EXIT_OK
    status = json.loads(capsys.readouterr().out)
    assert status["status"] == "match" and status["rounds"] == 60
    lines = log.read_text().splitlines()
    rec = json.loads(lines[5])
    rec["verdict"] = "Tie" if rec["verdict"] != "Tie" else "WinA"
    lines[5] = json.dumps(rec)
    log.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(log)]) == EXIT_MISMATCH


def test_cli_prompts_resume_and_analyze(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, prompts={"task": "Alignment"})
    out = tmp_path / "p"
    assert main(["prompts", "--config", cfg, "--out-dir", str(out), "--rounds", "40"]) == EXIT_OK
    path = out / "prompts_alignment.jsonl"
    whole = path.read_text()
    assert main(["prompts", "--config", cfg, "--out-dir", str(out), "--rounds", "40"]) == EXIT_USAGE
    path.write_text("".join(whole.splitlines(keepends=True)[:17]) + '{"id": 17, "ta')
    assert main(["prompts", "--config", cfg, "--out-dir", str(out), "--rounds", "40", "--resume"]) == EXIT_OK
    ids = [json.loads(x)["id"] for x in path.read_text().splitlines() if x.startswith('{"id":') and x.endswith("}")]
    assert ids == list(range(40))
    capsys.readouterr()
    assert main(["analyze", str(path), "--out-dir", str(out)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["records"] == 40 and rep["malformed_rate"] == pytest.approx(1 / 41)
    assert (out / "analysis.json").exists()


def test_cli_simulate_smoke(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, simulate={
        "environments": ["reference"], "systems": ["ours", "elo"],
        "trial_spec": {"n_trials": 3, "checkpoints": [500, 1500, 3000]},
    })
    t0 = time.perf_counter()
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path / "sim"), "--rounds", "500"]) == EXIT_OK
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    paths = json.loads(capsys.readouterr().out)
    rows = json.loads(open(paths["json"]).read())["rows"]
    assert {r["system"] for r in rows} == {"ours", "elo"} and all(r["n_trials"] == 3 for r in rows)
    for r in rows:
        for key in ("srcc@500", "kendall@500", "top3@500", "top5@500", "srcc@final",
                    "discovery_latency", "discovery_success", "top1_after_injection"):
            assert key in r


def test_cli_usage_errors(tmp_path):
    assert main(["arena", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(["teleport"])
