"""End-to-end checks of the zkmfa command-line tool and its exit codes.

The binary comes from $ZKMFA_CLI (set by ctest), else build/tools/zkmfa.
"""

import os
import re
import shutil
import subprocess
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
CLI = os.environ.get("ZKMFA_CLI", str(ROOT / "build" / "tools" / "zkmfa"))

OK, INPUT, USAGE, REJECT, TRANSPORT = 0, 1, 2, 3, 4


def run(*args, pwd="pw", cwd=None, stdin="", timeout=120):
    env = dict(os.environ)
    env.pop("ZKMFA_PWD", None)
    if pwd is not None:
        env["ZKMFA_PWD"] = pwd
    return subprocess.run([CLI, *map(str, args)], cwd=cwd, env=env, input=stdin, capture_output=True,
                          text=True, timeout=timeout)


def write_conf(path, **entries):
    path.write_text("".join(f"{k} = {v}\n" for k, v in entries.items()))
    return path


@pytest.fixture(scope="module")
def quiet_data(tmp_path_factory):
    """Noise-free persons and device: every protocol run should agree exactly."""
    d = tmp_path_factory.mktemp("quiet")
    r = run("synth-data", "--persons", 2, "--devices", 1, "--seed", 5, "--flaky-fraction", 0,
            "--moment-sigma", 0, "--variation-sigma", 0, "--enroll-frames", 1, "--out", d)
    assert r.returncode == OK, r.stderr
    return d


@pytest.fixture(scope="module")
def noisy_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("noisy")
    r = run("synth-data", "--persons", 3, "--devices", 1, "--seed", 6, "--out", d)
    assert r.returncode == OK, r.stderr
    return d


def session_conf(tmp_path, data, name="k.conf", **extra):
    entries = dict(devices_dir=data / "devices", persons_dir=data / "persons", device="device_000",
                   person="person_000", timeout_ms=10000)
    entries.update(extra)
    return write_conf(tmp_path / name, **entries)


def test_synth_data_is_deterministic(tmp_path):
    for out in ("a", "b"):
        assert run("synth-data", "--persons", 3, "--devices", 1, "--seed", 9, "--out", tmp_path / out).returncode == OK
    a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert a == b
    assert len([p for p in a if p.parts[0] == "persons"]) == 3
    assert (tmp_path / "a" / "devices" / "device_000" / "model.json").is_file()
    for rel in a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_synth_data_errors(tmp_path):
    assert run("synth-data", "--persons", 0, "--out", tmp_path / "x").returncode == USAGE
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    r = run("synth-data", "--persons", 2, "--out", blocker / "sub")
    assert r.returncode == INPUT
    assert run("no-such-command").returncode == USAGE


def test_enroll_token_and_bio(tmp_path, noisy_data, quiet_data):
    conf = session_conf(tmp_path, noisy_data, enroll_cycles=20)
    r = run("enroll", "--factor", "token", "--config", conf, "--out", tmp_path / "t.tt")
    assert r.returncode == OK, r.stderr
    x = float(re.search(r"x_density=([0-9.]+)", r.stdout).group(1))
    # Only flaky cells can disagree across reads; the default flaky fraction is 5%.
    assert 0.0 < x <= 0.05
    blob = (tmp_path / "t.tt").read_bytes()
    assert blob[:4] == b"TT01" and len(blob) == 16392

    qconf = session_conf(tmp_path, quiet_data, name="q.conf", enroll_frames=1)
    r = run("enroll", "--factor", "bio", "--config", qconf, "--out", tmp_path / "b.tt")
    assert r.returncode == OK, r.stderr
    assert "x_density=0.000000" in r.stdout


def test_enroll_missing_dump_dir_names_path(tmp_path):
    missing = tmp_path / "no_such_devices"
    conf = write_conf(tmp_path / "m.conf", devices_dir=missing, device="device_000")
    r = run("enroll", "--factor", "token", "--config", conf, "--out", tmp_path / "t.tt")
    assert r.returncode == INPUT
    assert "no_such_devices" in r.stderr


def test_config_errors_are_input_errors(tmp_path):
    conf = write_conf(tmp_path / "bad.conf", seed=1, bogus=2)
    r = run("sweep", "--config", conf, "--out", tmp_path / "o")
    assert r.returncode == INPUT
    assert "line 2" in r.stderr


def test_loopback_noiseless_and_injected(tmp_path, quiet_data):
    conf = session_conf(tmp_path, quiet_data, enroll_frames=1)
    r = run("keygen", "--mode", "loopback", "--config", conf)
    assert r.returncode == OK, r.stderr
    assert "ACCEPT, corrected=0" in r.stdout
    assert re.search(r"key_fingerprint=[0-9a-f]{64}\b", r.stdout)
    # Keys are never printed, only fingerprints: no long raw bit strings.
    assert not re.search(r"[01]{64}", r.stdout)

    conf = session_conf(tmp_path, quiet_data, name="i.conf", enroll_frames=1, frag_level=2, inject_flips=2)
    r = run("keygen", "--mode", "loopback", "--config", conf)
    assert r.returncode == OK, r.stderr
    assert "ACCEPT, corrected=2" in r.stdout


def test_password_never_from_argv(tmp_path, quiet_data):
    conf = session_conf(tmp_path, quiet_data, enroll_frames=1)
    assert run("keygen", "--mode", "loopback", "--config", conf, "--password", "pw").returncode == USAGE
    # No env var and an empty stdin line: refuse rather than run passwordless.
    assert run("keygen", "--mode", "loopback", "--config", conf, pwd=None, stdin="\n").returncode == INPUT
    # A piped line serves as the prompt answer.
    r = run("keygen", "--mode", "loopback", "--config", conf, pwd=None, stdin="pw\n")
    assert r.returncode == OK, r.stderr


def serve(conf, pwd):
    proc = subprocess.Popen([CLI, "keygen", "--mode", "serve", "--config", str(conf)],
                            env={**os.environ, "ZKMFA_PWD": pwd}, stdout=subprocess.PIPE,
                            stderr=subprocess.PIPE, text=True)
    line = proc.stdout.readline()
    m = re.search(r"listening on .*:(\d+)", line)
    assert m, line + proc.stderr.read()
    return proc, int(m.group(1))


@pytest.mark.parametrize("client_pwd,expect", [("pw", OK), ("wrong", REJECT)])
def test_serve_and_connect(tmp_path, quiet_data, client_pwd, expect):
    sconf = session_conf(tmp_path, quiet_data, name="s.conf", enroll_frames=1, port=0)
    proc, port = serve(sconf, "pw")
    try:
        cconf = session_conf(tmp_path, quiet_data, name="c.conf", enroll_frames=1, port=port)
        r = run("keygen", "--mode", "connect", "--config", cconf, pwd=client_pwd)
        out, _ = proc.communicate(timeout=60)
    finally:
        proc.kill()
    assert r.returncode == expect, r.stdout + r.stderr
    assert proc.returncode == expect
    if expect == OK:
        client_fp = re.search(r"key_fingerprint=(\w+)", r.stdout).group(1)
        assert f"key_fingerprint={client_fp}" in out
    else:
        assert "REJECT" in r.stdout and "REJECT" in out


def test_connect_refused_is_transport_error(tmp_path, quiet_data):
    sconf = session_conf(tmp_path, quiet_data, name="s.conf", enroll_frames=1, port=0)
    proc, port = serve(sconf, "pw")
    proc.kill()
    proc.wait()
    cconf = session_conf(tmp_path, quiet_data, name="c.conf", enroll_frames=1, port=port, timeout_ms=2000)
    assert run("keygen", "--mode", "connect", "--config", cconf).returncode == TRANSPORT


SMALL = dict(persons=4, enroll_frames=4, probe_frames=2, impostor_probes=1, enroll_cycles=10,
             grid="7:2:4, 7:1:2", trials=50, hist_grid="7:0, 7:2", seed=3)


@pytest.mark.parametrize("cmd,files", [
    ("sweep", ["sweep.csv"]),
    ("curve", ["curve.csv"]),
    ("hist", ["hist_summary.csv", "hist_7_0.csv", "hist_7_2.csv"]),
    ("bias-test", ["bias.csv"]),
])
def test_stats_commands_are_deterministic(tmp_path, cmd, files):
    conf = write_conf(tmp_path / "s.conf", **SMALL)
    outs = []
    for name in ("a", "b"):
        r = run(cmd, "--config", conf, "--out", tmp_path / name, timeout=600)
        assert r.returncode == OK, r.stderr
        assert (tmp_path / name / "run_manifest.json").is_file()
        outs.append({f: (tmp_path / name / f).read_bytes() for f in files})
    assert outs[0] == outs[1]
    if cmd == "sweep":
        rows = outs[0]["sweep.csv"].decode().strip().splitlines()
        assert len(rows) == 1 + 2
    if cmd == "bias-test":
        assert float(re.search(r"p_value=([0-9.]+)", r.stdout).group(1)) > 0.01


def test_verify_golden(tmp_path):
    assert run("verify-golden", "--corpus", ROOT / "corpus").returncode == OK
    copy = tmp_path / "corpus"
    shutil.copytree(ROOT / "corpus", copy)
    target = copy / "golden" / "token_device_000.tt"
    blob = bytearray(target.read_bytes())
    blob[100] ^= 1
    target.write_bytes(bytes(blob))
    r = run("verify-golden", "--corpus", copy)
    assert r.returncode == INPUT
    assert "token_device_000.tt" in r.stdout + r.stderr
