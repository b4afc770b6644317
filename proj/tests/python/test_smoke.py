import hashlib
import os
import pathlib

import pytest

import zkmfa

CORPUS = pathlib.Path(os.environ.get("ZKMFA_CORPUS", pathlib.Path(__file__).resolve().parents[2] / "corpus"))


def test_hashes_match_hashlib():
    data = b"zkmfa smoke"
    assert zkmfa.sha3_256(data) == hashlib.sha3_256(data).digest()
    assert zkmfa.sha3_512(data) == hashlib.sha3_512(data).digest()
    assert zkmfa.shake256(data, 300) == hashlib.shake_256(data).digest(300)


def test_cell_indices_follow_shake_stream():
    rn1 = bytes(range(64))
    pwd = "hunter2"
    seed = rn1 + hashlib.sha3_512(pwd.encode()).digest()
    stream = hashlib.shake_256(seed).digest(4 * 64)
    expected = []
    for i in range(0, len(stream), 4):
        v = int.from_bytes(stream[i : i + 4], "little") % 1024
        if v not in expected:
            expected.append(v)
    got = zkmfa.derive_cell_indices(rn1, pwd, 1024, 16)
    assert got == expected[:16]


def test_landmarks_are_distinct():
    sel = zkmfa.select_landmark_indices("pw")
    assert len(sel) == 64 and len(set(sel)) == 64
    assert all(0 <= i < 68 for i in sel)


def test_quantizer_examples():
    assert zkmfa.quantize_distance(0.0, 7, 1) == [0] * 6
    assert zkmfa.quantize_distance(1e9, 7, 1) == [1, 0, 0, 0, 0, 0]


def test_table_round_trip_and_errors():
    cells = [0, 1, 2] * 5
    blob = zkmfa.table_serialize(3, 5, cells)
    assert blob[:4] == b"TT01"
    assert zkmfa.table_deserialize(blob) == (3, 5, cells)
    with pytest.raises(zkmfa.FormatError):
        zkmfa.table_deserialize(b"TT02" + blob[4:])


def test_noiseless_loopback_is_error_free():
    r = zkmfa.loopback(seed=3)
    assert r["accepted"] and r["corrected_bits"] == 0 and r["key_errors"] == 0
    assert len(r["fingerprint"]) == 64


def test_injected_flips_are_corrected():
    r = zkmfa.loopback(seed=3, frag_level=2, inject_flips=2)
    assert r["accepted"] and r["corrected_bits"] == 2


def test_binomial():
    assert zkmfa.binomial_test(4, 2).p_value == pytest.approx(1.0)
    assert zkmfa.binomial_test(10, 0).p_value == pytest.approx(2 / 1024, rel=1e-9)


def test_small_sweep_is_deterministic():
    a = zkmfa.sweep_csv(persons=3, probe_frames=1, seed=5)
    b = zkmfa.sweep_csv(persons=3, probe_frames=1, seed=5)
    assert a == b
    assert a.splitlines()[0].startswith("g,m,frag_level,far_percent,frr_percent")


@pytest.mark.skipif(not (CORPUS / "manifest.json").exists(), reason="corpus not present")
def test_golden_corpus_verifies():
    checked, mismatches = zkmfa.verify_golden(CORPUS)
    assert checked > 0 and mismatches == []
