import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from skwave.evolve import FieldState
from skwave.grid import make_grid
from skwave.io import (
    MAGIC, SnapshotError, decode_snapshot, encode_snapshot, git_blob_hash, load_record, read_profile_csv,
    read_snapshot, save_record, write_profile_csv, write_snapshot,
)
from skwave.model import ModelKind
from skwave.soliton import SolitonProfile

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50)
@given(arrays(np.float64, 16, elements=finite), arrays(np.float64, 16, elements=finite),
       st.floats(0.0, 1e6), st.sampled_from(list(ModelKind)), st.floats(1e-3, 1e3))
def test_snapshot_round_trip_bit_exact(u, v, t, model, r_max):
    g = make_grid(r_max, 16)
    s = FieldState(t, u, v, g, model)
    back = decode_snapshot(encode_snapshot(s))
    assert back.u.tobytes() == s.u.tobytes() and back.v.tobytes() == s.v.tobytes()
    assert back.t == t and back.grid == g and back.model is model


def test_snapshot_layout():
    g = make_grid(2.0, 8)
    blob = encode_snapshot(FieldState(0.5, np.arange(8.0), -np.arange(8.0), g, ModelKind.WAVE_MAP))
    assert blob.startswith(MAGIC)
    assert blob[len(MAGIC):].split(b"\n", 4)[:4] == [b"8", b"2.0", b"0.5", b"0"]
    payload = blob[-2 * 8 * 8:]
    assert np.array_equal(np.frombuffer(payload, "<f8")[:8], np.arange(8.0))


def test_snapshot_errors(tmp_path):
    g = make_grid(2.0, 8)
    blob = encode_snapshot(FieldState(0.0, np.zeros(8), np.zeros(8), g, ModelKind.ADKINS_NAPPI))
    with pytest.raises(SnapshotError, match="magic"):
        decode_snapshot(b"XKWV1\n" + blob[6:])
    with pytest.raises(SnapshotError):
        decode_snapshot(blob[:-8])
    with pytest.raises(SnapshotError):
        decode_snapshot(blob.replace(b"\n1\n", b"\n9\n", 1))
    with pytest.raises(SnapshotError):
        decode_snapshot(MAGIC + b"8\n")
    p = tmp_path / "a.skwv"
    write_snapshot(p, decode_snapshot(blob))
    assert read_snapshot(p).grid == g


def test_record_round_trip(tmp_path, pulse_run_512):
    _, _, rec = pulse_run_512
    paths = save_record(tmp_path, rec, stride=7)
    assert len(paths) == len(range(0, rec.times.size, 7)) + (0 if (rec.times.size - 1) % 7 == 0 else 1)
    back = load_record(tmp_path)
    assert back.times[-1] == rec.times[-1]
    assert np.array_equal(back.u[0], rec.u[0]) and np.array_equal(back.v[-1], rec.v[-1])
    with pytest.raises(SnapshotError):
        load_record(tmp_path / "missing")


def test_profile_csv_round_trip(tmp_path):
    r = make_grid(5.0, 10).r
    p = SolitonProfile(r, np.sin(r) / 3, np.cos(r), 1.2563297353702296, 5.0, 0.5, 1e-3)
    path = tmp_path / "p.csv"
    write_profile_csv(path, p)
    rr, uu, meta = read_profile_csv(path)
    assert np.array_equal(rr, r) and np.array_equal(uu, p.u)
    assert meta["slope"] == p.slope and meta["gap"] == 1e-3
    assert path.read_text().splitlines()[4] == "r,u"


def test_git_blob_hash():
    # git hash-object of an empty blob and of "hello\n"
    assert git_blob_hash(b"") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"
    assert git_blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
