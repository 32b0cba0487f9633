import json

import numpy as np
import pytest

from xrec.nn.serialize import MAGIC, CheckpointError, load_checkpoint, save_checkpoint


def sample_tensors(rng):
    return {
        "enc.0.w": rng.standard_normal((4, 3)).astype(np.float32),
        "enc.0.b": rng.standard_normal(3).astype(np.float32),
        "emb": rng.standard_normal((7, 2)).astype(np.float32),
    }


def test_roundtrip_exact(tmp_path, rng):
    tensors = sample_tensors(rng)
    header = {"note": "fixture", "n": 3}
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, header, tensors)
    loaded_header, loaded = load_checkpoint(path)
    assert loaded_header["note"] == "fixture"
    assert loaded_header["n"] == 3
    assert set(loaded) == set(tensors)
    for name in tensors:
        assert loaded[name].dtype == np.float32
        np.testing.assert_array_equal(loaded[name], tensors[name])


def test_resave_is_bit_identical(tmp_path, rng):
    tensors = sample_tensors(rng)
    p1 = tmp_path / "a.ckpt"
    p2 = tmp_path / "b.ckpt"
    save_checkpoint(p1, {"k": 1}, tensors)
    header, loaded = load_checkpoint(p1)
    header.pop("format")
    header.pop("tensors")
    save_checkpoint(p2, header, loaded)
    assert p1.read_bytes() == p2.read_bytes()


def test_bad_magic(tmp_path, rng):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, sample_tensors(rng))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)


def test_truncated_header(tmp_path, rng):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, sample_tensors(rng))
    raw = path.read_bytes()
    path.write_bytes(raw[: len(MAGIC) + 4])
    with pytest.raises(CheckpointError, match="header"):
        load_checkpoint(path)


def test_truncated_payload(tmp_path, rng):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, sample_tensors(rng))
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(CheckpointError, match="payload"):
        load_checkpoint(path)


def test_trailing_bytes_rejected(tmp_path, rng):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, sample_tensors(rng))
    with open(path, "ab") as fh:
        fh.write(b"\x00")
    with pytest.raises(CheckpointError, match="trailing"):
        load_checkpoint(path)


def test_wrong_format_version(tmp_path, rng):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, {"w": np.zeros(1, dtype=np.float32)})
    raw = path.read_bytes()
    head_len = int(np.frombuffer(raw[8:16], dtype="<u8")[0])
    doc = json.loads(raw[16 : 16 + head_len])
    doc["format"] = 99
    new_head = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    path.write_bytes(MAGIC + np.uint64(len(new_head)).tobytes() + new_head + raw[16 + head_len :])
    with pytest.raises(CheckpointError, match="format"):
        load_checkpoint(path)


def test_float64_inputs_stored_as_float32(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, {}, {"w": np.arange(4, dtype=np.float64)})
    _, loaded = load_checkpoint(path)
    assert loaded["w"].dtype == np.float32
    np.testing.assert_array_equal(loaded["w"], np.arange(4, dtype=np.float32))
