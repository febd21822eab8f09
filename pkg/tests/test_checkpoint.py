"""Checkpoint format: determinism, round trips, corruption handling."""

import hashlib

import numpy as np
import pytest

from aflearn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from aflearn.optimizer import init_meta_params
from aflearn.structures import DependencyStructure


def _params():
    return init_meta_params(DependencyStructure.banded(4), 4, seed=9)


def test_round_trip_preserves_everything(tmp_path):
    params = _params()
    path = tmp_path / "rule.ckpt"
    save_checkpoint(path, params, dft_size=64, metadata={"epoch": 3, "val_serle_db": 7.25})
    loaded, header = load_checkpoint(path)
    assert loaded.structure == params.structure
    assert loaded.hidden_size == params.hidden_size
    assert loaded.names == params.names
    for name in params.names:
        assert np.array_equal(loaded.tensors[name], params.tensors[name])
    assert header["dft_size"] == 64
    assert header["metadata"] == {"epoch": 3, "val_serle_db": 7.25}


def test_save_is_deterministic_and_reload_is_byte_identical(tmp_path):
    params = _params()
    a = tmp_path / "a.ckpt"
    b = tmp_path / "b.ckpt"
    save_checkpoint(a, params, dft_size=64, metadata={"seed": 1})
    save_checkpoint(b, params, dft_size=64, metadata={"seed": 1})
    assert a.read_bytes() == b.read_bytes()

    loaded, header = load_checkpoint(a)
    c = tmp_path / "c.ckpt"
    save_checkpoint(c, loaded, dft_size=header["dft_size"], metadata=header["metadata"])
    assert c.read_bytes() == a.read_bytes()
    assert hashlib.sha256(c.read_bytes()).hexdigest() == hashlib.sha256(a.read_bytes()).hexdigest()


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "x.ckpt"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_rejects_truncated_blob(tmp_path):
    params = _params()
    path = tmp_path / "t.ckpt"
    save_checkpoint(path, params)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 16])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_rejects_wrong_schema(tmp_path):
    params = _params()
    path = tmp_path / "s.ckpt"
    save_checkpoint(path, params)
    data = bytearray(path.read_bytes())
    # bump the schema integer inside the JSON header
    idx = data.find(b'"schema":1')
    data[idx : idx + len(b'"schema":1')] = b'"schema":9'
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
