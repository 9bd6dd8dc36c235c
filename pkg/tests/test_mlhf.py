import numpy as np
import pytest

from longtrack import mlhf
from longtrack.errors import FormatError
from longtrack.features import load_deep_layers


def test_round_trip(tmp_path, rng):
    layers = [rng.standard_normal((5, 7, 3)).astype(np.float32),
              rng.standard_normal((2, 2, 9)).astype(np.float32)]
    path = tmp_path / mlhf.frame_filename(1)
    mlhf.write_layers(path, layers)
    back = mlhf.read_layers(path)
    assert len(back) == 2
    for a, b in zip(layers, back):
        assert a.shape == b.shape
        assert np.array_equal(a, b)


def test_round_trip_from_float64_within_f32_precision(tmp_path, rng):
    layer = rng.standard_normal((4, 4, 2))
    path = tmp_path / "x.mlhf"
    mlhf.write_layers(path, [layer])
    back = mlhf.read_layers(path)[0]
    assert np.allclose(back, layer, atol=1e-6)


def test_empty_file_is_format_error(tmp_path):
    path = tmp_path / "empty.mlhf"
    path.write_bytes(b"")
    with pytest.raises(FormatError):
        mlhf.read_layers(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.mlhf"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(FormatError):
        mlhf.read_layers(path)


def test_truncated_payload(tmp_path, rng):
    path = tmp_path / "trunc.mlhf"
    mlhf.write_layers(path, [rng.standard_normal((4, 4, 2)).astype(np.float32)])
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError):
        mlhf.read_layers(path)


def test_zero_spatial_size_rejected(tmp_path):
    import struct
    path = tmp_path / "zero.mlhf"
    path.write_bytes(struct.pack("<4sII", b"MLHF", 1, 1)
                     + struct.pack("<III", 0, 4, 2))
    with pytest.raises(FormatError):
        mlhf.read_layers(path)


def test_trailing_garbage_rejected(tmp_path, rng):
    path = tmp_path / "trail.mlhf"
    mlhf.write_layers(path, [rng.standard_normal((2, 2, 1)).astype(np.float32)])
    path.write_bytes(path.read_bytes() + b"\x00\x00")
    with pytest.raises(FormatError):
        mlhf.read_layers(path)


def test_load_deep_layers_resizes_to_grid(tmp_path, rng):
    layers = [rng.standard_normal((14, 14, 256)).astype(np.float32),
              rng.standard_normal((7, 7, 512)).astype(np.float32),
              rng.standard_normal((4, 4, 512)).astype(np.float32)]
    path = tmp_path / mlhf.frame_filename(3)
    mlhf.write_layers(path, layers)
    loaded = load_deep_layers(path, (10, 12))
    assert [l.data.shape for l in loaded] == [(10, 12, 256), (10, 12, 512),
                                              (10, 12, 512)]
    assert [l.layer_id for l in loaded] == [1, 2, 3]
    assert all(np.all(np.isfinite(l.data)) for l in loaded)
