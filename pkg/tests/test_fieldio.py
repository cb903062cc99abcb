import numpy as np
import pytest

from mtve import fieldio
from mtve.checksums import file_checksum, payload_key, text_checksum
from mtve.errors import VerificationError
from mtve.fields import MultiTimeField, build_grid
from mtve.geometry import SpacetimeKind
from mtve.plotting import heatmap_image, save_heatmap


@pytest.fixture
def field():
    grid = build_grid(SpacetimeKind.minkowski(1), 1.0, 3, 4, 0.5)
    values = np.arange(grid.size, dtype=float) + 0.5j
    return MultiTimeField(grid, values)


def test_payload_layout_is_little_endian_complex128(field, tmp_path):
    header, payload = fieldio.write_field(field, tmp_path, "chi")
    raw = payload.read_bytes()
    assert len(raw) == field.grid.size * 16
    assert np.frombuffer(raw[:16], dtype="<f8").tolist() == [0.0, 0.5]
    text = header.read_text(encoding="utf-8")
    assert "dtype: <c16" in text
    assert "shape: 3,4,3,4" in text


def test_read_field_restores_values_and_grid(field, tmp_path):
    header, _ = fieldio.write_field(field, tmp_path, "chi")
    restored = fieldio.read_field(header)
    assert restored.grid.same_as(field.grid)
    assert np.array_equal(restored.values, field.values)


def test_truncated_payload_is_detected(field, tmp_path):
    header, payload = fieldio.write_field(field, tmp_path, "chi")
    payload.write_bytes(payload.read_bytes()[:-1])
    with pytest.raises(VerificationError) as info:
        fieldio.read_field(header)
    assert "chi.bin" in str(info.value)


def test_missing_header(tmp_path):
    with pytest.raises(FileNotFoundError):
        fieldio.read_header(tmp_path / "chi.hdr")


def test_checksums(tmp_path):
    path = tmp_path / "blob"
    path.write_bytes(b"abc")
    digest, size = file_checksum(path)
    assert size == 3
    assert digest == text_checksum("abc")
    assert payload_key({"b": 1, "a": [1.0, 2j]}) == payload_key({"a": [1.0, 2j], "b": 1})


def test_heatmap_marks_nan_cells_black(tmp_path):
    values = np.array([[0.0, 1.0], [np.nan, 0.5]])
    image = heatmap_image(values, cell=4)
    assert image.size == (8, 8)
    assert image.getpixel((0, 4)) == (0, 0, 0)
    assert save_heatmap(values, tmp_path / "map.png").is_file()
