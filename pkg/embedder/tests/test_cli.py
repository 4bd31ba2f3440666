from __future__ import annotations

import json
import struct

import pytest
from click.testing import CliRunner

from coverembed.backends import DIM, HashBackend, load_backend
from coverembed.cli import main


@pytest.fixture()
def manifest(tmp_path):
    entries = []
    for i in range(3):
        image = tmp_path / f"cover_{i}.ppm"
        image.write_bytes(b"P6\n1 1\n255\n" + bytes([i, i, i]))
        entries.append({"id": f"item_{i}", "path": str(image)})
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(entries))
    return path


class TestEmbedImages:
    def test_header_counts(self, manifest, tmp_path):
        out = tmp_path / "vecs.bin"
        result = CliRunner().invoke(
            main, ["embed-images", "--manifest", str(manifest), "--out", str(out), "--backend", "hash"]
        )
        assert result.exit_code == 0, result.output
        raw = out.read_bytes()
        count, dim = struct.unpack_from("<II", raw, 8)
        assert (count, dim) == (3, DIM)
        assert len(raw) == 16 + 3 * DIM * 4

    def test_deterministic_reemission(self, manifest, tmp_path):
        runner = CliRunner()
        out_a, out_b = tmp_path / "a.bin", tmp_path / "b.bin"
        for out in (out_a, out_b):
            result = runner.invoke(
                main, ["embed-images", "--manifest", str(manifest), "--out", str(out), "--backend", "hash"]
            )
            assert result.exit_code == 0, result.output
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_duplicate_id_rejected_before_encoding(self, tmp_path):
        image = tmp_path / "x.ppm"
        image.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        manifest = tmp_path / "manifest.json"
        manifest.write_text(
            json.dumps([{"id": "dup", "path": str(image)}, {"id": "dup", "path": str(image)}])
        )
        result = CliRunner().invoke(
            main, ["embed-images", "--manifest", str(manifest), "--out", str(tmp_path / "v.bin"), "--backend", "hash"]
        )
        assert result.exit_code != 0
        assert "duplicate" in result.output
        assert not (tmp_path / "v.bin").exists()

    def test_unreadable_image_listed_and_nonzero_exit(self, tmp_path):
        manifest = tmp_path / "manifest.json"
        manifest.write_text(
            json.dumps(
                [
                    {"id": "gone_1", "path": str(tmp_path / "missing_1.ppm")},
                    {"id": "gone_2", "path": str(tmp_path / "missing_2.ppm")},
                ]
            )
        )
        result = CliRunner().invoke(
            main, ["embed-images", "--manifest", str(manifest), "--out", str(tmp_path / "v.bin"), "--backend", "hash"]
        )
        assert result.exit_code == 1
        assert "gone_1" in result.output and "gone_2" in result.output
        assert not (tmp_path / "v.bin").exists()


class TestEmbedText:
    def test_single_row_output(self, tmp_path):
        out = tmp_path / "q.bin"
        result = CliRunner().invoke(
            main,
            ["embed-text", "A chair assembly manual cover page", "--out", str(out), "--backend", "hash"],
        )
        assert result.exit_code == 0, result.output
        count, dim = struct.unpack_from("<II", out.read_bytes(), 8)
        assert (count, dim) == (1, DIM)

    def test_empty_query_is_usage_error(self, tmp_path):
        result = CliRunner().invoke(main, ["embed-text", "  ", "--out", str(tmp_path / "q.bin"), "--backend", "hash"])
        assert result.exit_code == 2

    def test_deterministic(self, tmp_path):
        runner = CliRunner()
        outs = []
        for name in ("q1.bin", "q2.bin"):
            out = tmp_path / name
            runner.invoke(main, ["embed-text", "A chair assembly manual cover page", "--out", str(out), "--backend", "hash"])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestBackends:
    def test_hash_backend_distinguishes_content(self, tmp_path):
        a = tmp_path / "a.ppm"
        b = tmp_path / "b.ppm"
        a.write_bytes(b"P6\n1 1\n255\nAAA")
        b.write_bytes(b"P6\n1 1\n255\nBBB")
        rows = HashBackend().encode_images([a, b])
        assert rows.shape == (2, DIM)
        assert not (rows[0] == rows[1]).all()

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            load_backend("nope")

    def test_clip_backend_when_weights_available(self, tmp_path):
        pytest.importorskip("transformers")
        from coverembed.backends import BackendUnavailableError, ClipBackend

        try:
            backend = ClipBackend()
        except BackendUnavailableError as exc:
            pytest.skip(f"clip weights unavailable: {exc}")
        vec = backend.encode_text("A chair assembly manual cover page")
        assert vec.shape == (1, DIM)
