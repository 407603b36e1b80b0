import json
import struct
import pytest
import numpy as np
from atvprune.numerics import Rng
from atvprune.errors import CalibFormatError, StorageError
from atvprune.model import ModelConfig, ToyTransformer
from atvprune.pruner import PruneReport
from atvprune.checker import CalibSchemaChecker, CheckerPipeline, CheckpointHeaderChecker
from atvprune.storage import (
    MAGIC,
    decode_checkpoint,
    decode_header,
    encode_checkpoint,
    load_report,
    parse_calib,
    read_calib,
    read_checkpoint,
    read_csv,
    report_schema,
    to_json_text,
    write_calib,
    write_checkpoint,
    write_csv,
    write_json,
)
from conftest import make_model, make_samples


def test_checkpoint_round_trip_is_bitwise():
    rng = Rng(31)
    for i in range(20):
        draws = rng.next_u64(4) % np.uint64(4)
        n_heads = 1 + int(draws[0])
        config = ModelConfig(
            d_model=n_heads * (1 + int(draws[1])),
            n_blocks=1 + int(draws[2]),
            n_heads=n_heads,
            d_ffn=4 + 4 * int(draws[3]),
        )
        model = ToyTransformer.random(config, rng.spawn("model", i))
        data = encode_checkpoint(model)
        restored = decode_checkpoint(data)
        assert restored.config.to_dict() == config.to_dict()
        for a, b in zip(model.blocks, restored.blocks):
            for name in ("w_q", "w_k", "w_v", "w_o", "w_up", "w_down", "norm1", "norm2"):
                assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
        assert encode_checkpoint(restored) == data


def test_checkpoint_layout(tiny_model):
    data = encode_checkpoint(tiny_model)
    magic, version, header_len = struct.unpack_from("<4sIQ", data, 0)
    assert (magic, version) == (MAGIC, 1)
    header, start = decode_header(data)
    assert start == 16 + header_len
    offsets = [entry["offset"] for entry in header["tensors"]]
    assert offsets[0] == 0 and offsets == sorted(offsets)
    assert len(data) - start == sum(
        4 * int(np.prod(entry["shape"])) for entry in header["tensors"]
    )


def _expect_storage_error(data, code):
    with pytest.raises(StorageError) as e:
        decode_checkpoint(data)
    assert e.value.code == code
    assert e.value.exit_code == 4


def test_checkpoint_errors(tiny_model):
    data = encode_checkpoint(tiny_model)
    _expect_storage_error(b"NOPE" + data[4:], "bad-magic")
    _expect_storage_error(b"AT", "bad-magic")
    _expect_storage_error(data[:4] + struct.pack("<I", 2) + data[8:], "bad-version")
    _expect_storage_error(data[:-1], "truncated-payload")
    _, start = decode_header(data)
    _expect_storage_error(data[: start - 3], "truncated-payload")

    header, start = decode_header(data)
    header["tensors"][-1]["offset"] = len(data)
    _expect_storage_error(_rebuild(header, data[start:]), "truncated-payload")
    header["tensors"][1]["offset"] = 0
    _expect_storage_error(_rebuild(header, data[start:]), "bad-header")
    _expect_storage_error(_rebuild({"config": {}}, b""), "bad-header")


def _rebuild(header, payload):
    raw = json.dumps(header).encode("utf-8")
    return struct.pack("<4sIQ", MAGIC, 1, len(raw)) + raw + payload


@pytest.mark.parametrize(
    "mangle",
    [
        lambda header: header["tensors"].append(7),
        lambda header: header.update(tensors="w_q"),
        lambda header: header.update(tensors=None),
        lambda header: header["tensors"][0].update(shape=None),
        lambda header: header["tensors"][0].update(shape=[float(d) for d in header["tensors"][0]["shape"]]),
        lambda header: header["tensors"][0].update(offset=True),
    ],
)
def test_malformed_tensor_table_is_bad_header(tmp_path, tiny_model, mangle):
    data = encode_checkpoint(tiny_model)
    header, start = decode_header(data)
    mangle(header)
    _expect_storage_error(_rebuild(header, data[start:]), "bad-header")
    path = tmp_path / "mangled.atvc"
    path.write_bytes(_rebuild(header, data[start:]))
    assert [issue["code"] for issue in CheckpointHeaderChecker().check(str(path))] == ["bad-header"]


def test_calib_out_of_range_integer_is_a_line_issue():
    good = json.dumps({"id": "a", "modality": ["text"], "embeddings": [[1, 2]]})
    huge = '{"id": "b", "modality": ["text"], "embeddings": [[1, ' + str(10**400) + "]]}"
    samples, issues = parse_calib([good, huge])
    assert [s.id for s in samples] == ["a"]
    assert [issue["line"] for issue in issues] == [2]
    assert "float range" in issues[0]["message"]


def test_checkpoint_files(tmp_path, tiny_model):
    path = tmp_path / "model.atvc"
    write_checkpoint(str(path), tiny_model)
    assert path.read_bytes() == encode_checkpoint(tiny_model)
    assert read_checkpoint(str(path)).layer_keys() == tiny_model.layer_keys()
    with pytest.raises(StorageError) as e:
        read_checkpoint(str(tmp_path / "missing.atvc"))
    assert e.value.code == "io"


def test_checkpoint_checker(tmp_path, tiny_model):
    good = tmp_path / "good.atvc"
    good.write_bytes(encode_checkpoint(tiny_model))
    assert CheckpointHeaderChecker().check(str(good)) == []
    short = tmp_path / "short.atvc"
    short.write_bytes(encode_checkpoint(tiny_model)[:-8])
    issues = CheckpointHeaderChecker().check(str(short))
    assert [issue["code"] for issue in issues] == ["truncated-payload"]
    bad = tmp_path / "bad.atvc"
    bad.write_bytes(b"XXXX" + encode_checkpoint(tiny_model)[4:])
    assert CheckpointHeaderChecker().check(str(bad))[0]["code"] == "bad-magic"


def test_calib_round_trip(tmp_path, tiny_samples):
    path = tmp_path / "calib.jsonl"
    write_calib(str(path), tiny_samples)
    assert len(path.read_text().splitlines()) == len(tiny_samples)
    restored = read_calib(str(path), d_model=8)
    for a, b in zip(tiny_samples, restored):
        assert a.id == b.id and a.modality == b.modality
        assert np.array_equal(a.embeddings, b.embeddings)


def test_calib_issues_are_line_numbered():
    good = json.dumps({"id": "a", "modality": ["visual", "text"], "embeddings": [[1, 2], [3, 4]]})
    lines = [
        good,
        "{not json",
        "",
        json.dumps({"id": "b", "modality": ["visual"], "embeddings": [[1, 2]]}),
        json.dumps({"id": "c", "modality": ["text"], "embeddings": [[1, 2, 3]]}),
        good,
        json.dumps({"id": "d", "modality": ["audio"], "embeddings": [[1, 2]]}),
        json.dumps({"id": "e", "modality": ["text", "text"], "embeddings": [[1, 2]]}),
    ]
    samples, issues = parse_calib(lines)
    assert [s.id for s in samples] == ["a"]
    assert [issue["line"] for issue in issues] == [2, 4, 5, 6, 7, 8]
    assert "text token" in issues[1]["message"]
    assert "width" in issues[2]["message"]
    assert "duplicate" in issues[3]["message"]
    assert parse_calib([]) == ([], [{"line": 0, "column": 0, "message": "no samples"}])


def test_calib_errors(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a"}\n')
    with pytest.raises(CalibFormatError) as e:
        read_calib(str(path))
    assert e.value.exit_code == 2
    assert e.value.issues[0]["line"] == 1
    issues = CalibSchemaChecker().check(str(path))
    assert issues[0]["code"] == "calib-schema"
    with pytest.raises(StorageError):
        read_calib(str(tmp_path / "missing.jsonl"))


def test_checker_pipeline_stops_at_first_failure(tmp_path):
    path = tmp_path / "calib.jsonl"
    path.write_text("[]\n")
    pipeline = CheckerPipeline().add_checker(CalibSchemaChecker(), CheckpointHeaderChecker())
    assert pipeline.names == ["calib-schema", "checkpoint-header"]
    issues = pipeline.run(str(path))
    assert issues and all(issue["checker"] == "calib-schema" for issue in issues)


def _report(**overrides):
    data = dict(
        config={"policy": {"kind": "atv"}, "seed": None},
        pattern={"kind": "unstructured", "rho": 0.5},
        comparison_group="per_output_row",
        propagation="sequential",
        n_samples=4,
        blocks=[],
        global_sparsity=0.123456789123,
    )
    data.update(overrides)
    return PruneReport(**data)


def test_json_reports(tmp_path):
    text = to_json_text({"a": 0.1234567891234, "b": [1.0 / 3.0, 2], "c": True})
    assert json.loads(text) == {"a": 0.123456789, "b": [0.333333333, 2], "c": True}
    path = tmp_path / "report.json"
    write_json(str(path), _report())
    loaded = load_report(str(path))
    assert loaded.global_sparsity == 0.123456789
    assert loaded.n_samples == 4
    schema = report_schema()
    assert {"blocks", "global_sparsity", "flags"} <= set(schema["properties"])


def test_csv_tables(tmp_path):
    path = tmp_path / "rows.csv"
    rows = [{"block": 0, "s_bar": 0.1234567891234, "extra": "x"}, {"block": 1, "s_bar": 2.0}]
    assert write_csv(str(path), rows, columns=["block", "s_bar"]) == 2
    assert read_csv(str(path)) == [
        {"block": "0", "s_bar": "0.123456789"},
        {"block": "1", "s_bar": "2.0"},
    ]
    assert path.read_text().splitlines()[0] == "block,s_bar"
