import numpy as np
import pytest

from flowcontrast.checkpoint import load_checkpoint, save_checkpoint
from flowcontrast.errors import ConfigError, SchemaError
from flowcontrast.flowdata import FeatureSchema
from flowcontrast.kvconfig import parse_kv_text, split_list


class TestKvConfig:
    def test_basic_parse_with_comments(self):
        kv = parse_kv_text("a = 1\n# comment\nb = x, y  # trailing\n\n")
        assert kv == {"a": "1", "b": "x, y"}
        assert split_list(kv["b"]) == ["x", "y"]

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_kv_text("a = 1\na = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_kv_text("just some text\n")


class TestFeatureSchema:
    def test_two_endpoint_form(self):
        schema = FeatureSchema.from_mapping({
            "endpoints": "SRC, DST",
            "numeric": "BYTES",
            "label": "Label",
            "attack": "Attack",
        })
        assert not schema.has_ports
        assert schema.raw_feature_dim == 1

    def test_four_endpoint_form(self):
        schema = FeatureSchema.from_mapping({
            "endpoints": "SRC, SPORT, DST, DPORT",
            "numeric": "BYTES, PKTS",
            "categorical": "PROTO",
            "label": "Label",
            "attack": "Attack",
        })
        assert schema.has_ports
        assert schema.all_columns()[:4] == ["SRC", "SPORT", "DST", "DPORT"]

    def test_three_endpoints_rejected(self):
        with pytest.raises(SchemaError, match="endpoints"):
            FeatureSchema.from_mapping({
                "endpoints": "A, B, C",
                "numeric": "X",
                "label": "L",
                "attack": "K",
            })

    def test_missing_key_rejected(self):
        with pytest.raises(SchemaError, match="label"):
            FeatureSchema.from_mapping({"endpoints": "A, B", "numeric": "X", "attack": "K"})

    def test_column_mapped_twice_rejected(self):
        with pytest.raises(SchemaError, match="more than one role"):
            FeatureSchema(src_ip="A", dst_ip="B", numeric=("A",))

    def test_no_features_rejected(self):
        with pytest.raises(SchemaError, match="feature"):
            FeatureSchema(src_ip="A", dst_ip="B", numeric=())

    def test_round_trip_through_mapping(self):
        schema = FeatureSchema(
            src_ip="S", dst_ip="D", src_port="SP", dst_port="DP",
            numeric=("N1", "N2"), categorical=("C1",),
        )
        again = FeatureSchema.from_mapping(schema.to_mapping())
        assert again == schema


class TestCheckpointErrors:
    def test_not_a_checkpoint_rejected(self, tmp_path):
        path = tmp_path / "junk.npz"
        np.savez(path, data=np.zeros(3))
        with pytest.raises(ConfigError, match="checkpoint"):
            load_checkpoint(path)

    def test_wrong_version_rejected(self, tmp_path, monkeypatch):
        import flowcontrast.checkpoint as cp

        path = tmp_path / "old.npz"
        monkeypatch.setattr(cp, "FORMAT_VERSION", 99)
        save_checkpoint(path, {"w": np.ones(2)}, {})
        monkeypatch.undo()
        with pytest.raises(ConfigError, match="version"):
            load_checkpoint(path)
