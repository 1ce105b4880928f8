from fractions import Fraction

import polars as pl
import pytest

from codd_lab.artifacts import BinaryArtifact, CsvArtifact, JsonArtifact
from codd_lab.artifacts.schemas import (
    load_distribution,
    load_partition,
    load_program,
    load_relevance,
    load_tree,
    read_codd_binary,
)
from codd_lab.artifacts.writers import dumps_json
from codd_lab.calculus.dtree import Leaf, Node
from codd_lab.calculus.encoding import encode
from codd_lab.calculus.expr import decide, leaf
from codd_lab.core.exceptions import FileOperationError, InputFileError


class TestLoaders:
    def test_distribution(self, write_json):
        d = load_distribution(write_json("d.json", {"n": 1, "mass": ["1/4", "0.75"]}))
        assert d.mass == (Fraction(1, 4), Fraction(3, 4))

    def test_partition_labels_are_canonicalized(self, write_json):
        p = load_partition(write_json("p.json", {"n": 2, "cell": [5, 5, 2, 9]}))
        assert p.cell == (0, 0, 1, 2)

    def test_tree(self, write_json):
        tree = {"bit": 0, "zero": {"leaf": 0}, "one": {"leaf": 1}}
        t, space = load_tree(write_json("t.json", {"n": 2, "tree": tree}))
        assert t == Node(0, Leaf(0), Leaf(1))
        assert space.n == 2

    def test_relevance(self, write_json):
        rho = load_relevance(write_json("rho.json", {"n": 2, "overrides": [[3, 0, "1/2"]]}))
        assert rho.weight(0, 3) == Fraction(1, 2)
        assert rho.weight(0, 1) == 0

    def test_masses_not_summing_to_one_name_the_file(self, write_json):
        path = write_json("d.json", {"n": 1, "mass": ["1/2", "1/4"]})
        with pytest.raises(InputFileError, match="d.json") as info:
            load_distribution(path)
        assert info.value.offset is None

    def test_json_syntax_error_carries_offset(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"n": 1, "mass": [}', encoding="utf-8")
        with pytest.raises(InputFileError) as info:
            load_distribution(path)
        assert info.value.offset == 18

    def test_schema_violation_names_the_field(self, write_json):
        with pytest.raises(InputFileError, match="n: "):
            load_partition(write_json("p.json", {"n": 0, "cell": []}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileError, match="cannot read file"):
            load_distribution(tmp_path / "absent.json")

    def test_tree_querying_missing_bit(self, write_json):
        tree = {"bit": 4, "zero": {"leaf": 0}, "one": {"leaf": 1}}
        with pytest.raises(InputFileError):
            load_tree(write_json("t.json", {"n": 2, "tree": tree}))


class TestLoadProgram:
    def test_labeling(self, write_json):
        view = load_program(write_json("f.json", {"n": 2, "labels": [0, 1, 1, 0]}))
        assert len(view.dits) == 4

    def test_tree(self, write_json):
        tree = {"bit": 1, "zero": {"leaf": 0}, "one": {"leaf": 1}}
        view = load_program(write_json("f.json", {"n": 2, "tree": tree}))
        assert view.labeling.labels == (0, 1, 0, 1)

    def test_encoded_codd(self, write_json):
        encoded = encode(decide(0, leaf("0"), leaf("1")))
        by_hex = load_program(write_json("h.json", {"n": 2, "hex": encoded.to_bytes().hex()}))
        by_bits = load_program(write_json("b.json", {"n": 2, "bits": str(encoded.bits)}))
        assert by_hex.labeling == by_bits.labeling
        assert by_hex.labeling.labels == (0, 0, 1, 1)

    def test_encoded_codd_needs_n(self, write_json):
        with pytest.raises(InputFileError, match="needs 'n'"):
            load_program(write_json("h.json", {"hex": "0001"}))

    def test_exactly_one_encoding(self, write_json):
        with pytest.raises(InputFileError, match="exactly one"):
            load_program(write_json("h.json", {"n": 1, "hex": "00", "bits": "0"}))

    def test_bad_encoding_reports_decode_offset(self, write_json):
        with pytest.raises(InputFileError, match="decode error at offset 0") as info:
            load_program(write_json("h.json", {"n": 1, "hex": ""}))
        assert info.value.offset == 0

    def test_unknown_shape(self, write_json):
        with pytest.raises(InputFileError, match="expected one of"):
            load_program(write_json("x.json", {"n": 1}))


class TestArtifacts:
    def test_json_is_canonical(self, tmp_path):
        path = JsonArtifact(tmp_path / "out" / "r.json", {"b": 1, "a": [1, 2]}).write()
        assert path.read_text(encoding="utf-8") == dumps_json({"a": [1, 2], "b": 1})
        assert path.read_text(encoding="utf-8").endswith("}\n")

    def test_csv(self, tmp_path):
        frame = pl.DataFrame({"step": [0, 1], "size": [0, 1]})
        path = CsvArtifact(tmp_path / "t.csv", frame).write()
        assert path.read_text(encoding="utf-8") == "step,size\n0,0\n1,1\n"

    def test_binary_round_trip_through_reader(self, tmp_path):
        e = decide(1, leaf("1"), leaf("0"))
        path = BinaryArtifact(tmp_path / "e.bin", encode(e).to_bytes()).write()
        assert read_codd_binary(path) is e

    def test_no_temporary_files_remain(self, tmp_path):
        JsonArtifact(tmp_path / "r.json", {}).write()
        assert [p.name for p in tmp_path.iterdir()] == ["r.json"]

    def test_unwritable_destination(self, tmp_path):
        (tmp_path / "taken").mkdir()
        with pytest.raises(FileOperationError):
            JsonArtifact(tmp_path / "taken", {}).write()
        assert [p.name for p in tmp_path.iterdir()] == ["taken"]

    def test_empty_binary_is_a_decode_error(self, tmp_path):
        path = tmp_path / "empty.bin"
        path.write_bytes(b"")
        with pytest.raises(InputFileError, match="decode error at offset 0"):
            read_codd_binary(path)
