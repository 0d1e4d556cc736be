import numpy as np
import pytest

from dami.core import ObjectMN, ValidationError
from dami.datasets import random_cloud
from dami.io import label_from_filename, provenance, read_object, read_table, write_object, write_table


def test_object_roundtrip_exact(tmp_path):
    obj = random_cloud(0, 12)
    path = tmp_path / "a.csv"
    write_object(path, obj, comment=provenance(seed=1))
    text = path.read_text()
    assert text.startswith("# dami ") and "seed=1" in text.splitlines()[0]
    assert text.splitlines()[1] == "x,y,z,r,g,b"
    assert read_object(path) == obj


def test_weighted_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    obj = ObjectMN(rng.normal(size=(5, 2)), rng.normal(size=(5, 1)), [1, 2, 3, 4, 5])
    path = tmp_path / "w.csv"
    write_object(path, obj)
    assert path.read_text().splitlines()[0] == "s1,s2,c1,w"
    assert read_object(path, 2, 1) == obj


@pytest.mark.parametrize("body, match", [
    ("x,y,z,r,g,b\n1,2,3,4,5,oops\n", r":2: non-numeric value 'oops' in column 6 \(b\)"),
    ("x,y,z,r,g,b\n1,2,3,4,5\n", ":2: expected 6 cells"),
    ("x,y,z,r,g\n1,2,3,4,5\n", ":1: expected 6 columns"),
    ("x,y,z,r,g,b\n", "no data rows"),
    ("# only a comment\n", "no header"),
    ("x,y,z,r,g,b\n1,2,3,4,5,nan\n", "non-finite"),
])
def test_read_errors_locate_problem(tmp_path, body, match):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ValidationError, match=match):
        read_object(path)


def test_table_roundtrip(tmp_path):
    rows = [{"a": 1, "b": 0.1}, {"a": 2, "b": float("nan")}]
    text = write_table(tmp_path / "t.csv", rows, comment="# hdr")
    assert text.splitlines()[:2] == ["# hdr", "a,b"]
    back = read_table(tmp_path / "t.csv")
    assert back[0] == {"a": "1", "b": "0.1"} and back[1]["b"] == "nan"


def test_label_from_filename():
    assert label_from_filename("/x/cat_003.csv") == "cat"
    assert label_from_filename("dog.csv") == "dog"
