import json

import numpy as np
import pytest

from nullproj.errors import InvalidParameterError
from nullproj.io import (read_descriptor, read_matrix_csv, read_omega_csv, read_vector_csv,
                         write_descriptor, write_matrix_csv, write_omega_csv)
from nullproj.rng import make_rng
from nullproj.signals import gen_sensing


def test_matrix_roundtrip_is_exact(tmp_path):
    M = make_rng(0).standard_normal((4, 5)) * 10.0 ** make_rng(1).integers(-200, 200, (4, 5))
    write_matrix_csv(tmp_path / "m.csv", M)
    assert np.array_equal(read_matrix_csv(tmp_path / "m.csv"), M)


def test_vector_roundtrip(tmp_path):
    v = make_rng(2).standard_normal(7)
    write_matrix_csv(tmp_path / "v.csv", v)
    assert (tmp_path / "v.csv").read_text().count("\n") == 7
    assert np.array_equal(read_vector_csv(tmp_path / "v.csv"), v)
    (tmp_path / "row.csv").write_text("1.0,2.0,3.0\n")
    assert read_vector_csv(tmp_path / "row.csv").tolist() == [1.0, 2.0, 3.0]


def test_matrix_errors(tmp_path):
    (tmp_path / "empty.csv").write_text("")
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    write_matrix_csv(tmp_path / "sq.csv", np.eye(2))
    with pytest.raises(InvalidParameterError):
        read_matrix_csv(tmp_path / "empty.csv")
    with pytest.raises(InvalidParameterError):
        read_matrix_csv(tmp_path / "ragged.csv")
    with pytest.raises(InvalidParameterError):
        read_vector_csv(tmp_path / "sq.csv")
    (tmp_path / "text.csv").write_text("a,b\n")
    with pytest.raises(InvalidParameterError):
        read_matrix_csv(tmp_path / "text.csv")


def test_omega_roundtrip(tmp_path):
    omega = [(0, 1), (2, 3), (5, 0)]
    write_omega_csv(tmp_path / "o.csv", omega)
    assert read_omega_csv(tmp_path / "o.csv") == omega
    (tmp_path / "none.csv").write_text("")
    (tmp_path / "short.csv").write_text("1\n")
    for name in ("none.csv", "short.csv"):
        with pytest.raises(InvalidParameterError):
            read_omega_csv(tmp_path / name)


@pytest.mark.parametrize("kind", ["gaussian", "random-sampling"])
def test_descriptor_is_one_json_line(tmp_path, kind):
    op = gen_sensing(kind, 6, 12, 3)
    write_descriptor(tmp_path / "op.json", op)
    text = (tmp_path / "op.json").read_text()
    assert text.count("\n") == 1 and isinstance(json.loads(text), dict)
    assert np.array_equal(read_descriptor(tmp_path / "op.json").matrix, op.matrix)
