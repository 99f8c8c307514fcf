import csv
import io
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from qttdft import formats
from qttdft.aqft_mpo import assemble_aqft_mpo
from qttdft.cli import main, parse_range, UsageError
from qttdft.qft_mpo import assemble_qft_mpo
from qttdft.qtt_engine import Order, dense_to_mps, mps_to_dense, plane_wave_mps

from conftest import crandn


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# --- formats ---------------------------------------------------------------


@pytest.mark.parametrize("mpo", [assemble_qft_mpo(5, 7), assemble_aqft_mpo(6, 2), assemble_qft_mpo(3, 4, d=3)])
def test_mpo_roundtrip_bit_exact(mpo, tmp_path):
    path = tmp_path / "m.json"
    formats.write_mpo(path, mpo)
    back = formats.read_mpo(path)
    assert (back.n, back.d, back.kind, back.param) == (mpo.n, mpo.d, mpo.kind, mpo.param)
    for a, b in zip(mpo.cores, back.cores):
        assert a.shape == b.shape
        assert a.tobytes() == b.tobytes()


def test_mpo_document_layout():
    doc = formats.mpo_to_dict(assemble_qft_mpo(3, 2))
    assert doc["format"] == "qttdft-mpo-v1"
    assert doc["cores"][1]["shape"] == [3, 2, 2, 3]
    # row-major over (l, sigma, tau, r)
    core = assemble_qft_mpo(3, 2).cores[1]
    re, im = doc["cores"][1]["data"][1 * 12 + 1 * 6 + 1 * 3 + 2]
    assert complex(re, im) == core[1, 1, 1, 2]


def test_vector_roundtrip_bit_exact(rng, tmp_path):
    v = crandn(rng, 32)
    formats.write_json(tmp_path / "v.json", formats.vec_to_dict(v, 2, Order.LSB_FIRST))
    back, order, d = formats.vector_from_dict(formats.read_json(tmp_path / "v.json"))
    assert back.tobytes() == v.tobytes() and order is Order.LSB_FIRST and d == 2
    m = dense_to_mps(v)
    formats.write_json(tmp_path / "m.json", formats.mps_to_dict(m))
    back, order, _ = formats.vector_from_dict(formats.read_json(tmp_path / "m.json"))
    assert all(a.tobytes() == b.tobytes() for a, b in zip(m.cores, back.cores))


def test_bad_format_rejected():
    with pytest.raises(formats.FormatError):
        formats.mpo_from_dict({"format": "nope"})
    with pytest.raises(formats.FormatError):
        formats.vector_from_dict({"format": "nope"})


# --- build -----------------------------------------------------------------


def test_build_chebyshev(capsys, tmp_path):
    out = tmp_path / "f.mpo.json"
    code, stdout, _ = run(capsys, "build", "--n", 16, "--rank", 12, "--out", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["cores"]) == 16
    assert doc["cores"][1]["shape"] == [13, 2, 2, 13]
    summary = json.loads(stdout)
    assert summary["bond_dimension"] == 13 and summary["bound"] > 0


def test_build_aqft(capsys, tmp_path):
    out = tmp_path / "a.mpo.json"
    assert run(capsys, "build", "--n", 8, "--aqft-b", 3, "--out", out)[0] == 0
    assert json.loads(out.read_text())["cores"][1]["shape"] == [8, 2, 2, 8]


def test_build_rejects_both_flags(capsys):
    code, _, err = run(capsys, "build", "--n", 8, "--rank", 4, "--aqft-b", 2)
    assert code == 2 and "exactly one" in err


def test_build_k1_reports_no_bound(capsys):
    code, stdout, _ = run(capsys, "build", "--n", 4, "--rank", 1)
    assert code == 0
    assert json.loads(stdout)["bound_note"] == "bound unavailable"


def test_build_large_is_fast(capsys, tmp_path):
    t0 = time.perf_counter()
    assert run(capsys, "build", "--n", 64, "--rank", 32, "--out", tmp_path / "big.json")[0] == 0
    assert time.perf_counter() - t0 < 1.0


# --- apply -----------------------------------------------------------------


def _write_vec(path, v, order=Order.LSB_FIRST):
    formats.write_json(path, formats.vec_to_dict(v, 2, order))


def _read_vec(path):
    v, order, _ = formats.vector_from_dict(formats.read_json(path))
    return v, order


def test_apply_delta_and_plane_wave(capsys, tmp_path):
    n, N = 8, 256
    mpo = tmp_path / "f.mpo.json"
    run(capsys, "build", "--n", n, "--rank", 12, "--out", mpo)
    e0 = np.zeros(N, dtype=complex)
    e0[0] = 1
    _write_vec(tmp_path / "d.json", e0)
    assert run(capsys, "apply", "--mpo", mpo, "--input", tmp_path / "d.json", "--out", tmp_path / "o.json", "--tol", 1e-12)[0] == 0
    out, order = _read_vec(tmp_path / "o.json")
    assert order is Order.MSB_FIRST
    assert np.abs(out - 1).max() <= 1e-4

    wave = np.exp(2j * np.pi * 3 * np.arange(N) / N)
    _write_vec(tmp_path / "w.json", wave)
    run(capsys, "apply", "--mpo", mpo, "--input", tmp_path / "w.json", "--out", tmp_path / "o2.json")
    out, _ = _read_vec(tmp_path / "o2.json")
    assert abs(out[3] - N) <= N * 1e-4
    assert np.abs(np.delete(out, 3)).max() <= N * 1e-4


def test_apply_single_site(capsys, tmp_path):
    run(capsys, "build", "--n", 1, "--rank", 4, "--out", tmp_path / "m.json")
    a, b = 2.0 - 1j, 0.5j
    _write_vec(tmp_path / "v.json", np.array([a, b]))
    run(capsys, "apply", "--mpo", tmp_path / "m.json", "--input", tmp_path / "v.json", "--out", tmp_path / "o.json")
    out, _ = _read_vec(tmp_path / "o.json")
    np.testing.assert_allclose(out, [a + b, a - b], atol=1e-15)


def test_apply_mps_input_and_output(capsys, tmp_path):
    n = 6
    run(capsys, "build", "--n", n, "--rank", 12, "--out", tmp_path / "m.json")
    formats.write_json(tmp_path / "in.json", formats.mps_to_dict(plane_wave_mps(n, 5)))
    code, stdout, _ = run(
        capsys, "apply", "--mpo", tmp_path / "m.json", "--input", tmp_path / "in.json",
        "--out", tmp_path / "o.json", "--mps-output", "--normalize",
    )
    assert code == 0 and json.loads(stdout)["format"] == "qtt-mps-v1"
    m, order, _ = formats.vector_from_dict(formats.read_json(tmp_path / "o.json"))
    assert order is Order.MSB_FIRST
    out = mps_to_dense(m)
    assert abs(out[5] - 8.0) <= 1e-4  # N / sqrt(N)


def test_apply_convention_mismatch(capsys, tmp_path):
    run(capsys, "build", "--n", 4, "--rank", 6, "--out", tmp_path / "m.json")
    bad = dense_to_mps(np.ones(16), Order.MSB_FIRST)
    formats.write_json(tmp_path / "in.json", formats.mps_to_dict(bad))
    code, _, err = run(capsys, "apply", "--mpo", tmp_path / "m.json", "--input", tmp_path / "in.json", "--out", tmp_path / "o.json")
    assert code == 2 and "LSB_FIRST" in err


def test_apply_site_count_mismatch(capsys, tmp_path):
    run(capsys, "build", "--n", 4, "--rank", 6, "--out", tmp_path / "m.json")
    _write_vec(tmp_path / "v.json", np.ones(32))
    code, _, err = run(capsys, "apply", "--mpo", tmp_path / "m.json", "--input", tmp_path / "v.json", "--out", tmp_path / "o.json")
    assert code == 2 and "mismatch" in err


# --- verify ------------------------------------------------------------------


def _report(capsys, *argv):
    code, stdout, _ = run(capsys, "verify", *argv)
    return code, json.loads(stdout)


def test_verify_entrywise(capsys):
    code, rep = _report(capsys, "--mode", "entrywise", "--n", 8, "--rank", 8)
    assert code == 0 and rep["pass"]
    assert rep["observed_max_error"] <= rep["bound"] == pytest.approx(2.098, abs=1e-3)
    assert rep["details"]["exhaustive"]


def test_verify_entrywise_sampled_deterministic(capsys):
    a = _report(capsys, "--mode", "entrywise", "--n", 20, "--rank", 12, "--samples", 2000)[1]
    b = _report(capsys, "--mode", "entrywise", "--n", 20, "--rank", 12, "--samples", 2000)[1]
    assert a["observed_max_error"] == b["observed_max_error"]
    assert a["pass"] and not a["details"]["exhaustive"]


def test_verify_entrywise_infeasible(capsys):
    code, _, err = run(capsys, "verify", "--mode", "entrywise", "--n", 13, "--rank", 8)
    assert code == 2 and "--samples" in err


def test_verify_empirical_bound(capsys):
    code, rep = _report(capsys, "--mode", "entrywise", "--n", 6, "--rank", 8, "--empirical-bound")
    assert code == 0 and rep["bound"] < 0.36


def test_verify_aqft_exact(capsys):
    code, rep = _report(capsys, "--mode", "aqft-exact", "--n", 6, "--b", 3)
    assert code == 0 and rep["observed_max_error"] <= 1e-13


def test_verify_aqft_error(capsys):
    code, rep = _report(capsys, "--mode", "aqft-error", "--n", 8, "--b", 3)
    assert code == 0 and rep["observed_max_error"] <= rep["bound"]


def test_verify_unfolding(capsys):
    code, rep = _report(capsys, "--mode", "unfolding", "--n", 6, "--rank", 8)
    assert code == 0
    assert sorted(rep["details"]["per_m"]) == ["1", "2", "3", "4", "5"]
    assert all(v <= 6.44e-3 for v in rep["details"]["per_m"].values())


def test_verify_blocks_and_interp(capsys):
    code, rep = _report(capsys, "--mode", "blocks", "--n", 5)
    assert code == 0 and rep["observed_max_error"] <= 1e-11
    code, rep = _report(capsys, "--mode", "interp", "--rank", 8)
    assert code == 0 and rep["observed_max_error"] <= rep["bound"]


def test_verify_fail_exit_code(capsys, monkeypatch):
    import qttdft.cli as cli

    monkeypatch.setattr(cli, "AQFT_EXACT_TOL", 0.0)
    code, _, _ = run(capsys, "verify", "--mode", "aqft-exact", "--n", 6, "--b", 3)
    assert code == 1


def test_verify_missing_flags(capsys):
    assert run(capsys, "verify", "--mode", "aqft-exact", "--n", 6)[0] == 2
    assert run(capsys, "verify", "--mode", "entrywise", "--rank", 4)[0] == 2


# --- table -------------------------------------------------------------------


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_table_chebyshev(capsys):
    code, out, _ = run(capsys, "table", "--n", 8, "--ranks", "4:16:4", "--format", "csv")
    rows = _rows(out)
    assert code == 0 and [r["K"] for r in rows] == ["4", "8", "12", "16"]
    errs = [float(r["observed_max_error"]) for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert all(float(r["observed_max_error"]) <= float(r["theorem_bound"]) for r in rows)


def test_table_aqft(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QTTDFT_THREADS", "1")
    out = tmp_path / "t.csv"
    code, _, err = run(capsys, "table", "--n", 8, "--ranks", "2:8:2", "--aqft", "--out", out)
    rows = _rows(out.read_text())
    assert code == 0 and "b=8" in err
    errs = [float(r["observed_max_error"]) for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert all(float(r["observed_max_error"]) <= float(r["aqft_bound"]) for r in rows)


def test_table_empty_range(capsys):
    assert run(capsys, "table", "--n", 8, "--ranks", "8:4")[0] == 2
    with pytest.raises(UsageError):
        parse_range("a:b")


def test_entry_point_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qttdft", "verify", "--mode", "aqft-exact", "--n", "4", "--b", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["pass"] is True
    proc = subprocess.run([sys.executable, "-m", "qttdft", "table", "--n", "4", "--ranks", "3:2"], capture_output=True, text=True)
    assert proc.returncode == 2
