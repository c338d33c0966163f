import math

import numpy as np
import pytest

from gridgauge import CSV_HEADER, load_grid
from gridgauge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_quad_count(tmp_path, capsys):
    path = tmp_path / "g.txt"
    code, _, _ = run(capsys, "gen", "--kind", "quad", "--nx", "16", "--ny", "16",
                     "-o", str(path))
    assert code == 0
    grid = load_grid(path)
    assert grid.n_cells == 225


def test_gen_deterministic_bytes(tmp_path, capsys):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    args = ["gen", "--kind", "tri-irregular", "--nx", "33", "--ny", "33",
            "--perturb", "0.3", "--seed", "42"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_quad_ar_spacing(tmp_path, capsys):
    path = tmp_path / "ar.txt"
    code, _, _ = run(capsys, "gen", "--kind", "quad-ar", "--ar", "4",
                     "--nx", "16", "--ny", "16", "-o", str(path))
    assert code == 0
    grid = load_grid(path)
    cell = grid.cells[0]
    xs = grid.nodes[list(cell.vertices), 0]
    ys = grid.nodes[list(cell.vertices), 1]
    assert (xs.max() - xs.min()) / (ys.max() - ys.min()) == pytest.approx(4.0)


def test_gen_bad_perturb(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--kind", "tri-irregular", "--nx", "8",
                       "--ny", "8", "--perturb", "0.7", "-o", str(tmp_path / "x"))
    assert code == 2
    assert "perturb" in err


def test_analyze_stdout_row(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "16", "--ny", "16", "-o", str(path)])
    code, out, _ = run(capsys, "analyze", str(path), "--p", "0",
                       "--stencil", "face")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "quad_16x16"
    assert fields[1] == "225"
    g_avg = float(fields[9])
    corner = math.sqrt(2.0) * (1.0 - math.exp(-1.0))
    assert 0.0 < g_avg <= corner


def test_analyze_rejects_p2(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "4", "--ny", "4", "-o", str(path)])
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(path), "--p", "2"])
    assert exc.value.code == 2


def test_analyze_vtk_export(tmp_path, capsys):
    path = tmp_path / "g.txt"
    vtk = tmp_path / "out.vtk"
    main(["gen", "--kind", "quad", "--nx", "5", "--ny", "5", "-o", str(path)])
    code, _, _ = run(capsys, "analyze", str(path), "--vtk", str(vtk))
    assert code == 0
    text = vtk.read_text()
    assert "SCALARS F_measure double 1" in text
    assert "SCALARS G_measure double 1" in text


def test_analyze_output_file(tmp_path, capsys):
    path = tmp_path / "g.txt"
    out = tmp_path / "row.csv"
    main(["gen", "--kind", "quad", "--nx", "5", "--ny", "5", "-o", str(path)])
    code, stdout, _ = run(capsys, "analyze", str(path), "-o", str(out))
    assert code == 0
    assert stdout == ""
    assert out.read_text().startswith(CSV_HEADER)


def test_analyze_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/no/such/grid.txt")
    assert code == 3
    assert err


def test_analyze_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 9\n")
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 3
    assert "line" in err


def test_analyze_degenerate_grid_numerical_exit(tmp_path, capsys):
    # 1x3 strip: all stencils unusable in face mode
    path = tmp_path / "strip.txt"
    lines = ["8 3"]
    for y in (0.0, 1.0):
        for i in range(4):
            lines.append(f"{float(i)} {y}")
    for i in range(3):
        lines.append(f"4 {i} {i + 1} {i + 5} {i + 4}")
    path.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 4
    assert err


def test_rank_orders_by_g_avg(tmp_path, capsys):
    qpath = tmp_path / "quad.txt"
    ipath = tmp_path / "irr.txt"
    main(["gen", "--kind", "quad", "--nx", "17", "--ny", "17", "-o", str(qpath)])
    main(["gen", "--kind", "tri-irregular", "--nx", "17", "--ny", "17",
          "--perturb", "0.3", "--seed", "42", "-o", str(ipath)])
    code, out, _ = run(capsys, "rank", str(qpath), str(ipath),
                       "--measure", "g", "--stat", "avg")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "rank,grid_name,G_avg"
    assert lines[1].startswith("1,quad")
    assert lines[2].startswith("2,tri_irregular")
    assert float(lines[1].split(",")[2]) < float(lines[2].split(",")[2])


def test_rank_matches_external_sort_of_analyze_rows(tmp_path, capsys):
    paths = []
    for kind, extra in [
        ("quad", []),
        ("tri-regular", []),
        ("tri-irregular", ["--perturb", "0.3", "--seed", "42"]),
    ]:
        path = tmp_path / f"{kind}.txt"
        main(["gen", "--kind", kind, "--nx", "17", "--ny", "17",
              "-o", str(path)] + extra)
        paths.append(str(path))

    rows = []
    for path in paths:
        _, out, _ = run(capsys, "analyze", path)
        fields = out.strip().splitlines()[1].split(",")
        rows.append((float(fields[9]), fields[0]))  # (G_avg, name)
    expected = [name for _, name in sorted(rows)]

    code, out, _ = run(capsys, "rank", *paths, "--measure", "g", "--stat", "avg")
    assert code == 0
    got = [line.split(",")[1] for line in out.strip().splitlines()[1:]]
    assert got == expected


def test_rank_tie_broken_by_name(tmp_path, capsys):
    a = tmp_path / "bbb.txt"
    b = tmp_path / "aaa.txt"
    main(["gen", "--kind", "quad", "--nx", "9", "--ny", "9", "-o", str(a)])
    text = a.read_text().replace("# name: quad_9x9\n", "")
    a.write_text("# name: bbb\n" + text)
    b.write_text("# name: aaa\n" + text)
    code, out, _ = run(capsys, "rank", str(a), str(b))
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[1].split(",")[1] == "aaa"
    assert lines[2].split(",")[1] == "bbb"


def test_rank_single_grid_usage_error(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "5", "--ny", "5", "-o", str(path)])
    with pytest.raises(SystemExit) as exc:
        main(["rank", str(path)])
    assert exc.value.code == 2


def test_solve_converged_summary(tmp_path, capsys):
    path = tmp_path / "g.txt"
    hist = tmp_path / "hist.csv"
    main(["gen", "--kind", "quad", "--nx", "33", "--ny", "33", "-o", str(path)])
    code, out, _ = run(capsys, "solve", str(path), "--theta", "30",
                       "-o", str(hist))
    assert code == 0
    assert out.startswith("converged ")
    assert "iterations=33" in out
    lines = hist.read_text().strip().splitlines()
    assert lines[0] == "iter,residual_norm,work_units"
    assert len(lines) == 35  # initial entry + 33 outer iterations + header


def test_solve_history_to_stdout(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "9", "--ny", "9", "-o", str(path)])
    code, out, _ = run(capsys, "solve", str(path))
    assert code == 0
    assert out.startswith("iter,residual_norm,work_units")
    assert "\nconverged " in out


def test_solve_iteration_cap_distinct_exit(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "tri-irregular", "--nx", "17", "--ny", "17",
          "--perturb", "0.3", "--seed", "42", "-o", str(path)])
    code, out, _ = run(capsys, "solve", str(path), "--max-iter", "1")
    assert code == 4
    assert out.splitlines()[-1].startswith(("not-converged", "diverged"))


def test_solve_first_order_fast(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "17", "--ny", "17", "-o", str(path)])
    code, out, _ = run(capsys, "solve", str(path), "--first-order")
    assert code == 0
    summary = out.strip().splitlines()[-1]
    iters = int(summary.split("iterations=")[1].split()[0])
    assert iters <= 2


def test_solve_bad_tolerance(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "5", "--ny", "5", "-o", str(path)])
    code, _, err = run(capsys, "solve", str(path), "--tol", "-1")
    assert code == 2
    assert "tolerance" in err


def test_threads_env_same_cli_output(tmp_path, capsys, monkeypatch):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "tri-irregular", "--nx", "21", "--ny", "21",
          "--perturb", "0.3", "--seed", "5", "-o", str(path)])
    monkeypatch.setenv("GRIDGAUGE_THREADS", "1")
    _, out1, _ = run(capsys, "analyze", str(path))
    monkeypatch.setenv("GRIDGAUGE_THREADS", "4")
    _, out2, _ = run(capsys, "analyze", str(path))
    assert out1 == out2


def test_threads_env_invalid_usage_error(tmp_path, capsys, monkeypatch):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "quad", "--nx", "5", "--ny", "5", "-o", str(path)])
    monkeypatch.setenv("GRIDGAUGE_THREADS", "many")
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 2
    assert "GRIDGAUGE_THREADS" in err
