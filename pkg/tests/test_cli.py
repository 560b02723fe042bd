import json
import subprocess
import sys

from jetlag.cli import main

BEAM_CONFIG = {
    "problem": "beam",
    "n": 1,
    "k": 2,
    "lagrangian": "1/2*mu*q1_2^2 + rho*q1_0",
    "method": "ostrogradsky",
    "parameters": {"mu": 1.0, "rho": 1.0},
    "simulation": {
        "t0": 0.0,
        "t1": 1.0,
        "h": 0.001,
        "initial": {"q1_0": 0.0, "q1_1": 0.0, "p1_0": 0.0, "p1_1": 0.0},
    },
}

PLANAR_CONFIG = {
    "problem": "degenerate-planar",
    "n": 3,
    "k": 2,
    "lagrangian": "1/2*(q1_2 + q2_2)^2",
    "method": "ostrogradsky",
    "parameters": {"a": 1.0, "b": 1.0},
    "W": "a*q1_1 + b*q2_1",
    "simulation": {
        "t0": 0.0,
        "t1": 0.1,
        "h": 0.001,
        "initial": {
            "q1_0": 0.1, "q2_0": 0.2, "q3_0": 0.0,
            "q1_1": 0.0, "q2_1": 0.0, "q3_1": 0.0,
            "p1_0": 0.0, "p2_0": 0.0, "p3_0": 0.0,
            "p1_1": 1.0, "p2_1": 1.0, "p3_1": 0.0,
        },
    },
}


def write_config(tmp_path, config, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_derive_beam_report(tmp_path, capsys):
    cfg = write_config(tmp_path, BEAM_CONFIG)
    code, out = run_cli(capsys, "derive", "--config", cfg, "--format", "json", "--out", str(tmp_path / "o"))
    assert code == 0
    report = json.loads(out)
    assert "p1_1*q1_2" in report["energy"]
    assert report["implicit_system"]["constraints"] == ["p1_1 - mu*q1_2"]
    assert report["hamiltonian"].count("p1_1^2") == 1


def test_derive_trivial_lagrangian(tmp_path, capsys):
    cfg = write_config(tmp_path, {**BEAM_CONFIG, "problem": "zero", "lagrangian": "0"})
    code, out = run_cli(capsys, "derive", "--config", cfg, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["euler_lagrange"] == ["0"]


def test_derive_chiral_attaches_affine_warning(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "problem": "chiral",
            "n": 2,
            "k": 2,
            "lagrangian": "-lmb*(q1_1*q2_2 - q2_1*q1_2) + m/2*(q1_1^2 + q2_1^2)",
            "method": "ostrogradsky",
            "parameters": {"lmb": 1.0, "m": 1.0},
        },
    )
    code, out = run_cli(capsys, "derive", "--config", cfg, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["affine_warning"]["affine_in_top_derivative"] is True
    assert report["affine_warning"]["coefficient_symmetry_passed"] is False


def test_derive_schmidt2_auto_gauge(tmp_path, capsys):
    config = {
        "problem": "quad",
        "n": 1,
        "k": 2,
        "lagrangian": "1/2*mu*q1_2^2",
        "method": "schmidt2",
        "parameters": {"mu": 2.0},
    }
    cfg = write_config(tmp_path, config)
    code, out = run_cli(capsys, "derive", "--config", cfg, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["gauge"] == "-a1_0*mu*q1_1"
    assert report["compatibility_residuals"] == ["0"]
    assert "pa1" in report["hamiltonian"]
    assert report["momentum_relations"] == ["pa1 + mu*q1_1"]


def test_simulate_beam_and_csv_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path, BEAM_CONFIG)
    out_dir = tmp_path / "runs"
    code, out = run_cli(
        capsys, "simulate", "--config", cfg, "--out", str(out_dir), "--format", "json"
    )
    assert code == 0
    report = json.loads(out)
    assert report["energy_drift"] <= 1e-8
    csv_path = out_dir / "beam.csv"
    first = csv_path.read_bytes()
    header = first.split(b"\n", 1)[0].decode()
    assert header == "t,q1_0,q1_1,p1_0,p1_1,q1_2,E"
    code, _ = run_cli(capsys, "simulate", "--config", cfg, "--out", str(out_dir), "--format", "json")
    assert code == 0
    assert csv_path.read_bytes() == first


def test_simulate_incomplete_initial_state_is_usage_error(tmp_path, capsys):
    partial = {**BEAM_CONFIG, "simulation": {**BEAM_CONFIG["simulation"], "initial": {"q1_0": 0.0}}}
    cfg = write_config(tmp_path, partial)
    assert main(["simulate", "--config", cfg]) == 2
    capsys.readouterr()


def test_simulate_bad_step_is_usage_error(tmp_path, capsys):
    bad = {**BEAM_CONFIG, "simulation": {**BEAM_CONFIG["simulation"], "h": -1.0}}
    cfg = write_config(tmp_path, bad)
    assert main(["simulate", "--config", cfg]) == 2
    capsys.readouterr()


def test_simulate_degenerate_aborts_with_exit_3(tmp_path, capsys):
    cfg = write_config(tmp_path, PLANAR_CONFIG)
    code, out = run_cli(capsys, "simulate", "--config", cfg, "--format", "json")
    assert code == 3


def test_missing_config_fields(tmp_path, capsys):
    cfg = write_config(tmp_path, {"problem": "x"})
    assert main(["derive", "--config", cfg]) == 2
    capsys.readouterr()
    assert main(["derive", "--config", str(tmp_path / "absent.json")]) == 2
    capsys.readouterr()


def test_hj_check_planar_passes(tmp_path, capsys):
    cfg = write_config(tmp_path, PLANAR_CONFIG)
    code, out = run_cli(capsys, "hj-check", "--config", cfg, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["residuals"]["passed"] is True
    assert report["equation_family"] == "ostrogradsky"
    assert "skipped" in report["relatedness"]


def test_hj_check_component_form_with_relatedness(tmp_path, capsys):
    config = {
        "problem": "javelin",
        "n": 1,
        "k": 2,
        "lagrangian": "1/2*q1_1^2 - 1/2*q1_2^2",
        "method": "ostrogradsky",
        "parameters": {"A": 1.0, "B": 0.0},
        "gamma_components": ["A", "sqrt(2)*sqrt(A*q1_1 - 1/2*q1_1^2 - B)"],
        "sample_box": {"q1_1": [0.15, 1.85]},
        "domain_guards": [["A*q1_1 - 1/2*q1_1^2 - B", 0.1]],
        "tolerances": {"residual": 1e-9},
        "simulation": {"t0": 0.0, "t1": 0.3, "h": 0.001,
                       "initial": {"q1_0": 0.3, "q1_1": 1.0}},
    }
    path = write_config(tmp_path, config)
    code, out = run_cli(capsys, "hj-check", "--config", path, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["residuals"]["passed"] is True
    assert report["relatedness"]["passed"] is True
    assert report["relatedness"]["overall_sup"] <= 1e-5


def test_hj_check_zero_potential_fails(tmp_path, capsys):
    cfg = write_config(tmp_path, {**BEAM_CONFIG, "W": "0"})
    del cfg  # config path built below
    config = {**BEAM_CONFIG, "W": "0"}
    config.pop("simulation")
    path = write_config(tmp_path, config, "w0.json")
    code, out = run_cli(capsys, "hj-check", "--config", path, "--format", "json")
    assert code == 1
    report = json.loads(out)
    fiber_eqs = [e for e in report["residuals"]["equations"] if e["name"].startswith("fiber")]
    assert any("mu*q1_2" in e["expr"] for e in fiber_eqs)


def test_hj_solve_affine(tmp_path, capsys):
    config = {
        "problem": "affine",
        "n": 1,
        "k": 2,
        "lagrangian": "(B + q1_0)*q1_2 + A*q1_1 + q1_1^2",
        "method": "ostrogradsky",
        "parameters": {"A": 1.0, "B": 2.0},
        "affine_f": ["B + q1_0"],
        "affine_g": "A*q1_1 + q1_1^2",
    }
    path = write_config(tmp_path, config)
    code, out = run_cli(capsys, "hj-solve-affine", "--config", path, "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["closure"]["passed"] is True
    assert report["verification"]["passed"] is True
    assert report["potential"] is not None


def test_corpus_list_names_eight_entries(capsys):
    code, out = run_cli(capsys, "corpus", "list", "--format", "json")
    assert code == 0
    report = json.loads(out)
    ids = [e["id"] for e in report["entries"]]
    assert ids == sorted(ids)
    assert len(ids) == 8
    assert set(ids) == {
        "affine-second-template",
        "affine-third-template",
        "beam",
        "chiral-oscillator",
        "clement",
        "degenerate-planar",
        "javelin",
        "pure-quadratic",
    }


def test_corpus_single_entry_and_unknown_filter(capsys):
    code, out = run_cli(capsys, "corpus", "run", "--filter", "degenerate-planar", "--format", "json")
    assert code == 0
    assert json.loads(out)["passed"] is True
    assert main(["corpus", "run", "--filter", "no-such-entry"]) == 2
    capsys.readouterr()


def test_report_determinism(capsys):
    code1, out1 = run_cli(capsys, "corpus", "run", "--filter", "affine-second-template", "--seed", "42", "--format", "json")
    code2, out2 = run_cli(capsys, "corpus", "run", "--filter", "affine-second-template", "--seed", "42", "--format", "json")
    assert code1 == code2 == 0
    assert out1 == out2


def test_numeric_blowup_is_exit_4(tmp_path, capsys):
    config = {
        "problem": "blowup",
        "n": 1,
        "k": 2,
        "lagrangian": "1/2*q1_2^2 + 1/6*q1_0^6",
        "method": "ostrogradsky",
        "simulation": {
            "t0": 0.0, "t1": 2.0, "h": 0.01,
            "initial": {"q1_0": 1e60, "q1_1": 1e60, "p1_0": 0.0, "p1_1": 0.0},
        },
    }
    path = write_config(tmp_path, config)
    assert main(["simulate", "--config", path]) == 4
    capsys.readouterr()


def test_open_one_form_is_exit_1(tmp_path, capsys):
    config = {
        "problem": "open-form",
        "n": 1,
        "k": 2,
        "lagrangian": "1/2*q1_2^2",
        "method": "ostrogradsky",
        "gamma_components": ["q1_1", "0"],
    }
    path = write_config(tmp_path, config)
    assert main(["hj-check", "--config", path]) == 1
    capsys.readouterr()


def test_corpus_empty_filter_is_noop_success(capsys):
    code, out = run_cli(capsys, "corpus", "run", "--filter", "", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["count"] == 0 and report["passed"] is True


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "jetlag.cli", "corpus", "list"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "beam" in proc.stdout
