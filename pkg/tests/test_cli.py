import io

import pytest

from symvqe.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_TRAINING,
    ConfigError,
    ExperimentConfig,
    TraceParseError,
    config_from_text,
    load_preset,
    main,
    parse_trace,
    preset_names,
    print_report,
    resolve_seed,
    run_experiment,
)

H2_METHOD1 = """\
# small and fast
system=h2
n_qubits=2
symmetry=s2
target_value=0
method=1
ansatz_depth=2
vqe_max_iterations=40
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_pairing_errors_name_the_field():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(system="h2", n_qubits=2, symmetry="reflection", target_value=1.0)
    assert info.value.field == "symmetry"
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(system="xxz", symmetry="s2", target_value=0.0)
    assert info.value.field == "symmetry"


def test_target_must_be_an_eigenvalue():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(symmetry="reflection", target_value=0.5)
    assert info.value.field == "target_value"
    # S^2 = 1 is an eigenvalue but its sector is one-dimensional
    with pytest.raises(ConfigError, match="greater than 1"):
        ExperimentConfig(system="h2", n_qubits=2, symmetry="s2", target_value=1.0)


def test_config_parsing_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        config_from_text("colour=blue\n", environ={})
    with pytest.raises(ConfigError, match=":2: expected key=value"):
        config_from_text("method=1\nnonsense\n", environ={})
    with pytest.raises(ConfigError) as info:
        config_from_text("method=one\n", environ={})
    assert info.value.field == "method"


def test_seed_precedence():
    env = {"SYMVQE_SEED": "7"}
    assert resolve_seed(3, 5, env) == 3
    assert resolve_seed(None, 5, env) == 5
    assert resolve_seed(None, None, env) == 7
    assert resolve_seed(None, None, {}) == 0
    assert config_from_text("method=1\n", environ=env).seed == 7
    assert config_from_text("seed=2\n", seed=4, environ=env).seed == 4


def test_presets_cover_every_experiment():
    names = preset_names()
    assert len(names) == 10
    combos = set()
    for name in names:
        cfg = load_preset(name, environ={})
        combos.add((cfg.system, cfg.symmetry, cfg.target_value, cfg.method))
        if cfg.method == 2:
            assert cfg.train_samples == 100
            assert cfg.train_tolerance == 1e-3
            assert cfg.utilde_depth == (5 if cfg.system == "xxz" else 4)
    expected = {("xxz", sym, s, m) for sym in ("reflection", "rotation") for s in (1.0, -1.0) for m in (1, 2)}
    expected |= {("h2", "s2", 0.0, 1), ("h2", "s2", 0.0, 2)}
    assert combos == expected


def test_run_is_byte_deterministic(tmp_path):
    cfg_path = write(tmp_path, "h2.cfg", H2_METHOD1)
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["run", str(cfg_path), "--seed", "3", "--output", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    # identical except for the output path recorded in the header
    a, b = (o.replace(b"a.csv", b"X").replace(b"b.csv", b"X") for o in outs)
    assert a == b
    out = tmp_path / "a.csv"
    assert main(["run", str(cfg_path), "--seed", "3", "--output", str(out)]) == EXIT_OK
    assert out.read_bytes() == outs[0]


def test_trace_format_and_report(tmp_path):
    cfg = config_from_text(H2_METHOD1, output=str(tmp_path / "t.csv"), environ={})
    outcome = run_experiment(cfg)
    text = outcome.trace_path.read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0].startswith("#")
    assert "iteration,energy,energy_error,fidelity,symmetry_mean,symmetry_sq_error" in lines
    trace = parse_trace(text)
    assert trace.config["system"] == "h2"
    assert len(trace.records) == len(outcome.result.traces) == 40
    assert trace.records == outcome.result.traces  # 17 digits round-trip exactly
    last = trace.records[-1]
    assert float(trace.summary["final_energy"]) == last.energy
    assert float(trace.summary["final_fidelity"]) == last.fidelity
    assert float(trace.summary["oracle_sector_energy"]) == pytest.approx(-1.8598787789730076, abs=1e-12)

    buf = io.StringIO()
    report = print_report(outcome.trace_path, buf)
    assert buf.getvalue() == report
    rows = report.split("\n\n")[0].splitlines()
    assert len(rows) == 1 + 40
    assert rows[-1].split()[1] == trace.summary["final_energy"]
    assert f"final_energy             {trace.summary['final_energy']}" in report


def test_report_of_empty_and_short_traces(tmp_path):
    header = "iteration,energy,energy_error,fidelity,symmetry_mean,symmetry_sq_error\n"
    empty = write(tmp_path, "empty.csv", "# system=h2\n" + header)
    lines = print_report(empty, io.StringIO()).splitlines()
    assert len(lines) == 1
    assert lines[0].split() == header.strip().split(",")
    rows = "".join(f"{i},-1.5,0.1,0.9,0,0\n" for i in range(3))
    short = write(tmp_path, "short.csv", header + rows)
    assert len(print_report(short, io.StringIO()).splitlines()) == 4


def test_report_parse_error_carries_line_number(tmp_path):
    header = "iteration,energy,energy_error,fidelity,symmetry_mean,symmetry_sq_error\n"
    bad = write(tmp_path, "bad.csv", "# a=1\n" + header + "0,1,2,3,4,5\n0,1,2\n")
    with pytest.raises(TraceParseError) as info:
        print_report(bad, io.StringIO())
    assert info.value.lineno == 4
    assert main(["report", str(bad)]) == EXIT_CONFIG


def test_exit_codes(tmp_path):
    bad = write(tmp_path, "bad.cfg", "system=h2\nn_qubits=2\nsymmetry=reflection\ntarget_value=1\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--preset", "no_such_preset"]) == EXIT_CONFIG
    shallow = write(
        tmp_path,
        "shallow.cfg",
        "method=2\nutilde_depth=0\ntrain_max_iterations=50\ntrain_restart_iterations=50\n"
        f"output_path={tmp_path / 'never.csv'}\n",
    )
    assert main(["run", str(shallow)]) == EXIT_TRAINING
    assert not (tmp_path / "never.csv").exists()


def test_theta_file_is_reused(tmp_path):
    theta = tmp_path / "theta.txt"
    text = (
        "system=h2\nn_qubits=2\nsymmetry=s2\ntarget_value=0\nmethod=2\nansatz_depth=2\n"
        f"utilde_depth=4\nvqe_max_iterations=5\ntheta_path={theta}\n"
    )
    first = run_experiment(config_from_text(text, output=str(tmp_path / "a.csv"), environ={}))
    assert theta.is_file()
    second = run_experiment(config_from_text(text, output=str(tmp_path / "b.csv"), environ={}))
    assert second.trained.iterations_used == 0
    assert second.trained.theta_star.tobytes() == first.trained.theta_star.tobytes()
    assert second.trained.achieved_mean_error <= 1e-3
