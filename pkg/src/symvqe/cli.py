"""Config-driven experiment runner and trace reporter.

Usage::

    symvqe run CONFIG [--seed N] [--output PATH]
    symvqe run --preset NAME [--seed N] [--output PATH]
    symvqe report TRACE
    symvqe presets

Config files are flat ``key=value`` text with ``#`` comments. Trace files start
with ``#`` lines holding the resolved config, then a CSV block with one row per
iteration, then ``#`` summary lines.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .ansatz import AnsatzSpec, build_layered_circuit, build_subspace_ansatz
from .operators import build_reflection, build_rotation, build_xxz, h2_hamiltonian, pauli_dense, s2_operator
from .oracle import OracleResult, subspace_ground
from .symmetry import SymmetryError, SymmetrySector, build_exact_unitary, extract_sector
from .trainer import (
    TrainedUnitary,
    TrainingConfig,
    TrainingError,
    load_theta,
    save_theta,
    symmetry_cost,
    train_unitary,
)
from .vqe import TraceRecord, VqeConfig, VqeResult, method1_prep, method2_prep, minimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRAINING = 3
EXIT_IO = 4

SEED_ENV = "SYMVQE_SEED"
TRACE_MAGIC = "# symvqe trace v1"

PAIRINGS = {"xxz": ("reflection", "rotation"), "h2": ("s2",)}


class ConfigError(ValueError):
    """Invalid experiment configuration. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class TraceParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class ExperimentConfig:
    system: str = "xxz"
    n_qubits: int = 4
    J: float = 1.0
    K: float = 3.0
    symmetry: str = "reflection"
    target_value: float = -1.0
    method: int = 1
    ansatz_depth: int = 3
    utilde_depth: int = 5
    utilde_entangler: str = "ring"
    train_samples: int = 100
    train_tolerance: float = 1e-3
    train_max_iterations: int = 60000
    train_restart_iterations: int = 3000
    train_step_bound: float = 0.5
    train_init_scale: float = 1.0
    vqe_max_iterations: int = 2000
    vqe_step_bound: float = 0.5
    vqe_bound_decay: float = 0.9
    vqe_convergence_grad_norm: float = 1e-6
    vqe_learning_rate: float = 1.0
    seed: int = 0
    output_path: str = "trace.csv"
    theta_path: str = ""

    def __post_init__(self):
        if self.system not in PAIRINGS:
            raise ConfigError("system", f"unknown system {self.system!r}; expected one of {sorted(PAIRINGS)}")
        if self.symmetry not in PAIRINGS[self.system]:
            raise ConfigError(
                "symmetry",
                f"{self.symmetry!r} cannot be paired with system {self.system!r}; "
                f"allowed: {', '.join(PAIRINGS[self.system])}",
            )
        if self.system == "h2" and self.n_qubits != 2:
            raise ConfigError("n_qubits", "the h2 model is fixed at 2 qubits")
        if self.system == "xxz" and self.symmetry == "reflection" and self.n_qubits % 2:
            raise ConfigError("n_qubits", "the reflection symmetry needs an even number of spins")
        if self.n_qubits < 2:
            raise ConfigError("n_qubits", "need at least 2 qubits")
        if self.method not in (1, 2):
            raise ConfigError("method", f"expected 1 or 2, got {self.method}")
        if self.ansatz_depth < 1:
            raise ConfigError("ansatz_depth", "must be at least 1")
        if self.utilde_depth < 0:
            raise ConfigError("utilde_depth", "must be non-negative")
        if self.train_samples < 1:
            raise ConfigError("train_samples", "must be at least 1")
        if self.train_tolerance <= 0:
            raise ConfigError("train_tolerance", "must be positive")
        if not self.output_path:
            raise ConfigError("output_path", "must not be empty")
        try:
            self.vqe_config()
        except ValueError as exc:
            raise ConfigError("vqe", str(exc)) from exc
        try:
            self.training_config()
        except ValueError as exc:
            raise ConfigError("train", str(exc)) from exc
        try:
            self.sector()
        except SymmetryError as exc:
            raise ConfigError("target_value", str(exc)) from exc

    def hamiltonian(self) -> np.ndarray:
        if self.system == "h2":
            return h2_hamiltonian()
        return pauli_dense(build_xxz(self.n_qubits, self.J, self.K))

    def symmetry_operator(self) -> np.ndarray:
        if self.symmetry == "s2":
            return s2_operator()
        if self.symmetry == "reflection":
            return build_reflection(self.n_qubits)
        return build_rotation(self.n_qubits)

    def sector(self) -> SymmetrySector:
        return extract_sector(self.symmetry_operator(), self.target_value)

    def vqe_config(self) -> VqeConfig:
        return VqeConfig(
            max_iterations=self.vqe_max_iterations,
            step_bound=self.vqe_step_bound,
            bound_decay=self.vqe_bound_decay,
            convergence_grad_norm=self.vqe_convergence_grad_norm,
            learning_rate=self.vqe_learning_rate,
            seed=self.seed,
        )

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            depth=self.utilde_depth,
            n_samples=self.train_samples,
            target_mean_error=self.train_tolerance,
            max_iterations=self.train_max_iterations,
            restart_iterations=self.train_restart_iterations,
            step_bound=self.train_step_bound,
            entangler=self.utilde_entangler,
            init_scale=self.train_init_scale,
            seed=self.seed,
        )

    def items(self) -> list[tuple[str, object]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(key or "?", f"{source}:{lineno}: expected key=value")
        if key not in _FIELD_TYPES:
            raise ConfigError(key, f"{source}:{lineno}: unknown key")
        if key in values:
            raise ConfigError(key, f"{source}:{lineno}: duplicate key")
        values[key] = _convert(key, value.strip())
    return values


def resolve_seed(flag: int | None, from_config: object | None, environ=os.environ) -> int:
    """Seed precedence: command-line flag, then config file, then SYMVQE_SEED, then 0."""
    if flag is not None:
        return int(flag)
    if from_config is not None:
        return int(from_config)
    env = environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def load_config(path, seed: int | None = None, output: str | None = None, environ=os.environ) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return config_from_text(text, str(path), seed, output, environ)


def config_from_text(text, source="<config>", seed=None, output=None, environ=os.environ) -> ExperimentConfig:
    values = parse_config_text(text, source)
    values["seed"] = resolve_seed(seed, values.get("seed"), environ)
    if output is not None:
        values["output_path"] = output
    return ExperimentConfig(**values)


def preset_names() -> list[str]:
    root = resources.files("symvqe") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    res = resources.files("symvqe") / "presets" / f"{name}.cfg"
    if not res.is_file():
        raise ConfigError("preset", f"no preset named {name!r}; available: {', '.join(preset_names())}")
    return res.read_text(encoding="utf-8")


def load_preset(name: str, seed=None, output=None, environ=os.environ) -> ExperimentConfig:
    return config_from_text(preset_text(name), f"preset:{name}", seed, output, environ)


@dataclass
class RunOutcome:
    status: int
    trace_path: Path
    oracle: OracleResult
    result: VqeResult
    trained: TrainedUnitary | None = None
    summary: dict[str, str] = dataclasses.field(default_factory=dict)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _obtain_utilde(cfg: ExperimentConfig, sector: SymmetrySector, ansatz) -> TrainedUnitary:
    tcfg = cfg.training_config()
    if cfg.theta_path and Path(cfg.theta_path).is_file():
        circuit = build_layered_circuit(sector.n_qubits, tcfg.depth, prefix="t", entangler=tcfg.entangler)
        theta = load_theta(cfg.theta_path, circuit.param_names)
        # re-check on fresh samples rather than trusting the file
        rng = np.random.default_rng(cfg.seed)
        alphas = rng.uniform(0.0, 2 * np.pi, size=(tcfg.n_samples, ansatz.n_params))
        err = symmetry_cost(theta, sector, alphas, ansatz, circuit)
        if err > tcfg.target_mean_error:
            raise TrainingError(err, 0, tcfg.target_mean_error, theta)
        return TrainedUnitary(circuit, theta, err, 0)
    trained = train_unitary(sector, tcfg, ansatz)
    if cfg.theta_path:
        save_theta(cfg.theta_path, trained.circuit.param_names, trained.theta_star)
    return trained


def run_experiment(cfg: ExperimentConfig) -> RunOutcome:
    """Run one experiment and write its trace file.

    Raises :class:`TrainingError` when the Method 2 circuit misses its threshold.
    """
    H = cfg.hamiltonian()
    sector = cfg.sector()
    oracle = subspace_ground(H, sector)
    ansatz = build_subspace_ansatz(AnsatzSpec(sector.n_qubits, sector.dim_k, cfg.ansatz_depth))
    trained = None
    if cfg.method == 1:
        prep = method1_prep(ansatz, build_exact_unitary(sector))
    else:
        trained = _obtain_utilde(cfg, sector, ansatz)
        prep = method2_prep(ansatz, trained.circuit, trained.theta_star)
    result = minimize(prep, H, cfg.vqe_config(), oracle, sector)

    last = result.traces[-1]
    summary = {
        "final_energy": _fmt(last.energy),
        "final_energy_error": _fmt(last.energy_error),
        "final_fidelity": _fmt(last.fidelity),
        "final_symmetry_mean": _fmt(last.symmetry_mean),
        "final_symmetry_sq_error": _fmt(last.symmetry_sq_error),
        "iterations": _fmt(len(result.traces)),
        "converged": _fmt(result.converged),
        "oracle_sector_energy": _fmt(oracle.sector_ground_energy),
        "oracle_full_energy": _fmt(oracle.full_ground_energy),
        "ground_in_sector": _fmt(oracle.ground_in_sector),
        "sector_dimension": _fmt(sector.dim_k),
    }
    if trained is not None:
        summary["trained_mean_error"] = _fmt(trained.achieved_mean_error)
        summary["training_iterations"] = _fmt(trained.iterations_used)

    lines = [TRACE_MAGIC]
    lines += [f"# {key}={value!r}" if isinstance(value, float) else f"# {key}={value}" for key, value in cfg.items()]
    lines.append(",".join(TraceRecord.FIELDS))
    for rec in result.traces:
        lines.append(",".join(_fmt(getattr(rec, name)) for name in TraceRecord.FIELDS))
    lines += [f"# summary.{key}={value}" for key, value in summary.items()]

    path = Path(cfg.output_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return RunOutcome(EXIT_OK, path, oracle, result, trained, summary)


@dataclass
class ParsedTrace:
    config: dict[str, str]
    records: list[TraceRecord]
    summary: dict[str, str]


def parse_trace(text: str) -> ParsedTrace:
    config: dict[str, str] = {}
    summary: dict[str, str] = {}
    records: list[TraceRecord] = []
    header_seen = False
    expected = ",".join(TraceRecord.FIELDS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if line == TRACE_MAGIC:
                continue
            key, sep, value = body.partition("=")
            if not sep:
                raise TraceParseError(lineno, f"comment line is not key=value: {raw!r}")
            if key.startswith("summary."):
                summary[key[len("summary."):]] = value
            elif header_seen:
                raise TraceParseError(lineno, "config line after the column header")
            else:
                config[key] = value
            continue
        if not header_seen:
            if line != expected:
                raise TraceParseError(lineno, f"expected column header {expected!r}")
            header_seen = True
            continue
        if summary:
            raise TraceParseError(lineno, "data row after the summary block")
        cells = line.split(",")
        if len(cells) != len(TraceRecord.FIELDS):
            raise TraceParseError(lineno, f"expected {len(TraceRecord.FIELDS)} fields, found {len(cells)}")
        try:
            values = [int(cells[0])] + [float(c) for c in cells[1:]]
        except ValueError:
            raise TraceParseError(lineno, f"non-numeric field in {raw!r}") from None
        records.append(TraceRecord(*values))
    return ParsedTrace(config, records, summary)


_COLUMN_WIDTH = 24


def format_report(trace: ParsedTrace) -> str:
    """Fixed-width table of every record, followed by the summary block.

    Values are printed with 17 significant digits so the table reproduces the
    file contents exactly.
    """
    names = TraceRecord.FIELDS
    out = ["".join(f"{name:>{_COLUMN_WIDTH}}" for name in names)]
    for rec in trace.records:
        out.append("".join(f"{_fmt(getattr(rec, name)):>{_COLUMN_WIDTH}}" for name in names))
    if trace.summary:
        out.append("")
        width = max(len(k) for k in trace.summary)
        out += [f"{key:<{width}}  {value}" for key, value in trace.summary.items()]
    return "\n".join(out) + "\n"


def print_report(path, stream=None) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise TraceParseError(1, f"not UTF-8 text: {exc.reason}") from None
    report = format_report(parse_trace(text))
    (stream or sys.stdout).write(report)
    return report


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symvqe", description="Symmetry-restricted VQE experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write its trace file")
    run.add_argument("config", nargs="?", help="key=value config file")
    run.add_argument("--preset", help="name of a shipped experiment config")
    run.add_argument("--seed", type=int, help="overrides the config seed")
    run.add_argument("--output", help="overrides output_path")
    rep = sub.add_parser("report", help="print a trace file as a table")
    rep.add_argument("trace")
    sub.add_parser("presets", help="list shipped experiment configs")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    if args.command == "report":
        try:
            print_report(args.trace)
        except TraceParseError as exc:
            print(f"error: {args.trace}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except OSError as exc:
            print(f"error: {args.trace}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK

    if (args.config is None) == (args.preset is None):
        print("error: give exactly one of CONFIG or --preset", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.preset is not None:
            cfg = load_preset(args.preset, args.seed, args.output)
        else:
            cfg = load_config(args.config, args.seed, args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outcome = run_experiment(cfg)
    except TrainingError as exc:
        print(f"training failed: {exc} (best mean error {exc.best_error:.6g})", file=sys.stderr)
        return EXIT_TRAINING
    except OSError as exc:
        print(f"error: cannot write {cfg.output_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    s = outcome.summary
    print(
        f"wrote {outcome.trace_path}: {s['iterations']} iterations, "
        f"energy {float(s['final_energy']):.10f} (sector ground {float(s['oracle_sector_energy']):.10f}), "
        f"fidelity {float(s['final_fidelity']):.6f}"
    )
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
