"""
Command-line module for spinchain-qst
What to learn here: One validated config document per invocation, dotted
command-line overrides, and an exit-code contract that separates bad input
(2) from numerical failure (3).

Run: python -m src.cli <command> --config run.json [--chain.n_sites=6 ...]
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .analysis import DEFAULT_MEDIA, entanglement_report, medium_sweep, parse_medium_name, purity_law_scan
from .chain_models import ChainModel, ChainSpec, critical_time
from .config import Config
from .dense_engine import check_swap_identities, search_triplets
from .errors import ConfigError, InvalidStateError, QSTError
from .fermion_engine import average_fidelity_estimate, optimize_transfer_time, transfer_curve_frame
from .protocol import MediumKind, MediumSpec, run_protocol
from .quantum_core import PAULI_MATRICES, SingleQubitState, StateVector, bloch_state
from .utils import setup_logging, write_csv, write_json

logger = setup_logging()

COMMANDS = (
    "verify-identities",
    "run",
    "sweep-medium",
    "p00-sweep",
    "homogeneous",
    "entangle",
    "triplet-check",
)


class MediumConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: MediumKind = MediumKind.MAXIMALLY_MIXED
    bits: Optional[str] = None
    signs: Optional[str] = None
    bloch: Optional[List[Tuple[float, float]]] = None
    beta: Optional[float] = Field(None, ge=0)
    seed: Optional[int] = None
    rank: int = Field(2, ge=1)

    @field_validator("bits", "signs", mode="before")
    @classmethod
    def _digits_as_text(cls, value: Any) -> Any:
        # --medium.bits=10 arrives as the JSON number 10
        return str(value) if isinstance(value, int) and not isinstance(value, bool) else value

    @field_validator("bits")
    @classmethod
    def _bits_alphabet(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and set(value) - {"0", "1"}:
            raise ValueError(f"bits must use only '0' and '1', got '{value}'")
        return value

    @field_validator("signs")
    @classmethod
    def _signs_alphabet(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and set(value) - {"+", "-"}:
            raise ValueError(f"signs must use only '+' and '-', got '{value}'")
        return value

    @model_validator(mode="after")
    def _product_states_need_angles(self) -> "MediumConfig":
        if self.kind == MediumKind.PRODUCT_STATES and not self.bloch:
            raise ValueError("kind=ProductStates needs one (theta, phi) pair per medium site in 'bloch'")
        return self

    def check_length(self, n_sites: int):
        """Per-site fields must cover exactly the N-2 medium sites"""
        m = n_sites - 2
        for field in ("bits", "signs", "bloch"):
            value = getattr(self, field)
            if value is not None and len(value) != m:
                raise ValueError(f"medium.{field} has {len(value)} entries, the chain has {m} medium sites")

    def to_medium(self, n_sites: int) -> MediumSpec:
        if self.kind == MediumKind.PRODUCT_Z:
            return MediumSpec.product_z(self.bits if self.bits is not None else "0" * (n_sites - 2))
        if self.kind == MediumKind.X_EIGENSTATES:
            return MediumSpec.x_eigenstates(self.signs if self.signs is not None else "+" * (n_sites - 2))
        if self.kind == MediumKind.PRODUCT_STATES:
            angles = self.bloch or []
            return MediumSpec.product_states([SingleQubitState.from_state(bloch_state(t, p)) for t, p in angles])
        if self.kind == MediumKind.THERMAL:
            return MediumSpec.thermal(self.beta if self.beta is not None else 0.0)
        if self.kind == MediumKind.RANDOM_PURE:
            return MediumSpec.random_pure(self.seed if self.seed is not None else Config.DEFAULT_SEED)
        if self.kind == MediumKind.RANDOM_MIXED:
            return MediumSpec.random_mixed(self.seed if self.seed is not None else Config.DEFAULT_SEED, self.rank)
        return MediumSpec.maximally_mixed()


class InputConfig(BaseModel):
    """Bloch angles plus Bloch-vector length (1 for a pure input)"""

    model_config = ConfigDict(extra="forbid")

    theta: float = float(np.pi / 2)
    phi: float = float(np.pi / 2)
    radius: float = Field(1.0, ge=0, le=1)

    def to_state(self):
        if self.radius == 1.0:
            return bloch_state(self.theta, self.phi)
        n = np.array([
            np.sin(self.theta) * np.cos(self.phi),
            np.sin(self.theta) * np.sin(self.phi),
            np.cos(self.theta),
        ])
        rho = 0.5 * (PAULI_MATRICES["I"] + self.radius * sum(
            c * PAULI_MATRICES[l] for c, l in zip(n, "XYZ")
        ))
        return SingleQubitState(rho)


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_max: float = Field(Config.HOMOGENEOUS_T_MAX, gt=0)
    grid_points: int = Field(Config.HOMOGENEOUS_GRID, ge=2)
    p00: Optional[List[float]] = None
    thetas: Optional[List[float]] = None
    n_range: Optional[List[int]] = None
    media: Optional[List[str]] = None
    pure_inputs: int = Field(20, ge=1)
    mixed_inputs: int = Field(5, ge=0)
    triplet_time: Optional[float] = None

    @field_validator("media")
    @classmethod
    def _known_media(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        for name in value or []:
            try:
                parse_medium_name(name)
            except InvalidStateError as e:
                raise ValueError(str(e)) from e
        return value


class RunConfig(BaseModel):
    """Everything one CLI invocation needs; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid")

    command: Literal[COMMANDS]
    chain: ChainSpec
    medium: MediumConfig = MediumConfig()
    input: InputConfig = InputConfig()
    seed: int = Config.DEFAULT_SEED
    n_outcome: Optional[Literal[1, -1]] = None
    m1_outcome: Optional[Literal[1, -1]] = None
    grid: GridConfig = GridConfig()
    threshold: float = Field(Config.IDENTITY_THRESHOLD, gt=0)
    output_dir: Path = Config.OUTPUT_DIR

    @model_validator(mode="after")
    def _fits_command(self) -> "RunConfig":
        model = self.chain.model
        if self.command in ("p00-sweep", "entangle") and model != ChainModel.ISING_ENGINEERED:
            raise ValueError(f"{self.command} is defined for IsingEngineered chains, got {model.value}")
        if self.command == "homogeneous" and not model.is_xx:
            raise ValueError(f"homogeneous needs an XX chain, got {model.value}")
        if self.command != "homogeneous":
            sizes = self.grid.n_range if self.command == "sweep-medium" and self.grid.n_range else [self.chain.n_sites]
            too_big = [n for n in sizes if n > Config.DENSE_MAX_QUBITS]
            if too_big:
                raise ValueError(
                    f"{self.command} simulates densely; N={too_big} exceeds QST_DENSE_MAX_QUBITS={Config.DENSE_MAX_QUBITS}"
                )
        if self.command in ("run", "entangle"):
            self.medium.check_length(self.chain.n_sites)
        return self


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: Dict[str, Any], overrides: List[str]) -> Dict[str, Any]:
    """Apply '--a.b=value' flags to the raw config document"""
    for flag in overrides:
        if not flag.startswith("--") or "=" not in flag:
            raise ConfigError(f"Override '{flag}' must look like --dotted.key=value")
        key, value = flag[2:].split("=", 1)
        parts = key.split(".")
        node = raw
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Override '{key}' descends into a non-object field")
            node = child
        node[parts[-1]] = _parse_value(value)
    return raw


def load_config(command: str, config_path: Optional[Path], overrides: List[str]) -> RunConfig:
    raw: Dict[str, Any] = {}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {config_path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("Config document must be a JSON object")
    if raw.get("command", command) != command:
        raise ConfigError(f"Config is for '{raw['command']}', invoked as '{command}'")
    raw["command"] = command
    raw = apply_overrides(raw, overrides)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def _output(config: RunConfig, suffix: str) -> Path:
    return Path(config.output_dir) / f"{config.command}{suffix}"


def cmd_verify_identities(config: RunConfig) -> Tuple[int, str]:
    reports = check_swap_identities(config.chain)
    frame = pd.DataFrame([r.model_dump() for r in reports])
    frame = frame[["model", "n_sites", "site", "pair", "residual", "target", "nominal_target", "convention"]]
    path = write_csv(frame.rename(columns={"n_sites": "N", "site": "i"}), _output(config, ".csv"))
    failures = [r.model_dump() for r in reports if r.residual >= config.threshold]
    if failures:
        write_json({"threshold": config.threshold, "failures": failures}, _output(config, "_failures.json"))
        print(json.dumps({"failures": len(failures), "threshold": config.threshold}), file=sys.stderr)
        return 3, f"{len(failures)} of {len(reports)} identities above {config.threshold:g} -> {path}"
    return 0, f"{len(reports)} identities below {config.threshold:g} -> {path}"


def cmd_run(config: RunConfig) -> Tuple[int, str]:
    spec = config.chain
    time = None
    if not spec.model.is_engineered:
        time, _, _ = optimize_transfer_time(spec, config.grid.t_max, config.grid.grid_points)
    run = run_protocol(
        spec,
        config.input.to_state(),
        config.medium.to_medium(spec.n_sites),
        n_outcome=config.n_outcome,
        m1_outcome=config.m1_outcome,
        seed=config.seed,
        time=time,
    )
    path = write_json(run.to_record(), _output(config, ".json"))
    return 0, f"fidelity {run.fidelity:.12f} correction {run.correction_applied} -> {path}"


def cmd_sweep_medium(config: RunConfig) -> Tuple[int, str]:
    spec = config.chain
    table = medium_sweep(
        spec.model,
        config.grid.n_range or [spec.n_sites],
        media=config.grid.media or list(DEFAULT_MEDIA),
        pure_inputs=config.grid.pure_inputs,
        mixed_inputs=config.grid.mixed_inputs,
        seed=config.seed,
        j_scale=spec.j_scale,
        end_coupling_ratio=spec.end_coupling_ratio,
    )
    path = write_csv(table, _output(config, ".csv"))
    return 0, f"{len(table)} cells, min fidelity {table['min_fidelity'].min():.12f} -> {path}"


def cmd_p00_sweep(config: RunConfig) -> Tuple[int, str]:
    thetas = config.grid.thetas or list(np.linspace(0.0, np.pi / 2, 9))
    table = purity_law_scan(config.chain, thetas, config.grid.p00)
    path = write_csv(table, _output(config, ".csv"))
    return 0, f"fidelity law: {table['winner'].iloc[0]} -> {path}"


def cmd_homogeneous(config: RunConfig) -> Tuple[int, str]:
    spec = config.chain
    t_opt, f_max, curve = optimize_transfer_time(spec, config.grid.t_max, config.grid.grid_points)
    write_csv(transfer_curve_frame(curve), _output(config, "_curve.csv"))
    summary = {
        "model": spec.model.value,
        "n_sites": spec.n_sites,
        "j_scale": spec.j_scale,
        "end_coupling_ratio": spec.end_coupling_ratio,
        "t_max": config.grid.t_max,
        "grid_points": config.grid.grid_points,
        "t_opt": t_opt,
        "abs_f_max": f_max,
        "avg_fidelity_estimate_max": average_fidelity_estimate(f_max),
        "estimator": "estimate: 1/2 + |f|/3 + |f|^2/6",
    }
    path = write_json(summary, _output(config, "_summary.json"))
    return 0, f"avg_fidelity_estimate_max {summary['avg_fidelity_estimate_max']:.6f} at t={t_opt:.6f} -> {path}"


def cmd_entangle(config: RunConfig) -> Tuple[int, str]:
    spec = config.chain
    bits = config.medium.bits if config.medium.bits is not None else "0" * (spec.n_sites - 2)
    psi = config.input.to_state()
    if not isinstance(psi, StateVector):
        raise ConfigError("entangle needs a pure input (input.radius = 1)")
    report = entanglement_report(spec, psi, bits)
    path = write_json(report.to_record(), _output(config, ".json"))
    return 0, f"spin-N entropy {report.ghz_proxy:.9f} bits -> {path}"


def cmd_triplet_check(config: RunConfig) -> Tuple[int, str]:
    spec = config.chain
    t = config.grid.triplet_time if config.grid.triplet_time is not None else critical_time(spec)
    solutions = search_triplets(spec, t, threshold=config.threshold)
    rows = [
        {
            "B": s.measure_after,
            "C": s.decoder,
            "D": s.measure_before,
            **{f"j_{o}": s.exponents[o][0] for o in "XYZ"},
            **{f"k_{o}": s.exponents[o][1] for o in "XYZ"},
            "max_residual": s.max_residual,
        }
        for s in solutions
    ]
    columns = ["B", "C", "D", "j_X", "k_X", "j_Y", "k_Y", "j_Z", "k_Z", "max_residual"]
    path = write_csv(pd.DataFrame(rows, columns=columns), _output(config, ".csv"))
    return 0, f"{len(solutions)} triplets at t={t:.6g} -> {path}"


HANDLERS: Dict[str, Callable[[RunConfig], Tuple[int, str]]] = {
    "verify-identities": cmd_verify_identities,
    "run": cmd_run,
    "sweep-medium": cmd_sweep_medium,
    "p00-sweep": cmd_p00_sweep,
    "homogeneous": cmd_homogeneous,
    "entangle": cmd_entangle,
    "triplet-check": cmd_triplet_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinchain-qst",
        allow_abbrev=False,
        description="State transfer across engineered spin chains without medium initialization",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, overrides = parser.parse_known_args(argv)
    try:
        config = load_config(args.command, args.config, overrides)
        logger.info(f"Running {config.command} for {config.chain.label}")
        code, summary = HANDLERS[config.command](config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except ValidationError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except QSTError as e:
        logger.error(f"Numerical failure: {e}")
        return 3
    print(f"{config.command}: {summary}")
    return code


if __name__ == "__main__":
    sys.exit(main())
