"""
Analysis module for spinchain-qst
What to learn here: Turning many protocol runs into pandas tables, deciding
between competing closed forms by simulation instead of by assumption, and
reporting entanglement through reduced-state entropies.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .chain_models import ChainModel, ChainSpec, critical_time
from .config import Config
from .dense_engine import evolve
from .errors import InvalidStateError, UnsupportedModelError
from .fermion_engine import optimize_transfer_time
from .protocol import MediumSpec, closed_form_pure, run_protocol, run_unprojected_N
from .quantum_core import (
    X,
    SingleQubitState,
    StateVector,
    bloch_state,
    entropy,
    expectation,
    ket,
    partial_trace,
    random_mixed_state,
    random_pure_state,
    state_fidelity,
    tensor,
)
from .utils import make_rng, setup_logging

logger = setup_logging()

DECISION_MARGIN = 1e-3
DEFAULT_P00_GRID = tuple(np.linspace(0.0, 1.0, 11))
DEFAULT_MEDIA = (
    "ProductZ",
    "XEigenstates",
    "Thermal(0)",
    "Thermal(0.5)",
    "Thermal(2)",
    "MaximallyMixed",
    "RandomPure",
    "RandomMixed",
)
_PLAIN_MEDIA = ("ProductZ", "XEigenstates", "MaximallyMixed", "RandomPure", "RandomMixed")


def real_amplitude_state(theta: float) -> StateVector:
    """cos(theta)|0> + sin(theta)|1>"""
    return bloch_state(2 * theta)


def _diagonal_spin_n(p00: float, gamma: complex = 0.0) -> SingleQubitState:
    return SingleQubitState(np.array([[p00, gamma], [np.conj(gamma), 1.0 - p00]], dtype=complex))


class P00SweepReport:
    """Simulated fidelity against both admixture laws over a p00 grid"""

    def __init__(self, psi_label: str, x_expectation: float, grid: np.ndarray, simulated: np.ndarray):
        if np.any(simulated < -Config.FIDELITY_TOL) or np.any(simulated > 1 + Config.FIDELITY_TOL):
            raise InvalidStateError("Simulated fidelities left [0, 1]")
        self.psi_label = psi_label
        self.x_expectation = x_expectation
        self.grid = grid
        self.simulated = simulated
        self.candidate_linear = grid + (1 - grid) * x_expectation
        self.candidate_squared = grid + (1 - grid) * x_expectation ** 2
        self.deviation_linear = float(np.max(np.abs(simulated - self.candidate_linear)))
        self.deviation_squared = float(np.max(np.abs(simulated - self.candidate_squared)))
        self.winner = decide_winner(self.deviation_linear, self.deviation_squared)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "psi": self.psi_label,
            "x_expectation": self.x_expectation,
            "p00": self.grid,
            "simulated": self.simulated,
            "candidate_linear": self.candidate_linear,
            "candidate_squared": self.candidate_squared,
            "winner": self.winner,
        })


def decide_winner(deviation_linear: float, deviation_squared: float) -> str:
    """'linear', 'squared', or 'indistinguishable' when the gap is below the margin"""
    if abs(deviation_linear - deviation_squared) < DECISION_MARGIN:
        return "indistinguishable"
    return "linear" if deviation_linear < deviation_squared else "squared"


def p00_sweep(
    spec: ChainSpec,
    psi: StateVector,
    grid: Optional[Sequence[float]] = None,
    psi_label: str = "psi",
    m1_outcome: int = 1,
) -> P00SweepReport:
    """Run the unprojected protocol with rho_N = diag(p00, 1-p00) for every grid point"""
    if spec.model != ChainModel.ISING_ENGINEERED:
        raise UnsupportedModelError("p00 sweeps are defined for the Ising chain")
    grid = np.asarray(DEFAULT_P00_GRID if grid is None else grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > 1):
        raise InvalidStateError("p00 grid must lie in [0, 1]")
    medium = MediumSpec.product_z("0" * (spec.n_sites - 2))
    simulated = np.array([
        run_unprojected_N(spec, psi, medium, _diagonal_spin_n(p), m1_outcome=m1_outcome)[1]
        for p in grid
    ])
    report = P00SweepReport(psi_label, expectation(psi, X), grid, simulated)
    logger.info(
        f"p00 sweep {psi_label}: linear dev {report.deviation_linear:.3e}, "
        f"squared dev {report.deviation_squared:.3e} -> {report.winner}"
    )
    return report


def purity_law_scan(
    spec: ChainSpec,
    thetas: Iterable[float],
    grid: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """p00 sweeps for psi = cos(theta)|0> + sin(theta)|1> over a theta grid"""
    frames = []
    for theta in thetas:
        report = p00_sweep(spec, real_amplitude_state(theta), grid, psi_label=f"theta={theta:.12g}")
        frame = report.to_frame()
        frame.insert(0, "theta", theta)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    table["winner"] = overall_winner(table)
    return table


def overall_winner(table: pd.DataFrame) -> str:
    """Decide the fidelity law from the whole theta x p00 table"""
    dev_linear = float((table["simulated"] - table["candidate_linear"]).abs().max())
    dev_squared = float((table["simulated"] - table["candidate_squared"]).abs().max())
    return decide_winner(dev_linear, dev_squared)


def coherence_scan(
    spec: ChainSpec,
    psi: StateVector,
    p00: float,
    gammas: Sequence[complex],
    medium_bits: Optional[str] = None,
) -> np.ndarray:
    """Fidelity for rho_N = [[p00, g], [g*, 1-p00]] over the given coherences"""
    medium = MediumSpec.product_z(medium_bits if medium_bits is not None else "0" * (spec.n_sites - 2))
    limit = np.sqrt(p00 * (1 - p00))
    fidelities = []
    for gamma in gammas:
        if abs(gamma) > limit + Config.STRUCT_TOL:
            raise InvalidStateError(f"|gamma|={abs(gamma)} exceeds sqrt(p00(1-p00))={limit}")
        fidelities.append(run_unprojected_N(spec, psi, medium, _diagonal_spin_n(p00, gamma), m1_outcome=1)[1])
    return np.array(fidelities)


def parse_medium_name(name: str) -> Tuple[str, Optional[float]]:
    """Split a variant name into (family, beta); only 'Thermal(b)' carries a beta"""
    if name in _PLAIN_MEDIA:
        return name, None
    if name.startswith("Thermal(") and name.endswith(")"):
        text = name[len("Thermal("):-1]
        try:
            beta = float(text)
        except ValueError as e:
            raise InvalidStateError(f"Thermal medium needs a numeric beta, got '{text}'") from e
        if not np.isfinite(beta) or beta < 0:
            raise InvalidStateError(f"Thermal beta must be finite and non-negative, got {beta}")
        return "Thermal", beta
    raise InvalidStateError(f"Unknown medium variant '{name}'")


def medium_for(name: str, n_sites: int, rng: np.random.Generator) -> MediumSpec:
    """Draw a concrete MediumSpec for a variant name"""
    family, beta = parse_medium_name(name)
    m = n_sites - 2
    if family == "ProductZ":
        return MediumSpec.product_z("".join(rng.choice(["0", "1"], size=m)))
    if family == "XEigenstates":
        return MediumSpec.x_eigenstates("".join(rng.choice(["+", "-"], size=m)))
    if family == "Thermal":
        return MediumSpec.thermal(beta)
    if family == "MaximallyMixed":
        return MediumSpec.maximally_mixed()
    if family == "RandomPure":
        return MediumSpec.random_pure(int(rng.integers(2 ** 31)))
    return MediumSpec.random_mixed(int(rng.integers(2 ** 31)))


def medium_sweep(
    model: ChainModel,
    n_range: Iterable[int],
    media: Sequence[str] = DEFAULT_MEDIA,
    pure_inputs: int = 20,
    mixed_inputs: int = 5,
    seed: Optional[int] = None,
    j_scale: float = 1.0,
    end_coupling_ratio: Optional[float] = None,
) -> pd.DataFrame:
    """
    Min and mean post-correction fidelity per (N, medium) cell, over random
    pure and mixed inputs and both forced outcome products.
    """
    for name in media:
        parse_medium_name(name)
    rng = make_rng(seed)
    rows: List[Dict] = []
    for n in n_range:
        spec = ChainSpec(model=model, n_sites=n, j_scale=j_scale, end_coupling_ratio=end_coupling_ratio)
        time = None
        if model == ChainModel.XX_HOMOGENEOUS:
            time, _, _ = optimize_transfer_time(spec)
        for name in media:
            medium = medium_for(name, n, rng)
            inputs = [random_pure_state(1, seed=int(rng.integers(2 ** 31))) for _ in range(pure_inputs)]
            inputs += [random_mixed_state(1, seed=int(rng.integers(2 ** 31))) for _ in range(mixed_inputs)]
            fidelities = [
                run_protocol(spec, state, medium, n_outcome=1, m1_outcome=m1, time=time).fidelity
                for state in inputs
                for m1 in (1, -1)
            ]
            rows.append({
                "model": model.value,
                "n_sites": n,
                "medium": name,
                "medium_instance": medium.describe(),
                "runs": len(fidelities),
                "min_fidelity": float(np.min(fidelities)),
                "mean_fidelity": float(np.mean(fidelities)),
            })
            logger.info(f"{spec.label} {medium.describe()}: min fidelity {rows[-1]['min_fidelity']:.12f}")
    return pd.DataFrame(rows)


class EntanglementReport:
    """Entropies (bits) of the state after evolution, before any measurement"""

    def __init__(
        self,
        n_sites: int,
        x_expectation: float,
        cut_entropies: List[float],
        site_entropies: List[float],
    ):
        if min(cut_entropies + site_entropies) < -1e-9:
            raise InvalidStateError("Negative entropy")
        self.n_sites = n_sites
        self.x_expectation = x_expectation
        # cut_entropies[k-1] is the entropy of sites 1..k
        self.cut_entropies = cut_entropies
        self.site_entropies = site_entropies

    @property
    def spin1_entropy(self) -> float:
        return self.site_entropies[0]

    @property
    def ghz_proxy(self) -> float:
        """Entropy of the receiving spin; 1 bit at <X> = 0, 0 at <X> = ±1"""
        return self.site_entropies[-1]

    def to_record(self) -> Dict:
        return {
            "n_sites": self.n_sites,
            "x_expectation": self.x_expectation,
            "cut_entropies": self.cut_entropies,
            "site_entropies": self.site_entropies,
            "spin1_entropy": self.spin1_entropy,
            "ghz_proxy_spin_n_entropy": self.ghz_proxy,
        }


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def entanglement_report(
    spec: ChainSpec,
    psi: StateVector,
    medium: Union[str, StateVector, None],
) -> EntanglementReport:
    """Cut and single-site entropies of the pure closed-form output state"""
    state = closed_form_pure(spec, psi, medium)
    n = spec.n_sites
    cuts = [entropy(partial_trace(state, range(1, k + 1))) for k in range(1, n)]
    sites = [entropy(partial_trace(state, [k])) for k in range(1, n + 1)]
    return EntanglementReport(n, expectation(psi, X), cuts, sites)


def x_eigenstate_factorization(spec: ChainSpec, psi: StateVector, labels: str) -> Dict[int, float]:
    """
    For each medium site j labelled '+' or '-', the fidelity of spin N-j+1
    with that X eigenstate after evolution to t* (before measurement).
    """
    if spec.model != ChainModel.ISING_ENGINEERED:
        raise UnsupportedModelError("X-eigenstate factorization is a property of the Ising chain")
    n = spec.n_sites
    if len(labels) != n - 2:
        raise InvalidStateError(f"Need {n - 2} medium labels, got {len(labels)}")
    factors = [psi] + ([ket(labels)] if labels else []) + [ket("0")]
    evolved = evolve(spec, critical_time(spec), tensor(*factors))
    result = {}
    for offset, label in enumerate(labels):
        if label not in "+-":
            continue
        j = offset + 2
        mirror = n - j + 1
        result[mirror] = state_fidelity(partial_trace(evolved, [mirror]), ket(label))
    return result


def main():
    """
    Decide the purity law and print an entanglement summary.
    Run: python -m src.analysis
    """
    spec = ChainSpec(model=ChainModel.ISING_ENGINEERED, n_sites=4)
    table = purity_law_scan(spec, np.linspace(0, np.pi / 2, 9))
    print(f"Fidelity law winner: {table['winner'].iloc[0]}")
    for theta in (0.0, np.pi / 8, np.pi / 4):
        report = entanglement_report(spec, real_amplitude_state(theta), "01")
        print(f"theta={theta:.4f} <X>={report.x_expectation:+.4f} proxy={report.ghz_proxy:.6f}")


if __name__ == "__main__":
    main()
