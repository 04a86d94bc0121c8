"""Batch command-line front end.

Subcommands
-----------
solve          run the estimation loop and report the dominant peak
spectrum       report every peak at or above the detection threshold
trotter-bench  operator-error / wall-time sweep over slice counts
resources      qubit-budget estimate for an n-particle run
oracle-check   exact distribution + collapse-fidelity audit (small systems)

Configuration is a JSON object; unknown keys are rejected so a typo cannot
silently fall back to a default.  Command-line flags override config values.
File outputs are written to a temporary file and renamed into place, so a
nonzero exit never leaves a partial artifact behind.

Exit codes: 0 success; 2 config error (the message names the offending key);
3 runtime contract violation (e.g. norm drift); 4 failed oracle audit.

The ``SPECTRAL_QPE_LOG`` environment variable selects the log level
(``error``, ``warn``, ``info``, ``debug``; default ``warn``).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time as _time

import numpy as np

from . import hamiltonian as ham
from . import oracle
from . import phase_estimation as pe
from . import problems
from . import statevector as sv
from .errors import ContractViolation

log = logging.getLogger("spectral_qpe.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_AUDIT = 4

DISTRIBUTION_TOL = 1e-10
COLLAPSE_FIDELITY_TOL = 1e-9
POPULATED_BIN_FLOOR = 1e-9

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_PROBLEM_KEYS = {
    "tfim": {"sites", "coupling", "field"},
    "grid": {"system_qubits", "mass", "potential"},
    "explicit_terms": {"system_qubits", "terms"},
    "explicit_unitary": {"unitary"},
}
_RUN_KEYS = {
    "problem", "m_index", "time", "slices", "trials", "seed",
    "power_method", "threshold", "guess", "out",
}
_BENCH_KEYS = {"problem", "time", "slice_sweep", "out"}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


class AuditFailure(Exception):
    """An oracle-check invariant did not hold; the message names it."""


# ---------------------------------------------------------------------------
# config ingestion


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def _check_keys(cfg: dict, allowed: set[str]) -> None:
    for key in cfg:
        if key not in allowed:
            raise ConfigError(f'unknown key "{key}"')


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f'missing required key "{key}"')
    return cfg[key]


def _as_int(value, key: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'key "{key}": expected an integer, got {value!r}')
    if minimum is not None and value < minimum:
        raise ConfigError(f'key "{key}": must be >= {minimum}, got {value}')
    return value


def _as_real(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'key "{key}": expected a number, got {value!r}')
    if not math.isfinite(value):
        raise ConfigError(f'key "{key}": must be finite, got {value!r}')
    return float(value)


def _as_complex(value, key: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f'key "{key}": entries must be numbers or [re, im] pairs')


def _as_complex_matrix(value, key: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f'key "{key}": expected a non-empty matrix (list of rows)')
    rows = []
    width = None
    for row in value:
        if not isinstance(row, list):
            raise ConfigError(f'key "{key}": expected a matrix (list of rows)')
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ConfigError(f'key "{key}": rows have inconsistent lengths')
        rows.append([_as_complex(entry, key) for entry in row])
    return np.asarray(rows, dtype=np.complex128)


def _as_complex_vector(value, key: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f'key "{key}": expected a non-empty list')
    return np.asarray([_as_complex(v, key) for v in value], dtype=np.complex128)


def _parse_slices(value):
    """Config/flag slice count: a positive integer or the string "exact"."""
    if value == "exact":
        return "exact"
    return _as_int(value, "slices", minimum=1)


# ---------------------------------------------------------------------------
# problem construction


class _Problem:
    """A validated problem: system size plus exactly one evolution source."""

    def __init__(self, kind, l_system, hamiltonian=None, recipe=None, unitary=None):
        self.kind = kind
        self.l_system = l_system
        self.hamiltonian = hamiltonian
        self.recipe = recipe
        self.unitary = unitary

    def dense_hamiltonian(self) -> np.ndarray | None:
        """Dense Hermitian matrix when the oracle is feasible, else None."""
        if self.recipe is not None:
            return self.recipe.dense_hamiltonian()
        if self.hamiltonian is not None and self.l_system <= oracle.MAX_DENSE_QUBITS:
            return oracle.assemble_dense(self.hamiltonian)
        return None


def _build_problem(cfg: dict) -> _Problem:
    kind = _require(cfg, "problem")
    if kind not in _PROBLEM_KEYS:
        choices = ", ".join(sorted(_PROBLEM_KEYS))
        raise ConfigError(f'key "problem": must be one of {choices}, got {kind!r}')
    try:
        if kind == "tfim":
            sites = _as_int(_require(cfg, "sites"), "sites", minimum=2)
            coupling = _as_real(cfg.get("coupling", 1.0), "coupling")
            field = _as_real(cfg.get("field", 1.0), "field")
            hs = problems.build_transverse_ising(sites, coupling, field)
            return _Problem(kind, sites, hamiltonian=hs)
        if kind == "grid":
            l_system = _as_int(_require(cfg, "system_qubits"), "system_qubits", minimum=1)
            mass = _as_real(cfg.get("mass", 1.0), "mass")
            potential = cfg.get("potential", "zero")
            if isinstance(potential, list):
                potential = [_as_real(v, "potential") for v in potential]
            elif not isinstance(potential, str):
                raise ConfigError(
                    'key "potential": expected a builtin name or a list of samples'
                )
            recipe = problems.build_grid_particle(l_system, potential, mass)
            return _Problem(kind, l_system, recipe=recipe)
        if kind == "explicit_terms":
            l_system = _as_int(_require(cfg, "system_qubits"), "system_qubits", minimum=1)
            raw_terms = _require(cfg, "terms")
            if not isinstance(raw_terms, list) or not raw_terms:
                raise ConfigError('key "terms": expected a non-empty list')
            terms = []
            for i, spec in enumerate(raw_terms):
                label = f"terms[{i}]"
                if not isinstance(spec, dict):
                    raise ConfigError(f'key "{label}": expected an object')
                for sub in spec:
                    if sub not in ("support", "matrix"):
                        raise ConfigError(f'key "{label}": unknown key "{sub}"')
                support = _require_term_support(spec, label)
                if "matrix" not in spec:
                    raise ConfigError(f'key "{label}": missing required key "matrix"')
                matrix = _as_complex_matrix(spec["matrix"], f"{label}.matrix")
                terms.append(ham.LocalTerm(support, matrix))
            hs = ham.HamiltonianSum(terms, l_system)
            return _Problem(kind, l_system, hamiltonian=hs)
        # explicit_unitary
        matrix = _as_complex_matrix(_require(cfg, "unitary"), "unitary")
        gate = sv.GateMatrix(matrix)
        return _Problem(kind, gate.arity, unitary=gate)
    except ValueError as exc:
        raise ConfigError(f'problem "{kind}" is invalid: {exc}') from exc


def _require_term_support(spec: dict, label: str) -> list[int]:
    if "support" not in spec:
        raise ConfigError(f'key "{label}": missing required key "support"')
    support = spec["support"]
    if not isinstance(support, list) or not support:
        raise ConfigError(f'key "{label}.support": expected a non-empty list of qubits')
    return [_as_int(q, f"{label}.support", minimum=0) for q in support]


def _build_guess(cfg: dict, l_system: int) -> tuple[sv.StateVector, object]:
    """Initial system state V_a from the "guess" key; default uniform (+)^l."""
    raw = cfg.get("guess", "plus")
    try:
        if raw == "plus":
            dim = 2**l_system
            return sv.load_amplitudes(l_system, np.full(dim, 1 / math.sqrt(dim))), raw
        if raw == "zero":
            return sv.new_basis_state(l_system, 0), raw
        if isinstance(raw, dict):
            keys = set(raw)
            if keys == {"amplitudes"}:
                amps = _as_complex_vector(raw["amplitudes"], "guess.amplitudes")
                return sv.load_amplitudes(l_system, amps), raw
            if keys == {"product"}:
                factors = raw["product"]
                if not isinstance(factors, list):
                    raise ConfigError('key "guess.product": expected a list of pairs')
                pairs = [_as_complex_vector(f, "guess.product") for f in factors]
                return problems.product_state_guess(l_system, pairs), raw
            raise ConfigError(
                'key "guess": object form must have exactly one of '
                '"amplitudes" or "product"'
            )
        raise ConfigError(
            f'key "guess": expected "plus", "zero", or an object, got {raw!r}'
        )
    except ValueError as exc:
        raise ConfigError(f'key "guess": {exc}') from exc


# ---------------------------------------------------------------------------
# run assembly (solve / spectrum / oracle-check share this)


class _Run:
    """Everything a sampling command needs, validated and materialized."""

    def __init__(self, cfg: dict, *, need_exact: bool = False):
        self.problem = _build_problem(cfg)
        self.m_index = _as_int(_require(cfg, "m_index"), "m_index", minimum=1)
        self.time = _as_real(_require(cfg, "time"), "time")
        if self.time == 0.0:
            raise ConfigError('key "time": must be nonzero')
        self.trials = _as_int(cfg.get("trials", 1), "trials", minimum=1)
        self.seed = _as_int(cfg.get("seed", 0), "seed", minimum=0)
        if self.seed >= 2**64:
            raise ConfigError(f'key "seed": must fit in 64 bits, got {self.seed}')
        self.power_method = cfg.get("power_method", "binary_power")
        if self.power_method not in ("binary_power", "flag_loop"):
            raise ConfigError(
                'key "power_method": must be "binary_power" or "flag_loop", '
                f"got {self.power_method!r}"
            )
        self.slices = _parse_slices(cfg["slices"]) if "slices" in cfg else "exact"
        if self.problem.kind == "explicit_unitary" and "slices" in cfg:
            raise ConfigError('key "slices": not meaningful for an explicit unitary')
        if "threshold" in cfg:
            self.threshold = _as_real(cfg["threshold"], "threshold")
            if self.threshold <= 0:
                raise ConfigError(
                    f'key "threshold": must be > 0, got {self.threshold}'
                )
        else:
            self.threshold = pe.default_peak_threshold(self.trials)
        self.out = cfg.get("out", "qpe_run")
        if not isinstance(self.out, str) or not self.out:
            raise ConfigError('key "out": expected a non-empty path stem')

        work = 1 if self.power_method == "flag_loop" else 0
        try:
            self.layout = sv.RegisterLayout(self.m_index, self.problem.l_system, work)
        except ValueError as exc:
            raise ConfigError(
                f"register layout (m_index/system size/work flag) is invalid: {exc}"
            ) from exc
        self.guess, self.guess_json = _build_guess(cfg, self.problem.l_system)
        if need_exact and self.slices != "exact":
            log.info("oracle audit always runs exact evolution; ignoring slices=%r",
                     self.slices)
            self.slices = "exact"
        self.pe_config = self._make_pe_config()

    def _make_pe_config(self) -> pe.PhaseEstimationConfig:
        common = dict(
            layout=self.layout,
            time=None,
            trials=self.trials,
            seed=self.seed,
            power_method=self.power_method,
        )
        problem = self.problem
        try:
            if problem.kind == "explicit_unitary":
                common["time"] = self.time
                return pe.PhaseEstimationConfig(unitary=problem.unitary, **common)
            if self.slices == "exact":
                dense = problem.dense_hamiltonian()
                if dense is None:
                    raise ConfigError(
                        'key "slices": "exact" needs a system of at most '
                        f"{oracle.MAX_DENSE_QUBITS} qubits; set an explicit slice count"
                    )
                common["time"] = self.time
                return pe.PhaseEstimationConfig(
                    unitary=_exact_gate(dense, self.time), **common
                )
            evolution = ham.EvolutionParams(time=self.time, slices=self.slices)
            if problem.recipe is not None:
                return pe.PhaseEstimationConfig(
                    recipe=problem.recipe, evolution=evolution, **common
                )
            return pe.PhaseEstimationConfig(
                hamiltonian=problem.hamiltonian, evolution=evolution, **common
            )
        except ValueError as exc:
            raise ConfigError(f"run configuration is inconsistent: {exc}") from exc

    def resolved_config(self, cfg: dict) -> dict:
        """Canonical post-override config for the result record.

        Execution knobs that cannot change result content (output path,
        thread count) are deliberately left out so reruns stay
        byte-identical.
        """
        resolved = {
            "problem": self.problem.kind,
            "m_index": self.m_index,
            "time": self.time,
            "slices": self.slices,
            "trials": self.trials,
            "seed": self.seed,
            "power_method": self.power_method,
            "threshold": self.threshold,
            "guess": self.guess_json,
        }
        for key in sorted(_PROBLEM_KEYS[self.problem.kind]):
            if key in cfg:
                resolved[key] = cfg[key]
        return resolved

    def warn_if_aliased(self) -> None:
        dense = self.problem.dense_hamiltonian()
        if dense is None:
            return
        window = math.pi / abs(self.time)
        extreme = float(np.abs(oracle.eigendecompose(dense).eigenvalues).max())
        if extreme > window:
            log.warning(
                "spectral radius %.6g exceeds the unaliased window (-%.6g, %.6g]; "
                "reported energies may be aliased — reduce time below %.6g",
                extreme, window, window, math.pi / extreme,
            )


def _exact_gate(dense: np.ndarray, t: float) -> sv.GateMatrix:
    decomposition = oracle.eigendecompose(dense)
    v = decomposition.eigenvectors
    matrix = (v * np.exp(-1j * decomposition.eigenvalues * t)) @ v.conj().T
    return sv.GateMatrix(matrix)


# ---------------------------------------------------------------------------
# output files


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".spectral_qpe_")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _g(x: float) -> str:
    """Locale-independent real formatting at full round-trip precision."""
    return format(float(x), ".17g")


def _histogram_csv(run: _Run, counts: np.ndarray) -> str:
    bins = run.layout.num_bins
    lines = ["bin,phase_radians,energy,probability,counts"]
    for j in range(bins):
        phase = 2.0 * math.pi * j / bins
        energy = pe.phase_to_energy(phase, run.time)
        lines.append(
            f"{j},{_g(phase)},{_g(energy)},{_g(counts[j] / run.trials)},{int(counts[j])}"
        )
    return "\n".join(lines) + "\n"


def _peak_record(run: _Run, bin_index: int, counts: np.ndarray,
                 collapsed: sv.StateVector | None, dense: np.ndarray | None) -> dict:
    bins = run.layout.num_bins
    phase = 2.0 * math.pi * bin_index / bins
    energy = pe.phase_to_energy(phase, run.time)
    fidelity = None
    if dense is not None and collapsed is not None:
        bin_width = 2.0 * math.pi / (bins * abs(run.time))
        try:
            fidelity = pe.eigenvector_fidelity(collapsed, dense, energy, bin_width)
        except ValueError:
            log.warning("peak at bin %d matches no oracle eigenvalue within %.3g",
                        bin_index, bin_width)
    return {
        "bin": bin_index,
        "phase_radians": phase,
        "energy": energy,
        "probability": float(counts[bin_index] / run.trials),
        "counts": int(counts[bin_index]),
        "eigenvector_fidelity": fidelity,
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args: argparse.Namespace, *, spectrum: bool) -> int:
    cfg = _merged_config(args)
    kind = cfg.get("problem")
    allowed = _RUN_KEYS | _PROBLEM_KEYS.get(kind, set())
    _check_keys(cfg, allowed)
    run = _Run(cfg)
    run.warn_if_aliased()

    threads = getattr(args, "threads", 1)
    result = pe.sample_spectrum(
        run.guess, run.pe_config, threshold=run.threshold, threads=threads
    )
    counts = result.histogram.counts
    dense = run.problem.dense_hamiltonian()

    dominant_bin = int(np.argmax(counts))
    collapsed_by_bin = {b: vec for (b, _), vec in zip(result.peaks, result.eigenvectors)}
    if dominant_bin not in collapsed_by_bin:
        for sample in result.samples:
            if sample.bin == dominant_bin:
                collapsed_by_bin[dominant_bin] = sample.collapsed_state
                break
    dominant = _peak_record(run, dominant_bin, counts,
                            collapsed_by_bin.get(dominant_bin), dense)

    if spectrum:
        peaks = [
            _peak_record(run, b, counts, vec, dense)
            for (b, _), vec in zip(result.peaks, result.eigenvectors)
        ]
        if not peaks:
            log.warning("no peaks at or above threshold %.6g", run.threshold)
    else:
        peaks = [dominant]

    record = {
        "command": "spectrum" if spectrum else "solve",
        "config": run.resolved_config(cfg),
        "trials": run.trials,
        "seed": run.seed,
        "dominant": dominant,
        "peaks": peaks,
    }
    csv_path = f"{run.out}.histogram.csv"
    json_path = f"{run.out}.result.json"
    _write_atomic(csv_path, _histogram_csv(run, counts))
    _write_atomic(json_path, json.dumps(record, sort_keys=True, indent=2) + "\n")

    for entry in peaks:
        print(
            f"bin {entry['bin']}: energy {entry['energy']:.10g}, "
            f"weight {entry['probability']:.6g} ({entry['counts']}/{run.trials})"
        )
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    return _cmd_sample(args, spectrum=False)


def cmd_spectrum(args: argparse.Namespace) -> int:
    return _cmd_sample(args, spectrum=True)


def cmd_trotter_bench(args: argparse.Namespace) -> int:
    cfg = _merged_config(args)
    kind = cfg.get("problem")
    allowed = _BENCH_KEYS | _PROBLEM_KEYS.get(kind, set())
    _check_keys(cfg, allowed)
    problem = _build_problem(cfg)
    if problem.kind == "explicit_unitary":
        raise ConfigError(
            'key "problem": trotter-bench needs a Hamiltonian-bearing problem'
        )
    t = _as_real(_require(cfg, "time"), "time")
    if t == 0.0:
        raise ConfigError('key "time": must be nonzero')
    sweep_raw = _require(cfg, "slice_sweep")
    if not isinstance(sweep_raw, list) or not sweep_raw:
        raise ConfigError('key "slice_sweep": expected a non-empty list of integers')
    sweep = [_as_int(r, "slice_sweep", minimum=1) for r in sweep_raw]
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError('key "slice_sweep": slice counts must be strictly increasing')
    dense = problem.dense_hamiltonian()
    if dense is None:
        raise ConfigError(
            'key "system_qubits": system too large for the exact reference '
            f"(needs <= {oracle.MAX_DENSE_QUBITS} qubits)"
        )
    out = cfg.get("out", "qpe_run")
    if not isinstance(out, str) or not out:
        raise ConfigError('key "out": expected a non-empty path stem')

    exact = _exact_gate(dense, t).matrix
    lines = ["r,operator_error,wall_seconds"]
    for r in sweep:
        started = _time.perf_counter()
        approx = _trotterized_dense(problem, t, r)
        error = float(np.abs(approx - exact).max())
        elapsed = _time.perf_counter() - started
        lines.append(f"{r},{_g(error)},{_g(elapsed)}")
        log.info("r=%d operator error %.3e (%.3fs)", r, error, elapsed)
    csv_path = f"{out}.trotter.csv"
    _write_atomic(csv_path, "\n".join(lines) + "\n")
    print(f"wrote {csv_path}")
    return EXIT_OK


def _trotterized_dense(problem: _Problem, t: float, r: int) -> np.ndarray:
    """Dense matrix of r evolution slices, composed exactly as the simulator does."""
    dt = t / r
    if problem.recipe is not None:
        step = problem.recipe.step_matrix(dt)
    else:
        dim = 2**problem.l_system
        step = np.eye(dim, dtype=np.complex128)
        for term in problem.hamiltonian.terms:
            gate = ham.term_exponential(term, dt)
            embedded = oracle.embed_operator(gate.matrix, term.support, problem.l_system)
            step = embedded @ step
    return np.linalg.matrix_power(step, r)


def cmd_resources(args: argparse.Namespace) -> int:
    try:
        estimate = problems.resource_estimate(
            args.particles,
            args.qubits_per_particle,
            args.index_qubits,
            args.scratch_qubits,
            position_space_qubits_per_particle=args.position_qubits_per_particle,
            interacting_pair_in_position_space=args.pair_in_position_space,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        ("particles", estimate.particles),
        ("qubits_per_particle", estimate.qubits_per_particle),
        ("index_qubits", estimate.index_qubits),
        ("scratch_qubits", estimate.scratch_qubits),
        ("position_space_qubits_per_particle",
         estimate.position_space_qubits_per_particle),
        ("interacting_pair_in_position_space",
         "yes" if estimate.interacting_pair_in_position_space else "no"),
        ("total", estimate.total),
    ]
    for name, value in rows:
        print(f"{name:<36} {value}")
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    cfg = _merged_config(args)
    kind = cfg.get("problem")
    allowed = _RUN_KEYS | _PROBLEM_KEYS.get(kind, set())
    _check_keys(cfg, allowed)
    run = _Run(cfg, need_exact=True)
    if run.problem.kind == "explicit_unitary":
        raise ConfigError(
            'key "problem": oracle-check needs a Hamiltonian-bearing problem'
        )
    dense = run.problem.dense_hamiltonian()
    if dense is None:
        raise ConfigError(
            'key "system_qubits": oracle-check needs a system of at most '
            f"{oracle.MAX_DENSE_QUBITS} qubits"
        )
    corrupt = bool(getattr(args, "corrupt_qft_sign", False))

    decomposition = oracle.eigendecompose(dense)
    components = oracle.spectral_components(run.guess, decomposition, run.time)
    analytic = pe.analytic_bin_distribution(components, run.m_index)

    pre = pe.pre_measurement_state(run.guess, run.pe_config,
                                   _corrupt_qft_sign=corrupt)
    simulated = sv.register_distribution(pre, run.layout.index_qubits)
    deviation = float(np.abs(simulated - analytic).max())
    if deviation > DISTRIBUTION_TOL:
        raise AuditFailure(
            f"distribution check: max per-bin deviation {deviation:.3e} "
            f"exceeds {DISTRIBUTION_TOL:g}"
        )

    # Collapse audit: conditioning on each populated readout bin must land on
    # the spectrally predicted mixture of eigenvectors.
    bins = run.layout.num_bins
    coefficients = decomposition.eigenvectors.conj().T @ run.guess.amplitudes
    omegas = np.mod(-decomposition.eigenvalues * run.time, 2.0 * math.pi)
    steps = np.arange(bins)
    worst_bin, worst = -1, 1.0
    for j in np.nonzero(analytic > POPULATED_BIN_FLOOR)[0]:
        detune = omegas - 2.0 * math.pi * j / bins
        kernel = np.exp(1j * np.outer(steps, detune)).sum(axis=0) / bins
        predicted = decomposition.eigenvectors @ (coefficients * kernel)
        predicted /= np.linalg.norm(predicted)
        collapsed = pe._collapse_at_bin(pre, run.layout, int(j))
        fidelity = float(abs(np.vdot(predicted, collapsed.amplitudes)) ** 2)
        if fidelity < worst:
            worst_bin, worst = int(j), fidelity
        if fidelity < 1.0 - COLLAPSE_FIDELITY_TOL:
            raise AuditFailure(
                f"eigenvector-fidelity audit: bin {int(j)} fidelity {fidelity:.12f} "
                f"below 1 - {COLLAPSE_FIDELITY_TOL:g}"
            )
    print(f"distribution check: max per-bin deviation {deviation:.3e}")
    if worst_bin >= 0:
        print(f"eigenvector-fidelity audit: worst fidelity {worst:.12f} "
              f"at bin {worst_bin}")
    print("oracle check passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _merged_config(args: argparse.Namespace) -> dict:
    """Config file contents with command-line overrides folded in."""
    cfg = _load_config(args.config)
    overrides = {
        "seed": getattr(args, "seed", None),
        "m_index": getattr(args, "index_qubits", None),
        "time": getattr(args, "time", None),
        "slices": getattr(args, "slices", None),
        "trials": getattr(args, "trials", None),
        "threshold": getattr(args, "threshold", None),
        "out": getattr(args, "out", None),
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    return cfg


def _add_run_flags(parser: argparse.ArgumentParser, *, sampling: bool) -> None:
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--time", type=float, metavar="F",
                        help="override evolution time")
    parser.add_argument("--out", metavar="PATH", help="override output path stem")
    if sampling:
        parser.add_argument("--index-qubits", type=int, metavar="N",
                            help="override m_index")
        parser.add_argument("--seed", type=int, metavar="U64",
                            help="override the sampling seed")
        parser.add_argument("--slices", type=_parse_slices, metavar="N|exact",
                            help="override the slice count")
        parser.add_argument("--trials", type=int, metavar="N",
                            help="override the trial count")
        parser.add_argument("--threshold", type=float, metavar="F",
                            help="override the peak detection threshold")
        parser.add_argument("--threads", type=int, default=1, metavar="N",
                            help="measurement-sampling threads (content-neutral)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-qpe",
        description="Eigenvalue estimation runs, benchmarks, and audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="estimate the dominant eigenvalue")
    _add_run_flags(solve, sampling=True)
    solve.set_defaults(handler=cmd_solve)

    spectrum = sub.add_parser("spectrum", help="report all peaks above threshold")
    _add_run_flags(spectrum, sampling=True)
    spectrum.set_defaults(handler=cmd_spectrum)

    bench = sub.add_parser("trotter-bench",
                           help="operator-error sweep over slice counts")
    _add_run_flags(bench, sampling=False)
    bench.set_defaults(handler=cmd_trotter_bench)

    resources = sub.add_parser("resources", help="qubit budget for a run")
    resources.add_argument("--particles", type=int, required=True)
    resources.add_argument("--qubits-per-particle", type=int, required=True)
    resources.add_argument("--index-qubits", type=int, required=True)
    resources.add_argument("--scratch-qubits", type=int, default=3)
    resources.add_argument("--position-qubits-per-particle", type=int, default=0)
    resources.add_argument("--pair-in-position-space", action="store_true")
    resources.set_defaults(handler=cmd_resources)

    check = sub.add_parser("oracle-check",
                           help="audit the pipeline against closed-form results")
    _add_run_flags(check, sampling=True)
    check.add_argument("--corrupt-qft-sign", action="store_true",
                       help=argparse.SUPPRESS)
    check.set_defaults(handler=cmd_oracle_check)
    return parser


def _configure_logging() -> None:
    name = os.environ.get("SPECTRAL_QPE_LOG", "warn")
    level = _LOG_LEVELS.get(name)
    if level is None:
        raise ConfigError(
            'environment variable "SPECTRAL_QPE_LOG" must be one of '
            f"error, warn, info, debug; got {name!r}"
        )
    package_log = logging.getLogger("spectral_qpe")
    if not package_log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        package_log.addHandler(handler)
    package_log.setLevel(level)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging()
        if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
            raise ConfigError('flag "--threads": must be >= 1')
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"runtime contract violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except AuditFailure as exc:
        print(f"oracle check failed: {exc}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
