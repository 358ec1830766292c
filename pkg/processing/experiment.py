"""
Seeded Monte Carlo experiments: NMSE of the estimated blockage coefficients
against the number of measurements or the SNR, for every configured method
on identical per-trial data.
"""

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

import config
from diagnosis import numerics
from diagnosis.baselines import default_omp_threshold, omp, oracle_ls, plain_ce
from diagnosis.ce import CEConfig, DiagnosisReport, run_ce_aad
from diagnosis.errors import AADError, ConfigError
from diagnosis.joint import run_joint_ce_aad
from diagnosis.metrics import exact_support, nmse
from processing.fixtures import Fixture
from processing.postprocessing import ResultTable
from processing.utils import data_digest, derive_rng, resolve_master_seed
from simulation.blockage import (
    JointBlockagePattern,
    extract_params,
    gen_blockage,
    gen_joint_blockage,
    reconstruct_b,
)
from simulation.channel import ArrayGeometry, gen_ula_channel, gen_upa_channel
from simulation.sounding import noise_var_from_snr, sound_joint, sound_tx

logger = logging.getLogger(__name__)

TRIAL_LOG_COLUMNS = [
    "trial",
    "sweep_value",
    "method",
    "nmse",
    "success",
    "error",
    "digest",
    "wall_ms",
]


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    scenario: str = "tx"
    n_x: int = config.UPA_SHAPE[0]
    n_y: int = config.UPA_SHAPE[1]
    n_tx: int = config.NB_TX_ANTENNAS
    n_rx: int = config.NB_RX_ANTENNAS
    spacing: float = config.ANTENNA_SPACING
    n_paths: int = config.NB_PATHS
    p_b: float = config.BLOCKAGE_PROBABILITY
    mode: str = "partial"
    aligned: bool = False
    sweep_name: str = "measurements"
    sweep_values: List[float] = field(default_factory=lambda: [config.NB_MEASUREMENTS])
    measurements: int = config.NB_MEASUREMENTS
    snr_db: Optional[float] = config.SNR_DB
    methods: List[str] = field(default_factory=lambda: ["ce-aad", "omp", "oracle"])
    trials: int = config.NB_TRIALS
    master_seed: int = config.MASTER_SEED
    solver: Optional[CEConfig] = None
    omp_max_atoms: Optional[int] = None
    record_timing: bool = False

    def __post_init__(self):
        if self.scenario not in config.SCENARIOS:
            raise ConfigError("scenario must be one of {}, got {}".format(
                config.SCENARIOS, self.scenario))
        if self.mode not in config.BLOCKAGE_MODES:
            raise ConfigError("mode must be one of {}, got {}".format(
                config.BLOCKAGE_MODES, self.mode))
        unknown = [m for m in self.methods if m not in config.METHODS]
        if unknown or not self.methods:
            raise ConfigError("unknown methods {}; valid methods are {}".format(
                unknown, config.METHODS))
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must not repeat")
        if self.sweep_name not in config.SWEEP_NAMES:
            raise ConfigError("sweep_name must be one of {}, got {}".format(
                config.SWEEP_NAMES, self.sweep_name))
        if not self.sweep_values:
            raise ConfigError("sweep_values must not be empty")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise ConfigError("sweep_values must be strictly increasing")
        if self.sweep_name == "measurements":
            if any(int(v) != v or v < 1 for v in self.sweep_values):
                raise ConfigError("measurement counts must be positive integers")
            self.sweep_values = [int(v) for v in self.sweep_values]
        else:
            self.sweep_values = [float(v) for v in self.sweep_values]
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.measurements < 1:
            raise ConfigError("measurements must be >= 1")
        if not 0.0 <= self.p_b <= 1.0:
            raise ConfigError("p_b must lie in [0, 1]")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if self.solver is None:
            self.solver = CEConfig(mode=self.mode)
        elif isinstance(self.solver, dict):
            solver = dict(self.solver)
            solver.setdefault("mode", self.mode)
            self.solver = CEConfig.from_dict(solver)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError("unknown config keys: {}".format(sorted(unknown)))
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, "r") as read_file:
                d = json.load(read_file)
        except OSError as e:
            raise ConfigError("cannot read config {}: {}".format(path, e)) from e
        except json.JSONDecodeError as e:
            raise ConfigError("{}: line {} column {}: {}".format(
                path, e.lineno, e.colno, e.msg)) from e
        if not isinstance(d, dict):
            raise ConfigError("{}: top-level JSON value must be an object".format(path))
        return cls.from_dict(d)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["solver"] = self.solver.to_dict()
        return d

    def with_overrides(self, seed=None, trials=None):
        """Command-line values win over the config file."""
        changes = {"master_seed": resolve_master_seed(seed, self.master_seed)}
        if trials is not None:
            changes["trials"] = int(trials)
        return dataclasses.replace(self, **changes)

    def tx_geometry(self):
        if self.scenario == "joint":
            return ArrayGeometry.ula(self.n_tx, self.spacing)
        return ArrayGeometry.upa(self.n_x, self.n_y, self.spacing, self.spacing)

    def rx_geometry(self):
        return ArrayGeometry.ula(self.n_rx, self.spacing)

    def point(self, sweep_value=None):
        """(K, snr_db) at a sweep value; snr_db None means noiseless."""
        if sweep_value is None:
            return self.measurements, self.snr_db
        if self.sweep_name == "measurements":
            return int(sweep_value), self.snr_db
        return self.measurements, float(sweep_value)

    def cluster_align(self):
        if self.aligned and self.scenario == "tx":
            return (self.solver.block_rows, self.solver.block_cols)
        return (1, 1)


@dataclass
class TrialData:
    """Everything the methods of one trial see."""

    scenario: str
    H: np.ndarray
    h: np.ndarray
    y: np.ndarray
    operator: np.ndarray
    noise_var: float
    truth: Optional[np.ndarray] = None
    true_support: Optional[np.ndarray] = None

    def digest(self):
        arrays = (self.H, self.truth, self.operator, self.y)
        return data_digest(*(a for a in arrays if a is not None))


@dataclass
class MethodOutcome:
    method: str
    nmse: Optional[float]
    success: bool
    error: Optional[str]
    digest: str
    wall_ms: float = 0.0


@dataclass
class TrialRecord:
    trial_index: int
    sweep_value: float
    outcomes: Dict[str, MethodOutcome]


def simulate(cfg, trial_index, sweep_value=None):
    """
    Channel, blockage and sounding of one trial as a Fixture. Each stage
    draws from its own stream derived from (master_seed, trial_index).
    """
    K, snr_db = cfg.point(sweep_value)
    noise_var = 0.0 if snr_db is None else noise_var_from_snr(snr_db)
    seed = cfg.master_seed
    rng_channel = derive_rng(seed, trial_index, "channel")
    rng_blockage = derive_rng(seed, trial_index, "blockage")
    rng_precoder = derive_rng(seed, trial_index, "precoder")
    rng_noise = derive_rng(seed, trial_index, "noise")

    if cfg.scenario == "joint":
        geom_t, geom_r = cfg.tx_geometry(), cfg.rx_geometry()
        geometry = (geom_r, geom_t)
        H = gen_ula_channel(geom_r, geom_t, cfg.n_paths, rng_channel).H
        pattern = gen_joint_blockage(geom_t, geom_r, cfg.p_b, cfg.mode, rng_blockage)
        sounding = sound_joint(
            H, pattern, K, noise_var,
            rng_precoder, derive_rng(seed, trial_index, "combiner"), rng_noise,
        )
    else:
        geometry = cfg.tx_geometry()
        H = gen_upa_channel(geometry, cfg.n_paths, rng_channel).H
        pattern = gen_blockage(
            geometry, cfg.p_b, cfg.mode, rng_blockage, align=cfg.cluster_align()
        )
        sounding = sound_tx(H, pattern, K, noise_var, rng_precoder, rng_noise)

    return Fixture(
        scenario=cfg.scenario,
        seed=seed,
        mode=cfg.mode,
        geometry=geometry,
        H=H,
        sounding=sounding,
        pattern=pattern,
        p_b=cfg.p_b,
        snr_db=snr_db,
    )


def trial_data(fixture):
    truth, true_support = None, None
    pattern = fixture.pattern
    if isinstance(pattern, JointBlockagePattern):
        truth = numerics.vec(pattern.B)
        blocked = np.zeros(fixture.H.shape, dtype=bool)
        blocked[pattern.rx.support, :] = True
        blocked[:, pattern.tx.support] = True
        true_support = np.flatnonzero(blocked.reshape(-1, order="F"))
    elif pattern is not None:
        truth = pattern.b
        true_support = pattern.support
    return TrialData(
        scenario=fixture.scenario,
        H=fixture.H,
        h=fixture.h,
        y=fixture.sounding.y,
        operator=fixture.sounding.operator,
        noise_var=fixture.sounding.noise_var,
        truth=truth,
        true_support=true_support,
    )


def static_report(method, data, support, q_hat, epsilon):
    """DiagnosisReport for the one-shot recoverers (no trace)."""
    support = np.asarray(support, dtype=int)
    b_hat = reconstruct_b(q_hat, data.h, support)
    residual = data.y - data.operator @ q_hat
    return DiagnosisReport(
        method=method,
        support=support,
        q_hat=q_hat,
        params=extract_params(q_hat, data.h, support),
        b_hat=b_hat,
        best_zeta=float(np.linalg.norm(residual)) + epsilon * len(support),
        B_hat=numerics.ivec(b_hat, *data.H.shape) if data.scenario == "joint" else None,
    )


def diagnose(method, data, solver, rng, omp_max_atoms=None):
    """Run one method on a trial's data and return its DiagnosisReport."""
    y, A, h = data.y, data.operator, data.h
    if method == "ce-aad":
        if data.scenario == "joint":
            return run_joint_ce_aad(y, A, data.H, solver, rng)
        return run_ce_aad(y, A, h, solver, rng, data.H.shape)
    if method == "plain-ce":
        report = plain_ce(y, A, h, solver, rng, data.H.shape)
        if data.scenario == "joint":
            report.B_hat = numerics.ivec(report.b_hat, *data.H.shape)
        return report
    if method == "omp":
        tol = default_omp_threshold(len(y), data.noise_var)
        support, q_hat = omp(y, A, max_atoms=omp_max_atoms, residual_tol=tol)
        return static_report(method, data, support, q_hat, solver.epsilon)
    if method == "oracle":
        if data.true_support is None:
            raise ConfigError("the oracle method needs a ground-truth blockage")
        q_hat = oracle_ls(y, A, data.true_support)
        return static_report(method, data, data.true_support, q_hat, solver.epsilon)
    raise ConfigError("unknown method {}; valid methods are {}".format(
        method, config.METHODS))


def run_trial(cfg, trial_index, sweep_value=None):
    """
    Score every configured method on one trial. Method failures are recorded
    in the outcome, not raised.
    """
    data = trial_data(simulate(cfg, trial_index, sweep_value))
    digest = data.digest()
    outcomes = {}
    for method in cfg.methods:
        rng = derive_rng(cfg.master_seed, trial_index, "solver:" + method)
        start = time.perf_counter()
        value, success, error = None, False, None
        try:
            report = diagnose(method, data, cfg.solver, rng, cfg.omp_max_atoms)
            value = nmse(report.b_hat, data.truth)
            success = exact_support(report.support, data.true_support)
        except (AADError, np.linalg.LinAlgError) as e:
            error = "{}: {}".format(type(e).__name__, e)
            logger.warning("trial {} ({}) failed: {}".format(trial_index, method, error))
        wall_ms = 1000 * (time.perf_counter() - start) if cfg.record_timing else 0.0
        outcomes[method] = MethodOutcome(
            method=method, nmse=value, success=success, error=error,
            digest=digest, wall_ms=wall_ms,
        )
    return TrialRecord(
        trial_index=trial_index,
        sweep_value=cfg.sweep_values[0] if sweep_value is None else sweep_value,
        outcomes=outcomes,
    )


def trial_log(records):
    rows = []
    for record in records:
        for outcome in record.outcomes.values():
            rows.append({
                "trial": record.trial_index,
                "sweep_value": record.sweep_value,
                "method": outcome.method,
                "nmse": np.nan if outcome.nmse is None else outcome.nmse,
                "success": outcome.success,
                "error": outcome.error,
                "digest": outcome.digest,
                "wall_ms": outcome.wall_ms,
            })
    return pd.DataFrame(rows, columns=TRIAL_LOG_COLUMNS)


def aggregate(cfg, records):
    """One row per (method, sweep value); failures excluded but counted."""
    rows = []
    for method in sorted(cfg.methods):
        for value in cfg.sweep_values:
            cell = sorted(
                (r for r in records if r.sweep_value == value),
                key=lambda r: r.trial_index,
            )
            outcomes = [r.outcomes[method] for r in cell]
            values = np.array([o.nmse for o in outcomes if o.nmse is not None], dtype=float)
            ok = len(values) > 0
            rows.append({
                "method": method,
                "sweep_name": cfg.sweep_name,
                "sweep_value": value,
                "mean_nmse": float(np.mean(values)) if ok else np.nan,
                "median_nmse": float(np.median(values)) if ok else np.nan,
                "std_nmse": float(np.std(values)) if ok else np.nan,
                "trials": len(values),
                "failures": len(outcomes) - len(values),
                "wall_ms": round(sum(o.wall_ms for o in outcomes), 3),
            })
    return pd.DataFrame(rows, columns=config.RESULT_COLUMNS)


def run_sweep(cfg, n_jobs=1, progress=True):
    tasks = [(value, t) for value in cfg.sweep_values for t in range(cfg.trials)]
    logger.info("running {}: {} trials x {} sweep values, methods {}".format(
        cfg.name, cfg.trials, len(cfg.sweep_values), cfg.methods))
    if n_jobs == 1:
        records = [
            run_trial(cfg, t, value)
            for value, t in tqdm(tasks, desc=cfg.name, disable=not progress)
        ]
    else:
        records = Parallel(n_jobs=n_jobs)(
            delayed(run_trial)(cfg, t, value) for value, t in tasks
        )
    table = ResultTable(aggregate(cfg, records), trial_log(records))
    logger.info("{} finished with {} failed method runs".format(
        cfg.name, int(table.rows["failures"].sum())))
    return table
