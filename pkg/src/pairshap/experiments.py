"""Monte Carlo experiment harness.

Three experiment kinds: `bias_variance` replicates each estimator at several
sample sizes and compares empirical dispersion against the asymptotic
prediction, `method_comparison` tabulates raw and cost-adjusted covariance
spectra for the two paired estimators, and `additive_recovery` checks that
group attribution sums of an additively separated game are recovered from a
single paired walk.  Every replicate draws from its own substream keyed by
(master seed, method, size index, replicate index), so results do not depend
on execution order or worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, exact, kernel, permutation
from .errors import PartitionError, SchemaError
from .games import GameEvaluator, ValueFunctionSpec, parse_spec
from .streams import derive_rng

METHODS = ("kernel", "kernel-paired", "permutation", "permutation-paired")
KINDS = ("bias_variance", "method_comparison", "additive_recovery")

BIAS_VARIANCE_HEADER = "method,n,j,bias,sigma_hat,tau,evals_per_sample"
COMPARISON_HEADER = "method,kind,position,eigenvalue"
RECOVERY_HEADER = "group,exact,permutation_paired,kernel_paired"


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs shared by the experiment kinds.

    `sizes` and `reps` matter only for bias/variance runs; `outputs` maps
    logical output names (currently just "csv") to file paths.
    """

    vf: ValueFunctionSpec
    master_seed: int
    methods: tuple[str, ...] = METHODS
    sizes: tuple[int, ...] = ()
    reps: int = 0
    outputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BiasVarianceRow:
    """Per (method, size, player) summary over replicates.

    `bias` is the mean absolute deviation from the exact value, `sigma_hat`
    the replicate standard deviation, `tau` the asymptotic prediction
    sqrt(covariance diagonal / n).  `mean_error` keeps the signed mean
    deviation for in-memory consumers; it is not part of the CSV schema.
    """

    method: str
    n: int
    j: int
    bias: float
    sigma_hat: float
    tau: float
    evals_per_sample: int
    mean_error: float


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    kind: str
    position: int
    eigenvalue: float


@dataclass(frozen=True)
class RecoveryRow:
    group: int
    exact: float
    permutation_paired: float
    kernel_paired: float


def _estimate_once(spec: ValueFunctionSpec, method: str, n: int, seed) -> np.ndarray:
    ev = GameEvaluator(spec)
    if method == "kernel":
        return kernel.estimate_kernel(ev, n, paired=False, seed=seed)[0].phi
    if method == "kernel-paired":
        return kernel.estimate_kernel(ev, n, paired=True, seed=seed)[0].phi
    if method == "permutation":
        return permutation.estimate_permutation(ev, n, paired=False, seed=seed).phi
    if method == "permutation-paired":
        return permutation.estimate_permutation(ev, n, paired=True, seed=seed).phi
    raise SchemaError(f"unknown method {method!r}")


def _exact_dispersion(spec: ValueFunctionSpec, method: str) -> asymptotics.CovarianceReport:
    ev = GameEvaluator(spec)
    if method == "kernel":
        return asymptotics.kernel_matrices_exact(ev, paired=False)[2]
    if method == "kernel-paired":
        return asymptotics.kernel_matrices_exact(ev, paired=True)[2]
    if method == "permutation":
        return asymptotics.permutation_covariance_exact(ev, paired=False)
    if method == "permutation-paired":
        return asymptotics.permutation_covariance_exact(ev, paired=True)
    raise SchemaError(f"unknown method {method!r}")


def _replicate_seeds(config: ExperimentConfig, method: str, n_index: int) -> list:
    method_id = METHODS.index(method)
    return [
        np.random.SeedSequence(entropy=[config.master_seed, method_id, n_index, rep])
        for rep in range(config.reps)
    ]


def run_bias_variance(config: ExperimentConfig, jobs: int = 1) -> list[BiasVarianceRow]:
    """Replicate every (method, size) cell and summarize against exact values."""
    _validate_bias_variance(config)
    spec = config.vf
    q = spec.q
    exact_phi = exact.shapley_subset(GameEvaluator(spec)).phi
    rows: list[BiasVarianceRow] = []
    for method in config.methods:
        report = _exact_dispersion(spec, method)
        cost = asymptotics.evaluation_cost(method, q)
        for n_index, n in enumerate(config.sizes):
            seeds = _replicate_seeds(config, method, n_index)
            estimates = np.empty((config.reps, q))

            def one(rep: int) -> None:
                estimates[rep] = _estimate_once(spec, method, n, seeds[rep])

            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    list(pool.map(one, range(config.reps)))
            else:
                for rep in range(config.reps):
                    one(rep)

            tau = asymptotics.predicted_stderr(report, n)
            errors = estimates - exact_phi
            bias = np.abs(errors).mean(axis=0)
            sigma_hat = estimates.std(axis=0, ddof=1)
            mean_error = errors.mean(axis=0)
            for j in range(q):
                rows.append(
                    BiasVarianceRow(
                        method=method,
                        n=n,
                        j=j + 1,
                        bias=float(bias[j]),
                        sigma_hat=float(sigma_hat[j]),
                        tau=float(tau[j]),
                        evals_per_sample=cost,
                        mean_error=float(mean_error[j]),
                    )
                )
    return rows


def run_method_comparison(config: ExperimentConfig) -> list[ComparisonRow]:
    """Raw and cost-adjusted spectra of the two paired-method covariances.

    The permutation matrix always carries a null space (row sums are fixed
    by efficiency), so its spectrum is reported without the numerically zero
    eigenvalues; the kernel spectrum is reported whole.
    """
    ev = GameEvaluator(config.vf)
    kernel_report = asymptotics.kernel_matrices_exact(ev, paired=True)[2]
    perm_report = asymptotics.permutation_covariance_exact(GameEvaluator(config.vf), paired=True)
    rows: list[ComparisonRow] = []
    for report in (kernel_report, perm_report):
        if report.method == "permutation-paired":
            raw = asymptotics.positive_eigenvalues(report)
        else:
            raw = report.eigenvalues
        adjusted = raw * asymptotics.evaluation_cost(report.method, report.q)
        for position, value in enumerate(raw, start=1):
            rows.append(ComparisonRow(report.method, "raw", position, float(value)))
        for position, value in enumerate(adjusted, start=1):
            rows.append(ComparisonRow(report.method, "adjusted", position, float(value)))
    return rows


def run_additive_recovery(config: ExperimentConfig, partition, kernel_n: int = 100) -> list[RecoveryRow]:
    """Group attribution sums: exact, one paired walk, and a paired kernel fit.

    The game's terms must respect the partition (every term inside one
    group); the single paired permutation walk then recovers the exact group
    sums, while the kernel column shows a finite-sample estimate.
    """
    spec = config.vf
    groups = [np.asarray(sorted(int(i) for i in g), dtype=np.int64) for g in partition]
    _check_partition_against_terms(spec, groups)

    exact_sums = permutation.group_sums(exact.shapley_subset(GameEvaluator(spec)).phi, groups)

    ev = GameEvaluator(spec)
    rng = derive_rng(config.master_seed, 0)
    perm = permutation.sample_permutations(spec.q, 1, rng)[0]
    walk = 0.5 * (
        permutation.marginal_vector(ev, perm)
        + permutation.marginal_vector(ev, perm[::-1])
    )
    perm_sums = permutation.group_sums(walk, groups)

    kernel_seed = np.random.SeedSequence(entropy=config.master_seed, spawn_key=(1,))
    kernel_vec, _ = kernel.estimate_kernel(
        GameEvaluator(spec), kernel_n, paired=True, seed=kernel_seed
    )
    kernel_sums = permutation.group_sums(kernel_vec.phi, groups)

    return [
        RecoveryRow(
            group=k + 1,
            exact=float(exact_sums[k]),
            permutation_paired=float(perm_sums[k]),
            kernel_paired=float(kernel_sums[k]),
        )
        for k in range(len(groups))
    ]


def _check_partition_against_terms(spec: ValueFunctionSpec, groups) -> None:
    for pos, term in enumerate(spec.terms):
        touched = set(int(i) for i in term.indices)
        if not any(touched <= set(g.tolist()) for g in groups):
            raise PartitionError(f"terms[{pos}] spans more than one partition group")


def _validate_bias_variance(config: ExperimentConfig) -> None:
    if not config.methods:
        raise SchemaError("at least one method is required")
    unknown = [m for m in config.methods if m not in METHODS]
    if unknown:
        raise SchemaError(f"unknown methods {unknown}; choose from {METHODS}")
    if len(set(config.methods)) != len(config.methods):
        raise SchemaError("methods must be distinct")
    if not config.sizes:
        raise SchemaError("at least one sample size is required")
    if any(s < 1 for s in config.sizes):
        raise SchemaError("sample sizes must be positive")
    if list(config.sizes) != sorted(set(config.sizes)):
        raise SchemaError("sample sizes must be strictly ascending")
    if config.reps < 2:
        raise SchemaError(f"need at least 2 replicates, got {config.reps}")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_bias_variance_csv(rows: list[BiasVarianceRow], path) -> None:
    lines = [BIAS_VARIANCE_HEADER]
    for r in rows:
        lines.append(
            f"{r.method},{r.n},{r.j},{_fmt(r.bias)},{_fmt(r.sigma_hat)},{_fmt(r.tau)},{r.evals_per_sample}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_comparison_csv(rows: list[ComparisonRow], path) -> None:
    lines = [COMPARISON_HEADER]
    for r in rows:
        lines.append(f"{r.method},{r.kind},{r.position},{_fmt(r.eigenvalue)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_recovery_csv(rows: list[RecoveryRow], path) -> None:
    lines = [RECOVERY_HEADER]
    for r in rows:
        lines.append(
            f"{r.group},{_fmt(r.exact)},{_fmt(r.permutation_paired)},{_fmt(r.kernel_paired)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


_CONFIG_KEYS = {"kind", "vf", "methods", "sizes", "reps", "master_seed", "outputs", "partition", "kernel_n"}


def run_from_config(doc: dict, jobs: int = 1) -> dict:
    """Parse an experiment document, run it, and write its CSV output.

    Returns a summary with the kind, the output path, and the row count.
    """
    if not isinstance(doc, dict):
        raise SchemaError("experiment config must be an object")
    extra = set(doc) - _CONFIG_KEYS
    if extra:
        raise SchemaError(f"unknown config keys: {sorted(extra)}")
    kind = doc.get("kind", "bias_variance")
    if kind not in KINDS:
        raise SchemaError(f"unknown experiment kind {kind!r}; choose from {KINDS}")
    if "vf" not in doc:
        raise SchemaError("config requires 'vf'")
    if "master_seed" not in doc or not isinstance(doc["master_seed"], int) or isinstance(doc["master_seed"], bool):
        raise SchemaError("config requires an integer 'master_seed'")
    outputs = doc.get("outputs", {})
    if not isinstance(outputs, dict) or "csv" not in outputs:
        raise SchemaError("config requires outputs.csv")

    config = ExperimentConfig(
        vf=parse_spec(doc["vf"]),
        master_seed=doc["master_seed"],
        methods=tuple(doc.get("methods", METHODS)),
        sizes=tuple(doc.get("sizes", ())),
        reps=doc.get("reps", 0),
        outputs=outputs,
    )

    if kind == "bias_variance":
        rows = run_bias_variance(config, jobs=jobs)
        write_bias_variance_csv(rows, outputs["csv"])
    elif kind == "method_comparison":
        rows = run_method_comparison(config)
        write_comparison_csv(rows, outputs["csv"])
    else:
        if "partition" not in doc:
            raise SchemaError("additive_recovery requires 'partition'")
        partition = _parse_partition(doc["partition"], config.vf.q)
        rows = run_additive_recovery(config, partition, kernel_n=doc.get("kernel_n", 100))
        write_recovery_csv(rows, outputs["csv"])

    return {"kind": kind, "csv": str(outputs["csv"]), "rows": len(rows)}


def _parse_partition(raw, q: int) -> list[list[int]]:
    """1-based index groups from a config document, returned 0-based."""
    if not isinstance(raw, list) or not all(isinstance(g, list) for g in raw):
        raise SchemaError("'partition' must be a list of index lists")
    groups = []
    for g in raw:
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in g):
            raise SchemaError("partition indices must be integers")
        if any(i < 1 or i > q for i in g):
            raise SchemaError(f"partition indices must lie in 1..{q}")
        groups.append([i - 1 for i in g])
    return groups
