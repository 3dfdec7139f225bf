"""Exact samplers, random circuit ensembles, and collision statistics.

Three circuit ensembles are supported: gate-wise Haar randomness over a fixed
layout ("local"), the same followed by a uniform routed permutation
("localperm"), and a dense Haar-random matrix ("haar").  ``boson_sample``
draws exact Fock outcomes with the sequential conditional-permanent algorithm
of Clifford and Clifford, one mode per photon via Laplace-expanded
sub-permanents.

Everything is deterministic under a fixed :class:`~bosonlab.linalg.RngHandle`;
experiment sweeps split one handle per record so rows are independently
reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .architecture import Architecture, Circuit, build_kaleidoscope, circuit_unitary
from .linalg import RngHandle, _ginibre_qr, as_generator, haar_unitary
from .probability import as_occupation, is_collision_free, sub_permanents
from .routing import Permutation, sample_permutation_circuit

ENSEMBLE_KINDS = ("local", "localperm", "haar")


@dataclass(frozen=True)
class EnsembleSpec:
    """Which circuit distribution to draw from.

    ``local`` and ``localperm`` need an architecture; ``haar`` needs only the
    mode count.  ``seed`` is bookkeeping for experiment records, not a stream:
    sampling always consumes the rng passed to :func:`sample_circuit`.
    """

    kind: str
    modes: int
    arch: Architecture | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble {self.kind!r}; choose from {ENSEMBLE_KINDS}")
        if self.kind in ("local", "localperm") and self.arch is None:
            raise ValueError(f"{self.kind} ensemble needs an architecture")
        if self.arch is not None and self.arch.modes != self.modes:
            raise ValueError("architecture mode count disagrees with spec")


@dataclass(frozen=True)
class EnsembleSample:
    """A drawn circuit: its dense unitary plus whatever structure produced it."""

    unitary: np.ndarray
    circuit: Circuit | None = None
    permutation: Permutation | None = None


def local_random_circuit(arch: Architecture, rng) -> Circuit:
    """Every placement filled with an independent Haar-random 2x2 gate."""
    gen = as_generator(rng)
    return Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))


def global_haar_unitary(modes: int, rng) -> np.ndarray:
    """Dense Haar-random unitary on U(modes) via Ginibre + QR."""
    return _ginibre_qr(modes, as_generator(rng))


def sample_circuit(spec: EnsembleSpec, rng) -> EnsembleSample:
    """Draw one circuit from the requested ensemble.

    ``localperm`` right-multiplies the local draw by a uniformly random routed
    permutation circuit, i.e. the permutation hits the input modes first.
    """
    gen = as_generator(rng)
    if spec.kind == "haar":
        return EnsembleSample(unitary=global_haar_unitary(spec.modes, gen))
    circuit = local_random_circuit(spec.arch, gen)
    unitary = circuit_unitary(circuit)
    if spec.kind == "local":
        return EnsembleSample(unitary=unitary, circuit=circuit)
    perm, _ = sample_permutation_circuit(spec.modes, gen)
    return EnsembleSample(unitary=unitary @ perm.matrix, circuit=circuit, permutation=perm)


def sample_collision_free_outcome(modes: int, photons: int, rng) -> tuple[int, ...]:
    """Uniform draw over the C(M, N) collision-free outcomes."""
    if photons > modes:
        raise ValueError(f"cannot place {photons} single photons in {modes} modes")
    gen = as_generator(rng)
    chosen = gen.choice(modes, size=photons, replace=False)
    out = [0] * modes
    for mode in chosen:
        out[int(mode)] = 1
    return tuple(out)


def first_modes_input(modes: int, photons: int) -> tuple[int, ...]:
    """The fixed input convention: one photon in each of the first N modes."""
    if photons > modes:
        raise ValueError(f"cannot place {photons} photons in {modes} modes")
    return tuple(1 if i < photons else 0 for i in range(modes))


def boson_sample(u: np.ndarray, t, rng) -> tuple[int, ...]:
    """One exact Fock-outcome sample for input ``t`` through circuit matrix ``u``.

    Sequential algorithm: photons are visited in a random order; the k-th
    output mode is drawn from weights |sub_perm . U[0:k, :]|^2, where the
    sub-permanents Laplace-expand the permanent over the modes chosen so far.
    Cost is O(N^2 2^N + N^2 M) per sample.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    t = as_occupation(t, m)
    if not is_collision_free(t):
        raise ValueError(f"input must be collision-free, got {t}")
    n = sum(t)
    if n > 16:
        raise ValueError(f"sampler limited to N <= 16, got {n}")
    gen = as_generator(rng)
    counts = [0] * m
    if n == 0:
        return tuple(counts)
    inputs = [i for i, v in enumerate(t) if v]
    a = u[:, inputs].T  # one row per photon
    if n > 1:
        a = a[gen.permutation(n), :]
    weights = np.abs(a[0, :]) ** 2
    mode_seq = [int(gen.choice(m, p=weights / weights.sum()))]
    counts[mode_seq[0]] = 1
    for k in range(2, n + 1):
        block = a[:k, mode_seq]
        perm_vector = sub_permanents(block) @ a[:k, :]
        weights = np.abs(perm_vector) ** 2
        mode = int(gen.choice(m, p=weights / weights.sum()))
        mode_seq.append(mode)
        counts[mode] += 1
    return tuple(counts)


def enumeration_sampler(distribution: dict[tuple[int, ...], float], rng, size: int = 1):
    """Brute-force oracle: categorical draws from a fully enumerated distribution."""
    gen = as_generator(rng)
    outcomes = list(distribution.keys())
    probs = np.array([distribution[s] for s in outcomes], dtype=float)
    probs = probs / probs.sum()
    idx = gen.choice(len(outcomes), size=size, p=probs)
    return [outcomes[int(i)] for i in idx]


# ---------------------------------------------------------------------------
# Collision-ratio sweep.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    """One (ensemble, N, q, circuit) cell of a collision-ratio sweep."""

    ensemble: str
    modes: int
    photons: int
    q: int
    circuit_index: int
    seed: int
    cf_count: int
    samples: int
    ratio: float
    wall_time: float = field(compare=False, default=0.0)

    def __post_init__(self) -> None:
        if not (0 <= self.cf_count <= self.samples):
            raise ValueError("collision-free count exceeds sample count")
        if abs(self.ratio - self.cf_count / self.samples) > 1e-12:
            raise ValueError("ratio inconsistent with counts")


CSV_HEADER = "ensemble,M,N,q,circuit,seed,cf_count,samples,ratio"


def records_to_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.ensemble},{r.modes},{r.photons},{r.q},{r.circuit_index},"
            f"{r.seed},{r.cf_count},{r.samples},{r.ratio!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CollisionRatioConfig:
    """Sweep shape: which ensembles, photon numbers and layout repetitions to run."""

    modes: int
    photons: tuple[int, ...]
    reps: tuple[int, ...]
    num_circuits: int
    num_samples: int
    ensembles: tuple[str, ...]
    seed: int

    def __post_init__(self) -> None:
        for e in self.ensembles:
            if e not in ENSEMBLE_KINDS:
                raise ValueError(f"unknown ensemble {e!r}")


#: The sweep sizes used in the source numerics (opt-in: hours of compute).
PAPER_SCALE_CONFIG = CollisionRatioConfig(
    modes=256,
    photons=(4, 8, 12, 16),
    reps=(1, 2, 3),
    num_circuits=500,
    num_samples=500,
    ensembles=("local", "haar"),
    seed=2024,
)


def _experiment_cells(config: CollisionRatioConfig):
    """Deterministic cell enumeration; haar ignores q and is recorded with q = 0."""
    cells = []
    for ensemble in config.ensembles:
        reps = config.reps if ensemble in ("local", "localperm") else (0,)
        for q in reps:
            for n in config.photons:
                for circuit_index in range(config.num_circuits):
                    cells.append((ensemble, q, n, circuit_index))
    return cells


def _run_cell(config: CollisionRatioConfig, cell, handle: RngHandle) -> ExperimentRecord:
    ensemble, q, n, circuit_index = cell
    started = time.perf_counter()
    gen = handle.generator()
    if ensemble == "haar":
        spec = EnsembleSpec("haar", config.modes)
    else:
        spec = EnsembleSpec(ensemble, config.modes, build_kaleidoscope(config.modes, q))
    u = sample_circuit(spec, gen).unitary
    t = first_modes_input(config.modes, n)
    cf = 0
    for _ in range(config.num_samples):
        if is_collision_free(boson_sample(u, t, gen)):
            cf += 1
    return ExperimentRecord(
        ensemble=ensemble,
        modes=config.modes,
        photons=n,
        q=q,
        circuit_index=circuit_index,
        seed=handle.seed,
        cf_count=cf,
        samples=config.num_samples,
        ratio=cf / config.num_samples,
        wall_time=time.perf_counter() - started,
    )


def collision_ratio_experiment(
    config: CollisionRatioConfig, threads: int = 1
) -> list[ExperimentRecord]:
    """Per-circuit collision-free ratios for every requested cell.

    Each cell gets its own handle split off the config seed, so results do not
    depend on the thread count; records come back sorted by
    (ensemble, N, q, circuit index).
    """
    base = RngHandle(config.seed)
    cells = _experiment_cells(config)
    handles = [base.split(i + 1) for i in range(len(cells))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda args: _run_cell(config, *args), zip(cells, handles)))
    else:
        records = [_run_cell(config, cell, h) for cell, h in zip(cells, handles)]
    records.sort(key=lambda r: (r.ensemble, r.photons, r.q, r.circuit_index))
    return records


def summarize_ratios(records) -> dict[tuple[str, int, int], tuple[float, float, float]]:
    """Group records by (ensemble, q, N) -> (mean ratio, std across circuits, standard error)."""
    groups: dict[tuple[str, int, int], list[float]] = {}
    for r in records:
        groups.setdefault((r.ensemble, r.q, r.photons), []).append(r.ratio)
    out = {}
    for key, ratios in groups.items():
        arr = np.array(ratios)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        out[key] = (float(arr.mean()), std, std / math.sqrt(len(arr)))
    return out


# ---------------------------------------------------------------------------
# Birthday-paradox bound and the balls-into-bins companion model.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BirthdayBoundResult:
    modes: int
    photons: int
    empirical: float
    std_error: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.empirical <= self.bound + 3.0 * self.std_error


def birthday_bound_check(
    modes: int,
    photons: int,
    num_circuits: int,
    num_samples: int,
    rng: RngHandle,
    q: int = 1,
) -> BirthdayBoundResult:
    """Monte Carlo collision probability over local-times-permutation circuits.

    Requires the dilute hypothesis M >= 2 N^2; the reported bound is 2 N^2 / M
    and the standard error is taken across circuits.
    """
    if modes < 2 * photons**2:
        raise ValueError(f"dilute hypothesis needs M >= 2N^2, got M={modes}, N={photons}")
    arch = build_kaleidoscope(modes, q)
    spec = EnsembleSpec("localperm", modes, arch)
    t = first_modes_input(modes, photons)
    per_circuit = []
    for index in range(num_circuits):
        gen = rng.split(index + 1).generator()
        u = sample_circuit(spec, gen).unitary
        collisions = sum(
            0 if is_collision_free(boson_sample(u, t, gen)) else 1 for _ in range(num_samples)
        )
        per_circuit.append(collisions / num_samples)
    arr = np.array(per_circuit)
    std_error = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return BirthdayBoundResult(
        modes=modes,
        photons=photons,
        empirical=float(arr.mean()),
        std_error=std_error,
        bound=2.0 * photons**2 / modes,
    )


def collision_free_fraction_bound_holds(modes: int, photons: int) -> bool:
    """Exact combinatorial check that 1 - C(M,N)/C(M+N-1,N) < N^2/M."""
    from fractions import Fraction

    lhs = 1 - Fraction(math.comb(modes, photons), math.comb(modes + photons - 1, photons))
    return lhs < Fraction(photons**2, modes)


@dataclass(frozen=True)
class BallsBinsResult:
    modes: int
    balls: int
    trials: int
    mean_singletons: float
    std_error: float
    poissonized_mean: float
    exact_mean: float
    tail_threshold: float
    tail_empirical: float
    tail_chernoff: float


def chernoff_singleton_tail(modes: int, balls: int, threshold: float) -> float:
    """Lower-tail bound exp(-(1-eps)^2 E[Z]/2) for the Poissonized singleton count."""
    expected = balls * math.exp(-balls / modes)
    eps = threshold / expected
    if eps >= 1.0:
        return 1.0
    return math.exp(-((1.0 - eps) ** 2) * expected / 2.0)


def balls_bins_singletons(
    modes: int, balls: int, trials: int, rng, tail_threshold: float | None = None
) -> BallsBinsResult:
    """Throw N balls in M bins repeatedly; study the singly-occupied bin count.

    Reports the empirical mean against both the Poissonized expectation
    N exp(-N/M) and the exact mean N (1 - 1/M)^(N-1) (their gap is the
    Poissonization slack), plus an empirical lower-tail frequency against the
    Chernoff expression.
    """
    if trials < 1000:
        raise ValueError("need at least 1e3 trials for stable statistics")
    gen = as_generator(rng)
    throws = gen.integers(0, modes, size=(trials, balls))
    singles = np.zeros(trials)
    for row in range(trials):
        counts = np.bincount(throws[row], minlength=modes)
        singles[row] = np.count_nonzero(counts == 1)
    threshold = tail_threshold if tail_threshold is not None else 0.25 * balls
    return BallsBinsResult(
        modes=modes,
        balls=balls,
        trials=trials,
        mean_singletons=float(singles.mean()),
        std_error=float(singles.std(ddof=1) / math.sqrt(trials)),
        poissonized_mean=balls * math.exp(-balls / modes),
        exact_mean=balls * (1.0 - 1.0 / modes) ** (balls - 1),
        tail_threshold=threshold,
        tail_empirical=float(np.mean(singles <= threshold)),
        tail_chernoff=chernoff_singleton_tail(modes, balls, threshold),
    )
