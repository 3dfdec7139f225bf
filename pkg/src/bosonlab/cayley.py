"""Cayley-path gate perturbations and the worst-to-average extrapolation demo.

The Cayley transform H(theta) = ((2-theta)H + theta I)(theta H + (2-theta)I)^(-1)
walks a unitary path from H at theta = 0 to the identity at theta = 1.
Perturbing every gate of a target circuit as G -> H(theta) G therefore morphs
a gate-wise Haar-random circuit (theta = 0) into the target (theta = 1).

Along the path, output probabilities are rational in theta: multiplying by
the denominator polynomial Q(theta) = [prod_i |q_i(theta)|^2]^N yields a
polynomial of degree 4 m N in theta (m perturbed gates, N photons).  The
demo pipeline samples the path near 0, extrapolates that polynomial to
theta = 1, and recovers the target circuit's output probability; the degree
check certifies the polynomial structure itself.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .architecture import Architecture, Circuit, build_kaleidoscope, circuit_unitary
from .exact import QC, Fraction as _Fraction  # noqa: F401  (re-export convenience)
from .linalg import Eigen2, RngHandle, as_generator, eig_unitary2, haar_unitary, max_abs
from .probability import (
    as_occupation,
    output_probability,
    permanent,
    submatrix_repeat,
    _occupation_factorial,
)
from .routing import Permutation, random_permutation, route_permutation

#: Double precision is not trusted past this extrapolation amplification.
DOUBLE_AMPLIFICATION_BUDGET = 1e12


class PrecisionError(RuntimeError):
    """Raised when a requested precision cannot support the extrapolation."""


def _phase_factor(phi: float, theta: float) -> complex:
    """The per-eigenphase denominator factor 1 + i theta e^(i phi/2) sin(phi/2).

    Evaluated as (1 - theta sin^2) + i theta sin cos, which is free of
    cancellation; its squared modulus is 1 - theta (2 - theta) sin^2(phi/2).
    """
    s = math.sin(phi / 2.0)
    c = math.cos(phi / 2.0)
    return complex(1.0 - theta * s * s, theta * s * c)


def q_factor(eigen: Eigen2, theta: float) -> complex:
    """Denominator factor q(theta) of a 2x2 Cayley transform (product over phases)."""
    out = 1.0 + 0.0j
    for phi in eigen.phases:
        out *= _phase_factor(phi, theta)
    return out


def gate_q_mod2(eigen: Eigen2, theta: float) -> float:
    """|q(theta)|^2 computed stably as prod_j (1 - theta (2 - theta) sin^2(phi_j/2))."""
    out = 1.0
    for phi in eigen.phases:
        s2 = math.sin(phi / 2.0) ** 2
        out *= 1.0 - theta * (2.0 - theta) * s2
    return out


def cayley_transform(h: np.ndarray, theta: float, method: str = "eigen") -> np.ndarray:
    """Unitary Cayley path point H(theta) for a 2x2 unitary ``h``.

    ``eigen`` (default) evaluates eigenvalue-wise, which stays accurate near
    the eigenphase-pi singularity of the resolvent; ``direct`` forms the
    resolvent product and exists as an independent cross-check.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {theta}")
    if method == "direct":
        num = (2.0 - theta) * h + theta * np.eye(2)
        den = theta * h + (2.0 - theta) * np.eye(2)
        return num @ np.linalg.inv(den)
    if method != "eigen":
        raise ValueError(f"unknown method {method!r}")
    if theta == 0.0:
        return np.asarray(h, dtype=np.complex128).copy()
    if theta == 1.0:
        return np.eye(2, dtype=np.complex128)
    eigen = eig_unitary2(h)
    ratios = []
    for phi in eigen.phases:
        den = _phase_factor(phi, theta)
        ratios.append(cmath.exp(1j * phi) * den.conjugate() / den)
    return eigen.basis @ np.diag(ratios) @ eigen.basis.conj().T


def big_q(haar_gates, theta: float, photons: int) -> float:
    """Q(theta) = [prod_i |q_i(theta)|^2]^N over the perturbing gates."""
    product = 1.0
    for h in haar_gates:
        product *= gate_q_mod2(eig_unitary2(h), theta)
    return product**photons


def big_q_upper_bound(theta: float, gate_count: int, photons: int) -> float:
    """The loose factor-wise bound (1 + theta^2)^(2 m N)."""
    return (1.0 + theta * theta) ** (2 * gate_count * photons)


def q1_lower_bound(zeta: float, gate_count: int, photons: int) -> float:
    """Floor on Q(1) when every eigenphase is truncated to [-pi+zeta, pi-zeta].

    Each factor of Q(1) is 1 - sin^2(phi/2) = cos^2(phi/2) >= cos^2((pi-zeta)/2),
    and there are 2 m N factors.
    """
    if not 0.0 < zeta <= math.pi:
        raise ValueError(f"truncation angle must lie in (0, pi], got {zeta}")
    per_factor = math.cos((math.pi - zeta) / 2.0) ** 2
    return per_factor ** (2 * gate_count * photons)


@dataclass(frozen=True)
class CayleyGate:
    """A perturbed gate: Haar base H, its eigenform, and the target gate G."""

    base: np.ndarray
    eigen: Eigen2
    target: np.ndarray

    def at(self, theta: float) -> np.ndarray:
        return cayley_transform(self.base, theta) @ self.target


def perturb_circuit(worst: Circuit, haar_gates, theta: float) -> Circuit:
    """Replace every gate G_i of ``worst`` by H_i(theta) G_i."""
    if len(haar_gates) != len(worst.gates):
        raise ValueError(
            f"need {len(worst.gates)} perturbing gates, got {len(haar_gates)}"
        )
    if theta == 1.0:
        return worst
    gates = tuple(cayley_transform(h, theta) @ g for h, g in zip(haar_gates, worst.gates))
    return Circuit(worst.arch, gates)


def postselection_constant(gate_counts: dict[str, int], probs: dict[str, float]):
    """Success probability of a gate-by-gate post-selection scheme.

    Returns ``(value, log2_value)`` for prod_k p_k^(Gamma_k); the logarithm is
    exact even when the product itself underflows to zero.
    """
    log2 = 0.0
    for kind, count in gate_counts.items():
        if count == 0:
            continue
        p = probs[kind]
        if not 0.0 < p <= 1.0:
            raise ValueError(f"post-selection probability for {kind} must be in (0,1], got {p}")
        log2 += count * math.log2(p)
    return 2.0**log2, log2


#: Known post-selection probability of the two-ancilla probabilistic CZ gate.
CZ_POSTSELECTION_PROBABILITY = 2.0 / 27.0


@dataclass(frozen=True)
class LossModel:
    """Per-channel loss rates; two channels fire after each gate, one per mode."""

    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not 0.0 <= r < 1.0 for r in self.rates):
            raise ValueError("loss rates must lie in [0, 1)")

    @property
    def channels(self) -> int:
        return len(self.rates)

    @staticmethod
    def uniform(rate: float, channels: int) -> "LossModel":
        return LossModel(tuple(rate for _ in range(channels)))

    @staticmethod
    def for_circuit(circuit: Circuit, rate: float) -> "LossModel":
        return LossModel.uniform(rate, 2 * len(circuit.gates))


# ---------------------------------------------------------------------------
# Degree certification of p * Q along the path.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeCheckResult:
    degree: int
    max_residual: float
    max_abs_value: float
    leading_coefficient: float
    extra_difference_vanishes: bool

    @property
    def relative_residual(self) -> float:
        return self.max_residual / self.max_abs_value if self.max_abs_value else 0.0

    @property
    def degree_is_tight(self) -> bool:
        return self.extra_difference_vanishes and self.leading_coefficient != 0.0


def _barycentric_fit(nodes: np.ndarray, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate the interpolating polynomial through (nodes, values) at ``points``."""
    d = len(nodes) - 1
    weights = np.array([0.5 if i in (0, d) else 1.0 for i in range(d + 1)])
    weights *= np.where(np.arange(d + 1) % 2 == 0, 1.0, -1.0)
    out = np.empty(len(points))
    for idx, x in enumerate(points):
        diff = x - nodes
        exact_hit = np.isclose(diff, 0.0, atol=1e-15)
        if exact_hit.any():
            out[idx] = values[np.argmax(exact_hit)]
            continue
        common = weights / diff
        out[idx] = (common @ values) / common.sum()
    return out


def _exact_path_value(
    worst: Circuit,
    haar_gates,
    right_matrix: np.ndarray | None,
    s,
    t,
    photons: int,
    theta: Fraction,
    prefix_gates: list | None = None,
    suffix_gates: list | None = None,
) -> Fraction:
    """Exact F(theta) = p_s(V(theta) R) * Q(theta) as a rational number.

    ``prefix_gates``/``suffix_gates`` are extra unperturbed two-mode gates
    (0-based mode pairs with exact matrices) applied before/after the
    perturbed block; ``right_matrix`` multiplies on the input side.
    """
    m = worst.arch.modes
    u = [[exact.QC_ONE if i == j else exact.QC_ZERO for j in range(m)] for i in range(m)]

    def apply_sequence(seq):
        for a, b, gate in seq:
            exact.apply_two_mode_gate(u, gate, a, b)

    apply_sequence(prefix_gates or [])
    q_total = Fraction(1)
    for placement, h, g in zip(worst.arch.placements, haar_gates, worst.gates):
        cayley_q, q_theta = exact.cayley_gate_exact(h, theta)
        gate = exact.mat_mul(cayley_q, exact.mat_from_complex(g))
        exact.apply_two_mode_gate(u, gate, placement.mode_a - 1, placement.mode_b - 1)
        q_total *= q_theta.abs2()
    apply_sequence(suffix_gates or [])

    if right_matrix is not None:
        rq = exact.mat_from_complex(right_matrix)
        u = [list(row) for row in exact.mat_mul(tuple(tuple(row) for row in u), rq)]

    s = as_occupation(s, m)
    t = as_occupation(t, m)
    rows = [i for i, cnt in enumerate(s) for _ in range(cnt)]
    cols = [j for j, cnt in enumerate(t) for _ in range(cnt)]
    sub = tuple(tuple(u[i][j] for j in cols) for i in rows)
    per = exact.permanent_exact(sub)
    prob_numerator = per.abs2() / Fraction(
        int(_occupation_factorial(s)) * int(_occupation_factorial(t))
    )
    return prob_numerator * q_total**photons


def rational_degree_check(
    worst: Circuit,
    haar_gates,
    p1: Permutation,
    s,
    t,
    photons: int,
    holdout_points: int | None = None,
) -> DegreeCheckResult:
    """Certify that F(theta) = p_s(V(theta) P1) Q(theta) has tight degree 4 m N.

    Two complementary checks:

    * float fit: interpolate F at d+1 Chebyshev nodes on [0, 1] and measure
      the worst residual at held-out points (must be tiny relative to max |F|);
    * exact arithmetic: evaluate F at integer path points and take forward
      differences, so the order-(d+1) difference vanishing *exactly* and the
      order-d difference (d! times the leading coefficient) being nonzero
      certify the degree with no numerical slack.  On [0, 1] the top
      coefficient's footprint scales like 4^(-d) |c_d|, far below float
      visibility for the sizes of interest, which is why the negative control
      is exact rather than a float residual threshold.
    """
    m = len(worst.gates)
    degree = 4 * m * photons
    if degree > 80:
        raise ValueError(f"degree {degree} exceeds the supported range (<= 80)")
    p1_matrix = p1.matrix

    def f_float(theta: float) -> float:
        v = circuit_unitary(perturb_circuit(worst, haar_gates, theta))
        return output_probability(v @ p1_matrix, s, t) * big_q(haar_gates, theta, photons)

    nodes = (1.0 + np.cos(np.pi * np.arange(degree + 1) / degree)) / 2.0
    values = np.array([f_float(x) for x in nodes])
    count = 2 * degree if holdout_points is None else holdout_points
    held_out = (np.arange(count) + 0.5) / count
    fitted = _barycentric_fit(nodes, values, held_out)
    direct = np.array([f_float(x) for x in held_out])
    max_residual = float(np.max(np.abs(fitted - direct)))
    max_abs_value = float(max(np.max(np.abs(values)), np.max(np.abs(direct))))

    exact_values = [
        _exact_path_value(worst, haar_gates, p1_matrix, s, t, photons, Fraction(k))
        for k in range(degree + 2)
    ]
    leading = exact.finite_difference(exact_values, degree) / math.factorial(degree)
    extra = exact.finite_difference(exact_values, degree + 1)
    return DegreeCheckResult(
        degree=degree,
        max_residual=max_residual,
        max_abs_value=max_abs_value,
        leading_coefficient=float(leading),
        extra_difference_vanishes=(extra == 0),
    )


# ---------------------------------------------------------------------------
# The noise-free worst-to-average extrapolation pipeline.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionPlan:
    """Everything sampled for one extrapolation run.

    The evaluated circuit is P0-circuit after the perturbed block after the
    P1^(-1)-circuit (matrix P0 C0 P1^(-1)); only the worst-case block's gates
    are Cayley-perturbed, so the polynomial degree is 4 N x (C0 gate count).
    """

    worst: Circuit
    s0: tuple[int, ...]
    t: tuple[int, ...]
    p0: Permutation
    p1: Permutation
    haar_gates: tuple[np.ndarray, ...]
    delta: Fraction
    degree: int

    def __post_init__(self) -> None:
        if not 0 < self.delta <= 1:
            raise ValueError(f"path window must lie in (0, 1], got {self.delta}")

    @property
    def nodes(self) -> tuple[Fraction, ...]:
        d = self.degree
        return tuple(Fraction(i, 1) * self.delta / d for i in range(d + 1))

    @property
    def permuted_outcome(self) -> tuple[int, ...]:
        return self.p0.apply_to_occupation(self.s0)

    @property
    def amplification(self) -> float:
        """The (1/delta)^d error-amplification bookkeeping for extrapolation."""
        return float((1 / self.delta) ** self.degree)


@dataclass(frozen=True)
class ReductionDemoResult:
    extrapolated: float
    direct: float
    abs_error: float
    amplification: float
    degree: int
    delta: float
    precision: str


def build_reduction_plan(
    modes: int,
    photons: int,
    q0: int,
    rng,
    *,
    delta: Fraction | float | None = None,
    worst: Circuit | None = None,
    s0=None,
) -> ReductionPlan:
    """Sample the permutations, Haar gates and nodes for one demo run."""
    gen = as_generator(rng)
    if worst is None:
        arch = build_kaleidoscope(modes, q0)
        worst = Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))
    if worst.arch.modes != modes:
        raise ValueError("worst-case circuit does not match the requested mode count")
    t = tuple(1 if i < photons else 0 for i in range(modes))
    s0 = t if s0 is None else as_occupation(s0, modes)
    p0 = random_permutation(modes, gen)
    p1 = random_permutation(modes, gen)
    haar_gates = tuple(haar_unitary(2, gen) for _ in range(len(worst.gates)))
    m = len(worst.gates)
    if delta is None:
        delta = Fraction(1, 10 * m)
    elif not isinstance(delta, Fraction):
        delta = Fraction(float(delta))
    return ReductionPlan(
        worst=worst,
        s0=s0,
        t=t,
        p0=p0,
        p1=p1,
        haar_gates=haar_gates,
        delta=delta,
        degree=4 * m * photons,
    )


def _routed_exact_gates(perm: Permutation) -> list:
    """Exact 0/1 gate triples (a, b, matrix) of the BB* routing of ``perm``."""
    circuit = route_permutation(perm)
    triples = []
    for placement, gate in zip(circuit.arch.placements, circuit.gates):
        triples.append(
            (placement.mode_a - 1, placement.mode_b - 1, exact.mat_from_complex(gate))
        )
    return triples


def execute_reduction(plan: ReductionPlan, precision: str = "double") -> ReductionDemoResult:
    """Run the extrapolation and compare against the directly computed target.

    ``double`` evaluates nodes and the Lagrange extrapolation in float64 and
    refuses amplifications beyond :data:`DOUBLE_AMPLIFICATION_BUDGET`;
    ``exact`` computes every node value and the extrapolation in rational
    arithmetic, which is the genuinely noise-free version of the pipeline.
    """
    s_p = plan.permuted_outcome
    direct = output_probability(circuit_unitary(plan.worst), plan.s0, plan.t)
    photons = sum(plan.t)

    if precision == "double":
        if plan.amplification > DOUBLE_AMPLIFICATION_BUDGET:
            needed = int(math.ceil(math.log10(plan.amplification))) + 8
            raise PrecisionError(
                f"extrapolation amplification {plan.amplification:.2e} exceeds the double "
                f"precision budget; rerun with precision='exact' (~{needed} digits needed)"
            )
        p0_matrix = plan.p0.matrix
        p1inv_matrix = plan.p1.inverse().matrix
        p1_matrix = plan.p1.matrix
        nodes = np.array([float(x) for x in plan.nodes])
        values = []
        for theta in nodes:
            v = p0_matrix @ circuit_unitary(
                perturb_circuit(plan.worst, plan.haar_gates, float(theta))
            ) @ p1inv_matrix
            prob = output_probability(v @ p1_matrix, s_p, plan.t)
            values.append(prob * big_q(plan.haar_gates, float(theta), photons))
        total = 0.0
        for i, (xi, yi) in enumerate(zip(nodes, values)):
            weight = 1.0
            for j, xj in enumerate(nodes):
                if j != i:
                    weight *= (1.0 - xj) / (xi - xj)
            total += weight * yi
        extrapolated = total / big_q(plan.haar_gates, 1.0, photons)
    elif precision == "exact":
        prefix = _routed_exact_gates(plan.p1.inverse())
        suffix = _routed_exact_gates(plan.p0)
        p1_matrix = plan.p1.matrix
        values_exact = [
            _exact_path_value(
                plan.worst,
                plan.haar_gates,
                p1_matrix,
                s_p,
                plan.t,
                photons,
                theta,
                prefix_gates=prefix,
                suffix_gates=suffix,
            )
            for theta in plan.nodes
        ]
        p_at_one = exact.lagrange_extrapolate_exact(
            list(plan.nodes), values_exact, Fraction(1)
        )
        q_at_one = Fraction(1)
        for h in plan.haar_gates:
            _, q1 = exact.cayley_gate_exact(h, Fraction(1))
            q_at_one *= q1.abs2()
        extrapolated = float(p_at_one / q_at_one**photons)
    else:
        raise ValueError(f"unknown precision {precision!r} (use 'double' or 'exact')")

    return ReductionDemoResult(
        extrapolated=float(extrapolated),
        direct=float(direct),
        abs_error=abs(float(extrapolated) - float(direct)),
        amplification=plan.amplification,
        degree=plan.degree,
        delta=float(plan.delta),
        precision=precision,
    )


def reduction_demo(
    modes: int,
    photons: int,
    q0: int,
    rng,
    *,
    delta: Fraction | float | None = None,
    precision: str = "double",
    worst: Circuit | None = None,
    s0=None,
) -> ReductionDemoResult:
    """Sample a plan and execute it; see :func:`execute_reduction`."""
    plan = build_reduction_plan(
        modes, photons, q0, rng, delta=delta, worst=worst, s0=s0
    )
    return execute_reduction(plan, precision=precision)
