"""Command-line front end: every experiment as a seeded, reproducible subcommand.

All randomness flows from ``--seed`` through documented handle splitting, so a
config + seed pair pins every output byte.  Flags can be preloaded from a JSON
config file (``--config``); explicitly passed flags win.  Exit codes: 0 on
pass, 2 when a checked quantity misses its band, 1 on usage errors.
"""

from __future__ import annotations

import json
import math
import sys
from fractions import Fraction

import click
import numpy as np

from .architecture import Circuit, build_kaleidoscope, circuit_unitary
from .cayley import (
    LossModel,
    PrecisionError,
    rational_degree_check,
    reduction_demo,
)
from .gbs import verify_gbs_reduction
from .linalg import RngHandle, haar_unitary
from .loss import lossy_trajectories, no_loss_probability
from .probability import full_distribution
from .routing import Permutation, random_permutation, route_permutation, verify_embedding
from .sampling import (
    CollisionRatioConfig,
    PAPER_SCALE_CONFIG,
    balls_bins_singletons,
    birthday_bound_check,
    collision_ratio_experiment,
    first_modes_input,
    records_to_csv,
    summarize_ratios,
)


class CheckFailed(RuntimeError):
    """A subcommand's asserted band was missed (exit code 2)."""


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in str(text).replace(" ", "").split(",") if tok)


def _merged_params(ctx: click.Context, **params):
    """Overlay file-config values on parameters the user left at their defaults."""
    config_path = params.pop("config", None)
    if not config_path:
        return params
    with open(config_path) as fh:
        file_cfg = json.load(fh)
    unknown = set(file_cfg) - set(params)
    if unknown:
        raise click.UsageError(f"config file has unknown keys: {sorted(unknown)}")
    for key, value in file_cfg.items():
        if ctx.get_parameter_source(key) == click.core.ParameterSource.DEFAULT:
            params[key] = value
    return params


def _dump_config(path: str | None, params: dict) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(params, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


@click.group()
def cli() -> None:
    """Shallow-depth linear-optics laboratory."""


@cli.command("collision-ratio")
@click.option("--modes", type=int, default=64, show_default=True)
@click.option("--photons", default="4,6,8", show_default=True, help="comma-separated N values")
@click.option("--reps", default="1,2,3", show_default=True, help="comma-separated q values")
@click.option("--circuits", type=int, default=100, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--ensembles", default="local,haar", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="results.csv", show_default=True)
@click.option("--threads", type=int, default=1, envvar="BOSONLAB_THREADS", show_default=True)
@click.option("--paper-scale", is_flag=True, help="run the full 256-mode 500x500 sweep (hours)")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--dump-config", "dump_config", type=click.Path(), default=None)
@click.pass_context
def collision_ratio_cmd(ctx, **params):
    """Collision-free outcome ratios across circuit ensembles."""
    dump = params.pop("dump_config", None)
    params = _merged_params(ctx, **params)
    threads = params.pop("threads")
    out = params.pop("out")
    if params.pop("paper_scale"):
        config = PAPER_SCALE_CONFIG
    else:
        config = CollisionRatioConfig(
            modes=params["modes"],
            photons=_int_list(params["photons"]),
            reps=_int_list(params["reps"]),
            num_circuits=params["circuits"],
            num_samples=params["samples"],
            ensembles=tuple(str(params["ensembles"]).replace(" ", "").split(",")),
            seed=params["seed"],
        )
    _dump_config(dump, params)
    records = collision_ratio_experiment(config, threads=threads)
    with open(out, "w") as fh:
        fh.write(records_to_csv(records))
    click.echo(f"wrote {len(records)} records to {out}")
    for (ensemble, q, n), (mean, std, se) in sorted(summarize_ratios(records).items()):
        label = ensemble if ensemble == "haar" else f"{ensemble} q={q}"
        click.echo(f"  {label:14s} N={n:2d}  ratio {mean:.4f} +- {std:.4f} (se {se:.4f})")


@cli.command("birthday-bound")
@click.option("--modes", type=int, default=32, show_default=True)
@click.option("--photons", type=int, default=3, show_default=True)
@click.option("--circuits", type=int, default=50, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--q", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def birthday_bound_cmd(ctx, **params):
    """Monte Carlo collision probability against the dilute-regime bound."""
    params = _merged_params(ctx, **params)
    res = birthday_bound_check(
        params["modes"],
        params["photons"],
        params["circuits"],
        params["samples"],
        RngHandle(params["seed"]),
        q=params["q"],
    )
    click.echo(
        f"collision probability {res.empirical:.5f} (se {res.std_error:.5f}) "
        f"vs bound 2N^2/M = {res.bound:.5f}"
    )
    if not res.within_bound:
        raise CheckFailed("empirical collision probability exceeds the bound + 3*se")


@cli.command("balls-bins")
@click.option("--modes", type=int, default=256, show_default=True, help="bins")
@click.option("--balls", type=int, default=16, show_default=True)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--tail-threshold", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def balls_bins_cmd(ctx, **params):
    """Singleton statistics of uniform balls-into-bins throws."""
    params = _merged_params(ctx, **params)
    res = balls_bins_singletons(
        params["modes"],
        params["balls"],
        params["trials"],
        RngHandle(params["seed"]),
        tail_threshold=params["tail_threshold"],
    )
    click.echo(
        f"mean singletons {res.mean_singletons:.4f} (se {res.std_error:.4f}); "
        f"poissonized {res.poissonized_mean:.4f}, exact {res.exact_mean:.4f}"
    )
    click.echo(
        f"tail P[Z <= {res.tail_threshold:g}] = {res.tail_empirical:.5f} "
        f"vs chernoff {res.tail_chernoff:.5f}"
    )
    slack = 3.0 * res.std_error + abs(res.exact_mean - res.poissonized_mean)
    if abs(res.mean_singletons - res.poissonized_mean) > slack:
        raise CheckFailed("singleton mean outside 3 sigma + poissonization slack")
    if res.tail_empirical > res.tail_chernoff:
        raise CheckFailed("empirical tail above the chernoff expression")


@cli.command("route-permutation")
@click.option("--modes", type=int, default=8, show_default=True)
@click.option("--perm", default=None, help='target permutation, e.g. "3,1,2,4"')
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def route_permutation_cmd(ctx, **params):
    """Route a permutation into BB* and print the switch settings."""
    params = _merged_params(ctx, **params)
    modes = params["modes"]
    if params["perm"]:
        perm = Permutation(_int_list(params["perm"]))
        if perm.size != modes:
            raise click.UsageError(f"permutation has {perm.size} entries, --modes is {modes}")
    else:
        perm = random_permutation(modes, RngHandle(params["seed"]))
    circuit = route_permutation(perm)
    gate_iter = iter(circuit.gates)
    click.echo(f"target image: {','.join(str(v) for v in perm.image)}")
    for layer in circuit.arch.layers:
        settings = []
        for placement in layer:
            gate = next(gate_iter)
            kind = "X" if gate[0, 0] == 0 else "I"
            settings.append(f"({placement.mode_a},{placement.mode_b}):{kind}")
        click.echo(f"layer {layer[0].layer:2d}: " + "  ".join(settings))
    residual = float(np.max(np.abs(circuit_unitary(circuit) - perm.matrix)))
    click.echo(f"residual {residual:.3e}")
    if residual > 1e-10:
        raise CheckFailed("routed circuit does not reproduce the permutation matrix")


@cli.command("reduction-demo")
@click.option("--modes", type=int, default=2, show_default=True)
@click.option("--photons", type=int, default=1, show_default=True)
@click.option("--q0", type=int, default=1, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option(
    "--precision",
    type=click.Choice(["double", "extended"]),
    default="double",
    show_default=True,
    help="extended = exact rational node values and extrapolation",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tolerance", type=float, default=None, help="fail if abs error exceeds this")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--dump-config", "dump_config", type=click.Path(), default=None)
@click.pass_context
def reduction_demo_cmd(ctx, **params):
    """Cayley-path extrapolation of a worst-case output probability."""
    dump = params.pop("dump_config", None)
    params = _merged_params(ctx, **params)
    _dump_config(dump, params)
    precision = "exact" if params["precision"] == "extended" else "double"
    try:
        result = reduction_demo(
            params["modes"],
            params["photons"],
            params["q0"],
            RngHandle(params["seed"]),
            delta=Fraction(str(params["delta"])),
            precision=precision,
        )
    except PrecisionError as exc:
        raise CheckFailed(str(exc)) from exc
    report = {
        "extrapolated": result.extrapolated,
        "direct": result.direct,
        "abs_error": result.abs_error,
        "amplification": result.amplification,
        "degree": result.degree,
        "delta": result.delta,
        "precision": params["precision"],
    }
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    tol = params["tolerance"]
    if tol is not None and result.abs_error > tol:
        raise CheckFailed(f"abs error {result.abs_error:.3e} above tolerance {tol:g}")


@cli.command("degree-check")
@click.option("--modes", type=int, default=4, show_default=True)
@click.option("--photons", type=int, default=2, show_default=True)
@click.option("--q", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def degree_check_cmd(ctx, **params):
    """Certify the polynomial degree of probability * denominator on the path."""
    params = _merged_params(ctx, **params)
    gen = RngHandle(params["seed"]).generator()
    arch = build_kaleidoscope(params["modes"], params["q"])
    worst = Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))
    haar_gates = [haar_unitary(2, gen) for _ in range(arch.gate_count)]
    p1 = random_permutation(params["modes"], gen)
    s = first_modes_input(params["modes"], params["photons"])
    result = rational_degree_check(worst, haar_gates, p1, s, s, params["photons"])
    report = {
        "degree": result.degree,
        "max_residual": result.max_residual,
        "max_abs_value": result.max_abs_value,
        "relative_residual": result.relative_residual,
        "leading_coefficient": result.leading_coefficient,
        "extra_difference_vanishes": result.extra_difference_vanishes,
        "degree_is_tight": result.degree_is_tight,
    }
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    if result.relative_residual > 1e-8:
        raise CheckFailed("degree-d fit residual above 1e-8 relative")
    if not result.degree_is_tight:
        raise CheckFailed("polynomial degree is not tight at 4mN")


@cli.command("loss-check")
@click.option("--modes", type=int, default=4, show_default=True)
@click.option("--photons", type=int, default=2, show_default=True)
@click.option("--rho", type=float, default=0.15, show_default=True)
@click.option("--samples", type=int, default=200000, show_default=True)
@click.option("--q", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def loss_check_cmd(ctx, **params):
    """Loss-trajectory comparison: conditional distribution and no-loss rate."""
    params = _merged_params(ctx, **params)
    gen = RngHandle(params["seed"]).generator()
    arch = build_kaleidoscope(params["modes"], params["q"])
    circuit = Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))
    loss = LossModel.for_circuit(circuit, params["rho"])
    t = first_modes_input(params["modes"], params["photons"])
    results = lossy_trajectories(circuit, t, loss, gen, params["samples"])

    expected_rate = no_loss_probability(loss)
    flags = sum(r.no_loss for r in results)
    rate = flags / len(results)
    sigma = math.sqrt(expected_rate * (1.0 - expected_rate) / len(results))
    click.echo(
        f"no-loss rate {rate:.5f} vs product {expected_rate:.5f} "
        f"(z = {(rate - expected_rate) / sigma:+.2f})"
    )

    ideal = full_distribution(circuit_unitary(circuit), t)
    counts: dict[tuple[int, ...], int] = {}
    for r in results:
        if r.no_loss:
            counts[r.outcome] = counts.get(r.outcome, 0) + 1
    observed = np.array([counts.get(s, 0) for s in ideal], dtype=float)
    expected = np.array([p * flags for p in ideal.values()])
    tv = 0.5 * float(np.abs(observed / flags - expected / flags).sum())
    keep = expected >= 5.0
    obs2 = np.append(observed[keep], observed[~keep].sum())
    exp2 = np.append(expected[keep], expected[~keep].sum())
    chi2 = float(((obs2 - exp2) ** 2 / np.where(exp2 > 0, exp2, 1.0)).sum())
    dof = len(exp2) - 1
    click.echo(f"conditional-vs-ideal: tv {tv:.5f}, chi2 {chi2:.1f} on {dof} dof")

    mean_lost = sum(r.lost_photons for r in results) / len(results)
    click.echo(f"mean photons lost per trajectory: {mean_lost:.4f}")
    if abs(rate - expected_rate) > 4.0 * sigma:
        raise CheckFailed("no-loss rate outside 4 sigma of the channel product")
    if chi2 > dof + 5.0 * math.sqrt(2.0 * dof):
        raise CheckFailed("conditional distribution drifted from the ideal one")


@cli.command("gbs-check")
@click.option("--m0", type=int, default=2, show_default=True)
@click.option("--n0", type=int, default=1, show_default=True)
@click.option("--r", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.pass_context
def gbs_check_cmd(ctx, **params):
    """Three-way check of the squeezed-light doubling identity."""
    params = _merged_params(ctx, **params)
    gen = RngHandle(params["seed"]).generator()
    m0, n0, r = params["m0"], params["n0"], params["r"]
    arch = build_kaleidoscope(m0, 1)
    base = Circuit(arch, tuple(haar_unitary(2, gen) for _ in range(arch.gate_count)))
    s0 = first_modes_input(m0, n0)
    report = verify_gbs_reduction(base, s0, r)
    click.echo(f"hafnian path  q_s(C)          = {report.lhs:.12e}")
    click.echo(f"permanent path prefactor * p  = {report.rhs:.12e}")
    click.echo(f"abs diff                      = {report.abs_diff:.3e}")
    fock_value = None
    if 2 * m0 <= 4:
        from .gbs import build_tmsv_embedding, interleave_outcome, truncated_fock_outcome_probability

        doubled = build_tmsv_embedding(base)
        fock_value = truncated_fock_outcome_probability(
            circuit_unitary(doubled), r, interleave_outcome(s0, s0)
        )
        click.echo(f"truncated-Fock oracle         = {fock_value:.12e}")
    if report.abs_diff > 1e-8:
        raise CheckFailed("hafnian and permanent paths disagree beyond 1e-8")
    if fock_value is not None and abs(fock_value - report.lhs) > 1e-6:
        raise CheckFailed("Fock oracle disagrees with the hafnian path beyond 1e-6")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except CheckFailed as exc:
        click.echo(f"FAIL: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
