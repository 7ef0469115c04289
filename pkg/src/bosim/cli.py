"""Command-line entry point.

Subcommands: generate, exact, sample, bounds, cost, figures, validate.
Machine-readable output goes to stdout or --out; a run manifest (subcommand,
flags, seed, version, timestamp) accompanies every output — as a comment
header in CSV, a field in JSON objects, and a sidecar file (or stderr note)
for JSON-lines sample streams, which stay byte-identical across reruns.

Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import secrets
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from . import __version__
from .bounds import (
    NonUniformLossModel,
    average_case_bound,
    binomial_tail,
    chernoff_bound,
    max_noise_point,
    max_noise_state,
    min_k_for_error,
    nonuniform_depth_threshold,
    point_truncation_error,
)
from .core import (
    Interferometer,
    InvalidConfigError,
    NoiseModel,
    TruncationLevel,
    standard_input,
)
from .costmodel import (
    DEFAULT_MIS_FACTOR,
    FIG1_COLUMNS,
    FIG2_COLUMNS,
    FIG3_COLUMNS,
    CostEstimate,
    crossover_n,
    fig1_data,
    fig2_data,
    fig3_data,
    point_truncation_cost,
    state_truncation_cost,
)
from .interferometer import fourier, haar_random, load_matrix, matrix_to_dict
from .oracle import (
    distinguishable_distribution,
    enumerate_outputs,
    ideal_distribution,
    lossy_mixture_distribution,
    mixture_distribution,
)
from .sampler import SamplerConfig, sample_batch
from .stats import chi_square_gof, empirical_distribution, total_variation

_BOUND_KINDS = {
    "worst-case": "worst_state",
    "average-case": "average_state",
    "chernoff": "chernoff",
    "point-error": "point",
}


@dataclass
class RunManifest:
    """Reproducibility record serialized alongside every output."""

    subcommand: str
    flags: dict
    seed: int | None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self) -> dict:
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    # Flag/usage errors are validation failures: exit 1, not argparse's 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _manifest(ns: argparse.Namespace, seed=None) -> RunManifest:
    flags = {k: v for k, v in vars(ns).items() if k not in ("func", "subcommand")}
    return RunManifest(subcommand=ns.subcommand, flags=flags, seed=seed)


def _resolve_seed(ns) -> int:
    if getattr(ns, "seed", None) is not None:
        return ns.seed
    seed = secrets.randbits(64)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _emit_json(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _emit_csv(columns, rows, manifest: RunManifest, out_path) -> None:
    def write(handle):
        handle.write("# manifest: " + json.dumps(manifest.to_dict()) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])

    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sys.stdout)


def _load_interferometer(ns, seed: int) -> Interferometer:
    if getattr(ns, "matrix", None):
        u = load_matrix(ns.matrix)
        if getattr(ns, "modes", None) is not None and ns.modes != u.modes:
            raise InvalidConfigError(
                f"--modes {ns.modes} does not match the {u.modes}-mode matrix file"
            )
        return u
    if getattr(ns, "modes", None) is None:
        raise InvalidConfigError("either --matrix or --modes is required")
    return haar_random(ns.modes, seed)


def cmd_generate(ns) -> int:
    seed = _resolve_seed(ns) if ns.haar else None
    u = haar_random(ns.modes, seed) if ns.haar else fourier(ns.modes)
    payload = matrix_to_dict(u)
    payload["manifest"] = _manifest(ns, seed).to_dict()
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
            handle.write("\n")
    else:
        print(json.dumps(payload))
    return 0


def _exact_distribution(u, n, x, eta, k):
    if eta < 1.0:
        return lossy_mixture_distribution(u, n, NoiseModel(x=x, eta=eta), k)
    if x == 0.0:
        return distinguishable_distribution(u, standard_input(n, u.modes))
    if x == 1.0 and k == n:
        return ideal_distribution(u, standard_input(n, u.modes))
    return mixture_distribution(u, n, x, k)


def cmd_exact(ns) -> int:
    seed = _resolve_seed(ns) if not ns.matrix else ns.seed
    u = _load_interferometer(ns, seed)
    k = ns.k if ns.k is not None else ns.photons
    dist = _exact_distribution(u, ns.photons, ns.x, ns.eta, k)
    rows = []
    for count in dist.support_photons:
        for occ in enumerate_outputs(count, u.modes):
            rows.append(
                {
                    "occupation": json.dumps(list(occ.occupations)),
                    "probability": repr(dist.probability(occ.occupations)),
                }
            )
    _emit_csv(("occupation", "probability"), rows, _manifest(ns, seed), ns.out)
    return 0


def cmd_sample(ns) -> int:
    seed = _resolve_seed(ns)
    u = _load_interferometer(ns, seed)
    k = ns.k if ns.k is not None else ns.photons
    cfg = SamplerConfig(
        interferometer=u,
        photons=ns.photons,
        noise=NoiseModel(x=ns.x, eta=ns.eta),
        truncation=TruncationLevel(k),
        seed=seed,
    )
    samples = sample_batch(cfg, ns.samples, threads=ns.threads)
    lines = [json.dumps(list(s.occupations)) for s in samples]
    manifest = _manifest(ns, seed)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + ("\n" if lines else ""))
        with open(ns.out + ".manifest.json", "w", encoding="utf-8") as handle:
            json.dump(manifest.to_dict(), handle, indent=2)
            handle.write("\n")
    else:
        for line in lines:
            print(line)
        print("manifest: " + json.dumps(manifest.to_dict()), file=sys.stderr)
    return 0


def cmd_bounds(ns) -> int:
    mode = ns.mode
    n, k = ns.photons, ns.k
    payload: dict = {"manifest": _manifest(ns).to_dict(), "mode": mode}
    if mode in ("worst-case", "average-case", "chernoff", "min-k"):
        p = ns.eta * ns.x
        if mode == "worst-case":
            payload["value"] = binomial_tail(n, k, p)
        elif mode == "average-case":
            payload["value"] = average_case_bound(n, k, ns.x, ns.eta)
        elif mode == "chernoff":
            payload["value"] = chernoff_bound(n, k, p)
        else:
            payload["value"] = min_k_for_error(n, p, ns.epsilon)
    elif mode == "state-max-x":
        payload["value"] = max_noise_state(n, k, ns.epsilon)
    elif mode == "point-error":
        payload["value"] = point_truncation_error(n, k, ns.x, ns.eta, finite_n=not ns.asymptotic)
    elif mode == "point-max-x":
        payload["value"] = max_noise_point(n, k, ns.epsilon, "distinguishability")
    elif mode == "point-max-eta":
        payload["value"] = max_noise_point(n, k, ns.epsilon, "loss")
    elif mode == "depth-threshold":
        if ns.tau is None:
            raise InvalidConfigError("depth-threshold needs --tau")
        model = NonUniformLossModel(
            tau=ns.tau, depth_s=ns.depth or 0, total_components=max(ns.depth or 0, 0)
        )
        threshold = nonuniform_depth_threshold(n, ns.x, k, model)
        payload["value"] = threshold
        if ns.depth is not None:
            payload["simulable"] = ns.depth > threshold
    kind = _BOUND_KINDS.get(mode)
    if kind:
        payload["kind"] = kind
    _emit_json(payload, ns.out)
    return 0


def cmd_cost(ns) -> int:
    payload: dict = {"manifest": _manifest(ns).to_dict(), "method": ns.method}
    if ns.method == "state":
        m = ns.modes if ns.modes is not None else ns.photons**2
        estimate = CostEstimate(
            operations=state_truncation_cost(ns.photons, m, ns.k),
            method="state",
            parameters={"n": ns.photons, "m": m, "k": ns.k},
        )
        payload["operations"] = estimate.operations
        payload["parameters"] = estimate.parameters
    elif ns.method == "point":
        estimate = CostEstimate(
            operations=point_truncation_cost(ns.photons, ns.k, ns.mis_factor),
            method="point",
            parameters={"n": ns.photons, "k": ns.k, "mis_factor": ns.mis_factor},
        )
        payload["operations"] = estimate.operations
        payload["parameters"] = estimate.parameters
    else:
        result = crossover_n(
            ns.x, ns.eta, ns.epsilon, range(ns.n_min, ns.n_max + 1), ns.mis_factor
        )
        payload["crossover_n"] = result
        payload["parameters"] = {
            "x": ns.x,
            "eta": ns.eta,
            "epsilon": ns.epsilon,
            "n_range": [ns.n_min, ns.n_max],
        }
    _emit_json(payload, ns.out)
    return 0


def cmd_figures(ns) -> int:
    if ns.which == "fig1":
        rows = fig1_data(range(ns.n_min, ns.n_max + 1), ns.epsilon)
        columns = FIG1_COLUMNS
    elif ns.which == "fig2":
        rows = fig2_data(range(ns.n_min, ns.n_max + 1), ns.epsilon, ns.mis_factor)
        columns = FIG2_COLUMNS
    else:
        rows = fig3_data(ns.photons, range(ns.k_min, ns.k_max + 1), ns.epsilon, ns.mis_factor)
        columns = FIG3_COLUMNS
    _emit_csv(columns, rows, _manifest(ns), ns.out)
    return 0


def _check_tvd(ns, seed: int) -> dict:
    u = haar_random(ns.modes, seed)
    cfg = SamplerConfig(
        interferometer=u,
        photons=ns.photons,
        noise=NoiseModel(x=ns.x, eta=ns.eta),
        truncation=TruncationLevel(ns.k if ns.k is not None else ns.photons),
        seed=seed,
    )
    oracle = _exact_distribution(u, cfg.photons, ns.x, ns.eta, cfg.truncation.k)
    empirical = empirical_distribution(sample_batch(cfg, ns.samples, threads=ns.threads))
    tvd = total_variation(empirical, oracle)
    return {"tvd": tvd, "threshold": ns.threshold, "passed": tvd <= ns.threshold}


def _check_photon_marginal(ns, seed: int) -> dict:
    u = haar_random(ns.modes, seed)
    cfg = SamplerConfig(
        interferometer=u,
        photons=ns.photons,
        noise=NoiseModel(x=ns.x, eta=ns.eta),
        truncation=TruncationLevel(ns.k if ns.k is not None else ns.photons),
        seed=seed,
    )
    samples = sample_batch(cfg, ns.samples, threads=ns.threads)
    observed: dict[int, int] = {}
    for s in samples:
        observed[s.detected] = observed.get(s.detected, 0) + 1
    n, eta = cfg.photons, ns.eta
    expected = {i: math.comb(n, i) * eta**i * (1 - eta) ** (n - i) for i in range(n + 1)}
    p_value = chi_square_gof(observed, expected, ns.samples)
    return {"p_value": p_value, "threshold": ns.p_threshold, "passed": p_value > ns.p_threshold}


def _check_bound_respect(ns, seed: int) -> dict:
    worst_margin = float("inf")
    checked = 0
    for n in range(2, ns.photons + 1):
        u = haar_random(2 * n, seed + n)
        for eta in (0.7, 1.0):
            full = lossy_mixture_distribution(u, n, NoiseModel(x=ns.x, eta=eta), n)
            for k in range(n):
                truncated = lossy_mixture_distribution(u, n, NoiseModel(x=ns.x, eta=eta), k)
                bound = binomial_tail(n, k, eta * ns.x)
                worst_margin = min(worst_margin, bound - total_variation(truncated, full))
                checked += 1
    return {"checked": checked, "worst_margin": worst_margin, "passed": worst_margin >= 0.0}


def cmd_validate(ns) -> int:
    seed = _resolve_seed(ns)
    if ns.check == "tvd":
        result = _check_tvd(ns, seed)
    elif ns.check == "photon-marginal":
        result = _check_photon_marginal(ns, seed)
    else:
        result = _check_bound_respect(ns, seed)
    payload = {"manifest": _manifest(ns, seed).to_dict(), "check": ns.check, **result}
    _emit_json(payload, ns.out)
    return 0 if result["passed"] else 3


def _add_common_sampling_flags(parser, with_sampling=True):
    parser.add_argument("--photons", type=int, required=True, help="photon count n (>= 0)")
    parser.add_argument("--modes", type=int, help="mode count m (>= n); Haar matrix from --seed")
    parser.add_argument("--matrix", help="JSON matrix file (overrides Haar generation)")
    parser.add_argument("--x", type=float, default=1.0, help="indistinguishability in [0, 1]")
    parser.add_argument("--eta", type=float, default=1.0, help="photon survival in [0, 1]")
    parser.add_argument("--k", type=int, default=None, help="truncation level (default: n)")
    parser.add_argument("--seed", type=int, default=None, help="64-bit seed (default: OS entropy)")
    if with_sampling:
        parser.add_argument("--samples", type=int, required=True, help="number of samples (>= 0)")
        parser.add_argument("--threads", type=int, default=1, help="worker processes")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bosim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bosim {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", parents=[], help="construct an interferometer matrix file")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--haar", action="store_true", help="Haar-random unitary")
    kind.add_argument("--fourier", action="store_true", help="discrete Fourier transform unitary")
    p.add_argument("--modes", type=int, required=True, help="mode count m (>= 1)")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (default: OS entropy)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("exact", help="exact outcome probability table (small n)")
    _add_common_sampling_flags(p, with_sampling=False)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("sample", help="draw samples from the truncated model")
    _add_common_sampling_flags(p, with_sampling=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bounds", help="closed-form error bounds and inversions")
    p.add_argument(
        "--mode",
        required=True,
        choices=[
            "worst-case",
            "average-case",
            "chernoff",
            "min-k",
            "state-max-x",
            "point-error",
            "point-max-x",
            "point-max-eta",
            "depth-threshold",
        ],
    )
    p.add_argument("--photons", type=int, required=True, help="photon count n")
    p.add_argument("--k", type=int, default=0, help="truncation level")
    p.add_argument("--x", type=float, default=1.0, help="indistinguishability in [0, 1]")
    p.add_argument("--eta", type=float, default=1.0, help="photon survival in [0, 1]")
    p.add_argument("--epsilon", type=float, default=0.1, help="target error in (0, 1)")
    p.add_argument("--asymptotic", action="store_true", help="use the n→∞ point-error form")
    p.add_argument("--tau", type=float, default=None, help="per-component transmission in (0, 1)")
    p.add_argument("--depth", type=int, default=None, help="minimal lossy components per photon")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("cost", help="abstract runtime models and their crossover")
    p.add_argument("--method", required=True, choices=["state", "point", "crossover"])
    p.add_argument("--photons", type=int, default=90, help="photon count n")
    p.add_argument("--modes", type=int, default=None, help="mode count (default n^2)")
    p.add_argument("--k", type=int, default=0, help="truncation level")
    p.add_argument("--x", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--mis-factor", type=float, default=DEFAULT_MIS_FACTOR)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("figures", help="CSV data behind the comparison figures")
    p.add_argument("--which", required=True, choices=["fig1", "fig2", "fig3"])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=None, help="default: 100 (fig1) or 500 (fig2)")
    p.add_argument("--photons", type=int, default=90, help="fig3 photon count")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=None, help="default: photons − 1 (fig3)")
    p.add_argument("--mis-factor", type=float, default=DEFAULT_MIS_FACTOR)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("validate", help="run a named statistical self-check")
    p.add_argument("--check", required=True, choices=["tvd", "photon-marginal", "bound-respect"])
    p.add_argument("--photons", type=int, default=3)
    p.add_argument("--modes", type=int, default=9)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--threshold", type=float, default=0.05, help="max TVD for the tvd check")
    p.add_argument("--p-threshold", type=float, default=0.01, help="min p-value for marginals")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # Fill figure range defaults that depend on other flags.
    if ns.subcommand == "figures":
        if ns.n_max is None:
            ns.n_max = 100 if ns.which == "fig1" else 500
        if ns.k_max is None:
            ns.k_max = ns.photons - 1
    try:
        return ns.func(ns)
    except ValueError as exc:
        print(f"bosim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"bosim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
