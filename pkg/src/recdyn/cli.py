"""Command line front end: reproducible experiments with CSV/PGM artifacts.

Every run writes its outputs plus a one-line JSON manifest recording the
subcommand, flags, seed, and tool version; a hash of those fields (never the
wall time) is embedded in each CSV header, so identical invocations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import NumericalGuardError, ValidationError
from .expanding import (
    TransferOperator,
    doubling_map,
    expected_children,
    local_global_tau_expanding,
    trig_expanding_map,
)
from .funcgraph import analyze
from .grid import GridSpec, discretize, dump_finite_map
from .lindisc import (
    image_stages,
    random_sl2_seq,
    rate_injectivity_ball,
    rate_injectivity_ball_prefixes,
    render_image,
    truncated_density,
)
from .localglobal import circle_as_torus_map, get_builtin, tau_k_integral
from .modelset import MatrixSeq, mean_rate, mean_rate_alt

_EXPANDING_BUILTINS = {
    "expanding-trig": trig_expanding_map,
    "paper-expanding": trig_expanding_map,
    "doubling": doubling_map,
}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % float(value)


def _parse_orders(text: str) -> list[int]:
    """`start:step:stop` inclusive, or a single order."""
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ValidationError(f"bad orders spec {text!r}")
    if len(nums) == 1:
        start, step, stop = nums[0], 1, nums[0]
    elif len(nums) == 3:
        start, step, stop = nums
    else:
        raise ValidationError("orders must be N or start:step:stop")
    if start < 1 or step < 1 or stop < start:
        raise ValidationError("orders need 1 <= start <= stop and step >= 1")
    return list(range(start, stop + 1, step))


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise ValidationError(f"bad integer list {text!r}")


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError:
        raise ValidationError(f"bad number list {text!r}")


def _builtin_name(text: str) -> str:
    if not text.startswith("builtin:"):
        raise ValidationError("map must be given as builtin:<name>")
    return text[len("builtin:"):]


def _expanding_map(text: str):
    name = _builtin_name(text)
    try:
        return _EXPANDING_BUILTINS[name]()
    except KeyError:
        known = ", ".join(sorted(set(_EXPANDING_BUILTINS)))
        raise ValidationError(f"unknown expanding builtin {name!r} (known: {known})")


@dataclass
class RunManifest:
    """Identity of one CLI run; the hash covers everything but wall time."""

    subcommand: str
    flags: dict
    version: str
    outputs: list

    def digest(self) -> str:
        body = json.dumps(
            {
                "subcommand": self.subcommand,
                "flags": self.flags,
                "version": self.version,
            },
            sort_keys=True,
            default=str,
        )
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    def write(self, path: str, wall_time_s: float) -> None:
        record = {
            "subcommand": self.subcommand,
            "flags": self.flags,
            "version": self.version,
            "outputs": self.outputs,
            "manifest_hash": self.digest(),
            "wall_time_s": round(wall_time_s, 3),
        }
        with open(path, "w") as fh:
            json.dump(record, fh, sort_keys=True, default=str)
            fh.write("\n")


def _write_csv(path, manifest: RunManifest, units: str, header: list[str],
               rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# recdyn {manifest.subcommand} manifest={manifest.digest()}\n")
        fh.write(f"# columns: {units}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    manifest.outputs.append(str(path))


def _dor_rows(smap, orders: list[int], t_max: int, dump_dir: str | None):
    rows = []
    dumps = []
    for N in orders:
        spec = GridSpec(smap.dim, N)
        fm = discretize(smap, spec)
        rep = analyze(fm, t_max=t_max)
        rows.append([N, rep.degree, rep.stabilization_t, *rep.tau_by_t.tolist()])
        if dump_dir is not None:
            path = os.path.join(dump_dir, f"{smap.name}_N{N}.rdfm")
            dump_finite_map(fm, path)
            dumps.append(path)
    return rows, dumps


_DOR_UNITS = ("N grid order; D recurrent fraction in [0,1]; stabilization_t "
              "iterations; tau_t image-density fractions, constant at D once "
              "t reaches stabilization_t")


def cmd_grid_dor(args, manifest: RunManifest) -> None:
    smap = get_builtin(_builtin_name(args.map))
    orders = _parse_orders(args.orders)
    if args.dump is not None:
        os.makedirs(args.dump, exist_ok=True)
    rows, dumps = _dor_rows(smap, orders, args.t_max, args.dump)
    header = ["N", "D", "stabilization_t"] + [f"tau_{t}" for t in range(1, args.t_max + 1)]
    _write_csv(args.out, manifest, _DOR_UNITS, header, rows)
    manifest.outputs.extend(dumps)


def cmd_expanding_dor(args, manifest: RunManifest) -> None:
    smap = get_builtin(_builtin_name(args.map))
    if smap.dim != 1:
        raise ValidationError("expanding-dor handles circle maps only")
    orders = _parse_orders(args.orders)
    if args.dump is not None:
        os.makedirs(args.dump, exist_ok=True)
    rows, dumps = _dor_rows(smap, orders, args.t_max, args.dump)
    header = ["N", "D", "stabilization_t"] + [f"tau_{t}" for t in range(1, args.t_max + 1)]
    _write_csv(args.out, manifest, _DOR_UNITS, header, rows)
    manifest.outputs.extend(dumps)


def cmd_linear_image(args, manifest: RunManifest) -> None:
    if args.sampler != "svd":
        raise ValidationError("only the svd sampler is available")
    if args.dim != 2:
        raise ValidationError("the svd sampler draws 2x2 matrices; use --dim 2")
    seq = random_sl2_seq(args.k, args.seed, with_shifts=args.with_shifts)
    os.makedirs(args.out, exist_ok=True)

    stages = image_stages(seq, args.radius)
    try:
        rates = rate_injectivity_ball_prefixes(seq, args.radius)
        rows = [[args.seed, j + 1, args.radius, br.R_prime, br.rate]
                for j, br in enumerate(rates)]
    except NumericalGuardError:
        # deep prefixes can shrink the output ball below the minimum; fall
        # back per prefix, reporting truncated density with R_prime = 0
        rows = []
        for j in range(1, seq.k + 1):
            try:
                br = rate_injectivity_ball(seq.prefix(j), args.radius)
                rows.append([args.seed, j, args.radius, br.R_prime, br.rate])
            except NumericalGuardError:
                rows.append([args.seed, j, args.radius, 0.0,
                             truncated_density(stages[j - 1])])

    csv_path = os.path.join(args.out, "rates.csv")
    _write_csv(csv_path, manifest,
               "seed PRNG seed; k prefix length; R input radius; R_prime "
               "measured output radius (0 when the truncated-density fallback "
               "was used); rate image density in [0,1]",
               ["seed", "k", "R", "R_prime", "rate"], rows)
    for j, ps in enumerate(stages, start=1):
        side = 2 * int(np.floor(ps.radius)) + 1
        if side > 8192:
            continue  # stage radius too large to raster
        img_path = os.path.join(args.out, f"stage_{j:02d}.pgm")
        render_image(ps, img_path)
        manifest.outputs.append(img_path)


def _load_matrix_seq(path: str) -> MatrixSeq:
    """One matrix per CSV row, row-major entries."""
    rows = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([float(p) for p in line.split(",") if p.strip()])
    except OSError as exc:
        raise ValidationError(f"cannot read matrix file: {exc}")
    except ValueError:
        raise ValidationError(f"non-numeric entry in matrix file {path!r}")
    if not rows:
        raise ValidationError("matrix file is empty")
    n = int(round(len(rows[0]) ** 0.5))
    if n * n != len(rows[0]):
        raise ValidationError("matrix rows must hold n*n entries")
    mats = []
    for row in rows:
        if len(row) != n * n:
            raise ValidationError("matrix rows have inconsistent lengths")
        mats.append(np.array(row, dtype=np.float64).reshape(n, n))
    return MatrixSeq(n, tuple(mats))


def cmd_mean_rate(args, manifest: RunManifest) -> None:
    if args.identity:
        if args.k is None:
            raise ValidationError("--identity needs --k")
        seq = MatrixSeq(args.dim, tuple(np.eye(args.dim) for _ in range(args.k)))
    elif args.matrices is not None:
        seq = _load_matrix_seq(args.matrices)
    else:
        raise ValidationError("give either --matrices FILE or --identity")
    estimator = mean_rate_alt if args.alt else mean_rate

    rows = []
    if args.prefixes:
        child = np.random.SeedSequence(args.seed).generate_state(seq.k)
        for j in range(1, seq.k + 1):
            res = estimator(seq.prefix(j), args.samples, int(child[j - 1]))
            rows.append([j, res.estimate, res.std_error, res.covolume])
    else:
        res = estimator(seq, args.samples, args.seed)
        rows.append([seq.k, res.estimate, res.std_error, res.covolume])
    _write_csv(args.out, manifest,
               "k sequence length; estimate mean rate in [0,1]; std_error "
               "binomial MC error; covolume fundamental-domain volume",
               ["k", "estimate", "std_error", "covolume"], rows)


def cmd_tau_decay(args, manifest: RunManifest) -> None:
    if args.dim != 2:
        raise ValidationError("the svd sampler draws 2x2 matrices; use --dim 2")
    if args.k_max < 1 or args.seqs < 1:
        raise ValidationError("need k-max >= 1 and seqs >= 1")
    k_grid = _parse_int_list(args.k_grid) if args.k_grid else list(range(1, args.k_max + 1))
    if any(k < 1 or k > args.k_max for k in k_grid):
        raise ValidationError("k-grid entries must lie in 1..k-max")
    k_grid = sorted(set(k_grid))

    root = np.random.SeedSequence(args.seed)
    seq_bits, mc_bits = root.spawn(2)
    seq_seeds = seq_bits.generate_state(args.seqs)
    mc_seeds = mc_bits.generate_state(args.seqs * len(k_grid)).reshape(
        args.seqs, len(k_grid))

    per_seq = np.empty((args.seqs, len(k_grid)))
    inner_var = np.empty((args.seqs, len(k_grid)))
    for i in range(args.seqs):
        seq = random_sl2_seq(args.k_max, int(seq_seeds[i]))
        for jk, k in enumerate(k_grid):
            res = mean_rate(seq.prefix(k), args.samples, int(mc_seeds[i, jk]))
            per_seq[i, jk] = res.estimate
            inner_var[i, jk] = res.std_error ** 2

    rows = []
    for jk, k in enumerate(k_grid):
        mean = float(per_seq[:, jk].mean())
        between = float(per_seq[:, jk].var(ddof=1)) if args.seqs > 1 else 0.0
        se = float(np.sqrt(between / args.seqs + inner_var[:, jk].mean() / args.seqs))
        rows.append([k, mean, se])
    _write_csv(args.out, manifest,
               "k sequence length; tau_mean mean rate averaged over random "
               "sequences, in [0,1]; tau_stderr combined MC error",
               ["k", "tau_mean", "tau_stderr"], rows)


def cmd_local_global(args, manifest: RunManifest) -> None:
    smap = get_builtin(_builtin_name(args.map))
    res = tau_k_integral(smap, args.k, args.samples, args.mc, args.seed)
    _write_csv(args.out, manifest,
               "k cocycle length; estimate integrated mean rate in [0,1]; "
               "std_error combined MC error; samples base points; "
               "mc_per_point lattice samples per base point",
               ["k", "estimate", "std_error", "samples", "mc_per_point"],
               [[args.k, res.estimate, res.std_error, res.samples,
                 res.mc_per_point]])


def cmd_local_global_expanding(args, manifest: RunManifest) -> None:
    emap = _expanding_map(args.map)
    integral = local_global_tau_expanding(emap, args.k, quad_points=args.quad)
    fm = discretize(circle_as_torus_map(emap), GridSpec(1, args.n))
    rep = analyze(fm, t_max=max(args.k, 1))
    grid_tau = float(rep.tau_by_t[args.k - 1])
    _write_csv(args.out, manifest,
               "k tree depth; integral mean tree density in [0,1]; grid_tau "
               "measured image density at order N; abs_diff |integral - "
               "grid_tau|; N grid order; quad quadrature points",
               ["k", "integral", "grid_tau", "abs_diff", "N", "quad"],
               [[args.k, integral, grid_tau, abs(integral - grid_tau),
                 args.n, args.quad]])


def cmd_transfer_check(args, manifest: RunManifest) -> None:
    emap = _expanding_map(args.map)
    ms = _parse_int_list(args.m)
    ys = _parse_float_list(args.y)
    if not ms or not ys:
        raise ValidationError("need at least one m and one y")
    if min(ms) < 1:
        raise ValidationError("m values must be >= 1")
    op = TransferOperator(emap, args.grid_m)
    iterates = op.iterates_of_one(max(ms))
    child = np.random.SeedSequence(args.seed).generate_state(len(ms) * len(ys))
    rows = []
    idx = 0
    for m in ms:
        phi = iterates[m - 1]
        for y in ys:
            mc_mean, mc_se = expected_children(emap, y, m, args.trials,
                                               int(child[idx]))
            idx += 1
            lm = float(op.interp(phi, np.asarray([y]))[0])
            z = abs(mc_mean - lm) / mc_se if mc_se > 0 else 0.0
            rows.append([m, y, mc_mean, mc_se, lm, z])
    _write_csv(args.out, manifest,
               "m tree depth; y base point on the circle; mc_mean MC expected "
               "surviving leaves; mc_se its std error; transfer_value m-fold "
               "transfer operator applied to 1, at y; z |difference| in sigmas",
               ["m", "y", "mc_mean", "mc_se", "transfer_value", "z"], rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recdyn",
        description="Grid discretizations of torus maps and their invariants.",
    )
    parser.add_argument("--version", action="version",
                        version=f"recdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--out", default=default_out,
                       help="output CSV path or directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (falls back to RECDYN_THREADS)")

    p = sub.add_parser("grid-dor",
                       help="degree of recurrence of a discretized torus map")
    p.add_argument("--map", required=True, help="builtin:<name>")
    p.add_argument("--orders", required=True, help="grid orders start:step:stop")
    p.add_argument("--t-max", type=int, default=64)
    p.add_argument("--dump", default=None,
                   help="directory for binary finite-map dumps")
    common(p, "grid-dor.csv")
    p.set_defaults(func=cmd_grid_dor)

    p = sub.add_parser("expanding-dor",
                       help="degree of recurrence of a discretized circle map")
    p.add_argument("--map", default="builtin:expanding-trig")
    p.add_argument("--orders", required=True)
    p.add_argument("--t-max", type=int, default=64)
    p.add_argument("--dump", default=None)
    common(p, "expanding-dor.csv")
    p.set_defaults(func=cmd_expanding_dor)

    p = sub.add_parser("linear-image",
                       help="image sets and ball rates of random matrix sequences")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sampler", default="svd", choices=["svd"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=200.0)
    p.add_argument("--with-shifts", action="store_true",
                   help="draw random shifts alongside the matrices")
    common(p, "linear-image")
    p.set_defaults(func=cmd_linear_image)

    p = sub.add_parser("mean-rate",
                       help="Monte Carlo mean rate of a matrix sequence")
    p.add_argument("--matrices", default=None,
                   help="CSV file, one matrix per row, row-major")
    p.add_argument("--identity", action="store_true",
                   help="use k copies of the identity instead of a file")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alt", action="store_true",
                   help="use the full-lattice estimator")
    p.add_argument("--prefixes", action="store_true",
                   help="one CSV row per prefix length")
    common(p, "mean-rate.csv")
    p.set_defaults(func=cmd_mean_rate)

    p = sub.add_parser("tau-decay",
                       help="mean-rate decay over random matrix sequences")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--seqs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--k-grid", default=None,
                   help="comma list of k values (default 1..k-max)")
    common(p, "tau-decay.csv")
    p.set_defaults(func=cmd_tau_decay)

    p = sub.add_parser("local-global",
                       help="integrated cocycle mean rate of a builtin map")
    p.add_argument("--map", default="builtin:shear-pair")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--mc", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    common(p, "local-global.csv")
    p.set_defaults(func=cmd_local_global)

    p = sub.add_parser("local-global-expanding",
                       help="tree-density integral vs measured image density")
    p.add_argument("--map", default="builtin:expanding-trig")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=32_768,
                   help="grid order for the measured side")
    p.add_argument("--quad", type=int, default=256)
    common(p, "local-global-expanding.csv")
    p.set_defaults(func=cmd_local_global_expanding)

    p = sub.add_parser("transfer-check",
                       help="expected surviving leaves vs transfer operator")
    p.add_argument("--map", default="builtin:expanding-trig")
    p.add_argument("--m", default="2,4,6", help="comma list of depths")
    p.add_argument("--y", default="0.1,0.5,0.9", help="comma list of base points")
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-m", type=int, default=4096,
                   help="transfer operator grid size")
    common(p, "transfer-check.csv")
    p.set_defaults(func=cmd_transfer_check)

    return parser


def _effective_threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("RECDYN_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError("RECDYN_THREADS must be an integer")
    return None


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = _effective_threads(args)
    if threads is not None and threads < 1:
        raise ValidationError("thread cap must be >= 1")

    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    flags["threads"] = threads
    manifest = RunManifest(args.command, flags, __version__, outputs=[])

    start = time.time()
    args.func(args, manifest)
    wall = time.time() - start

    out = flags.get("out") or args.command
    if os.path.isdir(out):
        manifest_path = os.path.join(out, "manifest.json")
    else:
        manifest_path = str(out) + ".manifest.json"
    manifest.write(manifest_path, wall)
    for path in manifest.outputs:
        print(f"wrote {path}")
    print(f"manifest {manifest_path} hash={manifest.digest()}")
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
