"""Command-line harness: run flows, verification suites, and benchmarks.

Exit codes: 0 ok, 1 verification failure or flow abort, 2 usage error.
Environment: MMDFLOW_THREADS caps the compiled backend's worker count,
MMDFLOW_BACKEND=numpy forces the pure-numpy fallback.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _backend as backend
from .datasets import (
    gen_annulus,
    gen_bananas,
    gen_gauss_mixture,
    gen_init_gaussian,
    gen_three_rings,
    load_csv,
    save_csv,
)
from .flow import FlowConfig, FlowDiverged, run_flow
from .mmd import ParticleCloud
from .profiles import GaussianProfile, NdProfile, RadialProfile, SndProfile, cd_constant
from .verify import SUITES, run_suite

__all__ = ["RunManifest", "cmd_flow", "cmd_verify", "cmd_bench", "main"]

TRACE_COLUMNS = ("iter", "time", "mmd2", "w2", "wall_ms")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "snd"  # gauss | snd | snd4 | nd
    sigma: float = 0.3
    eps: float = 0.01
    m: int = 2
    d_slice: int = 3

    def build(self) -> RadialProfile:
        if self.kind == "gauss":
            return GaussianProfile(self.sigma)
        if self.kind == "nd":
            return NdProfile()
        if self.kind == "snd":
            return SndProfile(self.m, self.eps, self.d_slice)
        if self.kind == "snd4":
            return SndProfile(4, self.eps, self.d_slice)
        raise ValueError(f"unknown kernel kind {self.kind!r}")


@dataclass(frozen=True)
class TargetSpec:
    kind: str = "three_rings"
    n: int = 0  # 0 -> canonical count for the kind
    d: int = 784
    modes: int = 10
    seed: int = 0
    path: str = ""

    def build(self) -> ParticleCloud:
        if self.kind == "three_rings":
            return gen_three_rings(self.n or 40)
        if self.kind == "annulus":
            return gen_annulus(self.n or 50)
        if self.kind == "bananas":
            return gen_bananas(self.n or 100, seed=self.seed)
        if self.kind == "gauss_mixture":
            return gen_gauss_mixture(self.n or 100, self.d, self.modes, seed=self.seed)
        if self.kind == "csv":
            return load_csv(self.path)
        raise ValueError(f"unknown target kind {self.kind!r}")


@dataclass(frozen=True)
class InitSpec:
    kind: str = "gaussian"  # gaussian | uniform | csv
    n: int = 120
    std: float = 1e-4
    seed: int = 1
    path: str = ""

    def build(self, d: int) -> ParticleCloud:
        if self.kind == "gaussian":
            return gen_init_gaussian(self.n, d, std=self.std, seed=self.seed)
        if self.kind == "uniform":
            return gen_init_gaussian(self.n, d, seed=self.seed, uniform=True)
        if self.kind == "csv":
            return load_csv(self.path)
        raise ValueError(f"unknown init kind {self.kind!r}")


@dataclass(frozen=True)
class RunManifest:
    kernel: KernelSpec = field(default_factory=KernelSpec)
    target: TargetSpec = field(default_factory=TargetSpec)
    init: InitSpec = field(default_factory=InitSpec)
    flow: FlowConfig = field(default_factory=FlowConfig)
    out: str = "runs/out"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        flow = dict(data.get("flow", {}))
        if flow.get("checkpoints") is not None:
            flow["checkpoints"] = tuple(flow["checkpoints"])
        return cls(
            kernel=KernelSpec(**data.get("kernel", {})),
            target=TargetSpec(**data.get("target", {})),
            init=InitSpec(**data.get("init", {})),
            flow=FlowConfig(**flow),
            out=data.get("out", "runs/out"),
        )

    def dumps(self) -> str:
        d = self.to_dict()
        if d["flow"]["checkpoints"] is not None:
            d["flow"]["checkpoints"] = list(d["flow"]["checkpoints"])
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))


def write_trace(path: Path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in records:
            writer.writerow(
                [r.iteration, f"{r.time:.17g}", f"{r.mmd2:.17g}", f"{r.w2:.17g}",
                 f"{r.wall_ms:.3f}"]
            )


def cmd_flow(manifest: RunManifest) -> int:
    out = Path(manifest.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return 2
    if not out.is_dir():
        print(f"error: output path {out} is not a directory", file=sys.stderr)
        return 2

    try:
        profile = manifest.kernel.build()
        target = manifest.target.build()
        init = manifest.init.build(target.d)
    except (ValueError, OSError) as exc:
        print(f"error: invalid manifest: {exc}", file=sys.stderr)
        return 2

    (out / "manifest.json").write_text(manifest.dumps())

    def snapshot(rec, cloud):
        save_csv(out / f"snapshot_{rec.iteration:06d}.csv", cloud)

    try:
        trace = run_flow(profile, init, target, manifest.flow, metrics=snapshot)
    except FlowDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_trace(out / "trace.csv", trace.records)
    last = trace.records[-1]
    print(
        f"done: {last.iteration} iterations, mmd2={last.mmd2:.6e}, "
        f"w2={last.w2:.6e}, wall={last.wall_ms / 1e3:.2f}s -> {out}"
    )
    return 0


def cmd_verify(suite: str, seed: int = 0) -> int:
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        print(f"error: unknown suite {suite!r}; choose from {', '.join(SUITES)} or all",
              file=sys.stderr)
        return 2
    failed = 0
    for name in names:
        for check, ok, detail in run_suite(name, seed):
            status = "pass" if ok else "FAIL"
            extra = f"  [{detail}]" if detail else ""
            print(f"[{status}] {name}: {check}{extra}")
            failed += 0 if ok else 1
    if failed:
        print(f"{failed} check(s) failed", file=sys.stderr)
        return 1
    return 0


_BENCH_KERNELS = {
    "gauss": KernelSpec(kind="gauss", sigma=0.3),
    "snd": KernelSpec(kind="snd", eps=0.01),
    "nd": KernelSpec(kind="nd"),
    "snd4": KernelSpec(kind="snd4", eps=0.01),
}


def cmd_bench(steps: int = 50_000, repeats: int = 1) -> int:
    """Time the Annulus preset per kernel and backend; informational only."""
    target = gen_annulus(50)
    init = gen_init_gaussian(100, 2, std=1e-4, seed=1)
    backends = ["numpy"] + (["ext"] if backend.have_extension() else [])
    print("kernel,backend,steps,seconds")
    import os

    for name, spec in _BENCH_KERNELS.items():
        profile = spec.build()
        for be in backends:
            os.environ["MMDFLOW_BACKEND"] = "numpy" if be == "numpy" else "auto"
            try:
                best = float("inf")
                for _ in range(repeats):
                    cfg = FlowConfig(tau=0.003, iters=steps, checkpoints=(steps,),
                                     compute_w2=False)
                    t0 = time.perf_counter()
                    run_flow(profile, init, target, cfg)
                    best = min(best, time.perf_counter() - t0)
                print(f"{name},{be},{steps},{best:.3f}")
            finally:
                os.environ.pop("MMDFLOW_BACKEND", None)
    return 0


def _parse_checkpoints(text):
    if not text:
        return None
    return tuple(int(tok) for tok in text.split(",") if tok)


def _parse_summation(text):
    if text == "dense":
        return "dense", 0
    if text.startswith("sliced"):
        _, _, count = text.partition(":")
        return "sliced", int(count) if count else 0
    raise argparse.ArgumentTypeError(
        f"summation must be 'dense' or 'sliced[:P]', got {text!r}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sndflow",
        description="MMD particle gradient flows with smoothed negative "
        "distance kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_flow = sub.add_parser("flow", help="run a particle flow and write CSV traces")
    p_flow.add_argument("--manifest", help="JSON manifest file; flags override it")
    p_flow.add_argument("--kernel", choices=("gauss", "snd", "snd4", "nd"))
    p_flow.add_argument("--sigma", type=float)
    p_flow.add_argument("--eps", type=float)
    p_flow.add_argument("--m", type=int)
    p_flow.add_argument("--d-slice", type=int, dest="d_slice")
    p_flow.add_argument("--target",
                        choices=("three_rings", "bananas", "annulus",
                                 "gauss_mixture", "csv"))
    p_flow.add_argument("--target-n", type=int, dest="target_n")
    p_flow.add_argument("--target-path", dest="target_path")
    p_flow.add_argument("--dim", type=int, help="dimension for gauss_mixture")
    p_flow.add_argument("--modes", type=int, help="mode count for gauss_mixture")
    p_flow.add_argument("--init", choices=("gaussian", "uniform", "csv"))
    p_flow.add_argument("--init-n", type=int, dest="init_n")
    p_flow.add_argument("--init-std", type=float, dest="init_std")
    p_flow.add_argument("--init-path", dest="init_path")
    p_flow.add_argument("--tau", type=float)
    p_flow.add_argument("--iters", type=int)
    p_flow.add_argument("--checkpoints", help="comma-separated iteration list")
    p_flow.add_argument("--precision", choices=("f32", "f64"))
    p_flow.add_argument("--summation", help="dense or sliced[:P]")
    p_flow.add_argument("--seed", type=int)
    p_flow.add_argument("--out")

    p_verify = sub.add_parser("verify", help="run a named property suite")
    p_verify.add_argument("suite", help=f"one of {', '.join(SUITES)} or all")
    p_verify.add_argument("--seed", type=int, default=0)

    p_bench = sub.add_parser("bench", help="time the Annulus preset per kernel")
    p_bench.add_argument("--steps", type=int, default=50_000)
    p_bench.add_argument("--repeats", type=int, default=1)
    return parser


def manifest_from_args(args) -> RunManifest:
    base = RunManifest()
    if args.manifest:
        base = RunManifest.loads(Path(args.manifest).read_text())
    kernel = base.kernel
    updates = {k: v for k, v in (
        ("kind", args.kernel), ("sigma", args.sigma), ("eps", args.eps),
        ("m", args.m), ("d_slice", args.d_slice)) if v is not None}
    if updates:
        kernel = KernelSpec(**{**asdict(kernel), **updates})
    target = base.target
    updates = {k: v for k, v in (
        ("kind", args.target), ("n", args.target_n), ("d", args.dim),
        ("modes", args.modes), ("path", args.target_path)) if v is not None}
    if updates:
        target = TargetSpec(**{**asdict(target), **updates})
    init = base.init
    updates = {k: v for k, v in (
        ("kind", args.init), ("n", args.init_n), ("std", args.init_std),
        ("path", args.init_path)) if v is not None}
    if updates:
        init = InitSpec(**{**asdict(init), **updates})
    flow = asdict(base.flow)
    if args.tau is not None:
        flow["tau"] = args.tau
    if args.iters is not None:
        flow["iters"] = args.iters
    if args.checkpoints is not None:
        flow["checkpoints"] = _parse_checkpoints(args.checkpoints)
    if args.precision is not None:
        flow["precision"] = args.precision
    if args.summation is not None:
        flow["summation"], flow["n_slices"] = _parse_summation(args.summation)
    if args.seed is not None:
        flow["seed"] = args.seed
    out = args.out if args.out is not None else base.out
    return RunManifest(kernel=kernel, target=target, init=init,
                       flow=FlowConfig(**flow), out=out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "verify":
        return cmd_verify(args.suite, args.seed)
    if args.command == "bench":
        return cmd_bench(args.steps, args.repeats)
    try:
        manifest = manifest_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return cmd_flow(manifest)


if __name__ == "__main__":
    sys.exit(main())
