"""Batch CLI: build a scene from a table and export meshes plus a run report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ao import AOParams
from .dataset import load_table, normalize_columns
from .export import export_scene
from .pipeline import PipelineError, SceneParams, SceneState
from .report import write_report
from .subspace import axis_basis


def _parse_dims(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--dims expects three comma-separated indices")
    return parts[0], parts[1], parts[2]


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subspace-shapes")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a scene once and export it")
    b.add_argument("--input", required=True, type=Path, help="delimited table with header row")
    b.add_argument("--label-column", default=None, help="cluster label column name")
    b.add_argument("--dims", type=_parse_dims, default=(0, 1, 2), help="axis dimensions I,J,K")
    b.add_argument("--resolution", type=int, default=64)
    b.add_argument("--filter-half-width", type=int, default=1)
    b.add_argument("--iterations", type=int, default=3)
    b.add_argument("--layers", type=int, default=1)
    b.add_argument("--opacity", type=float, default=1.0)
    b.add_argument("--tau-out", type=float, default=0.1, help="outer iso as fraction of field max")
    b.add_argument("--ao-dirs", type=int, default=64)
    b.add_argument("--outliers", type=_parse_bool, default=False)
    b.add_argument("--format", choices=("obj", "gltf"), default="obj")
    b.add_argument("--out", required=True, type=Path, help="output path (stem used for sidecars)")

    s = sub.add_parser("serve", help="run the session web API")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8777)
    return parser


def run_build(args: argparse.Namespace) -> int:
    def fail(stage: str, exc: Exception) -> int:
        print(f"stage {stage!r} failed: {exc}", file=sys.stderr)
        return 1

    try:
        raw = args.input.read_bytes()
    except OSError as exc:
        return fail("read_input", exc)
    try:
        dataset = normalize_columns(load_table(raw, args.label_column))
    except ValueError as exc:
        return fail("load_table", exc)
    try:
        basis = axis_basis(*args.dims, dataset.n_dims)
        params = SceneParams(
            mode="shape",
            opacity=args.opacity,
            layers=args.layers,
            tau_out_fraction=args.tau_out,
            resolution=args.resolution,
            filter_half_width=args.filter_half_width,
            iterations=args.iterations,
            ao=AOParams(n_directions=args.ao_dirs),
            show_outliers=args.outliers,
        )
        state = SceneState(dataset, basis, params)
    except ValueError as exc:
        return fail("configure", exc)
    try:
        state.build()
    except PipelineError as exc:
        return fail(exc.stage, exc.cause)
    try:
        files = export_scene(state.meshes, args.format)
    except ValueError as exc:
        return fail("export", exc)

    out: Path = args.out
    out.parent.mkdir(parents=True, exist_ok=True)
    stem = out.stem
    for name, blob in files.items():
        suffix = Path(name).suffix
        target = out if suffix == out.suffix else out.with_suffix(suffix)
        target.write_bytes(blob)
        print(f"wrote {target}")
    report = write_report(state, out.parent, stem)
    print(f"wrote {report}")
    return 0


def run_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "build":
        return run_build(args)
    return run_serve(args)


if __name__ == "__main__":
    sys.exit(main())
