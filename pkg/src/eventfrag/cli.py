"""Batch augmentation, inspection, simulation, and benchmarking front-end.

Commands:
  augment   apply a transform to each input file, emitting one output file per
            input plus a JSON-lines manifest
  stats     print summary statistics of one recording
  simulate  run the pixel-level sensor model over a scene file
  bench     measure transform throughput (IO excluded)

Reproducibility: each file is processed with seed XOR fnv1a64(relative path),
so traversal order and worker count never change outputs. Exit codes: 0 ok,
1 a file failed (remaining files are still processed), 2 bad configuration.
"""

from __future__ import annotations

import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import click
import numpy as np

from . import io_formats, representation, simulate, transforms
from .core import Domain, EventStream, draw_fragment
from .io_formats import FormatTag
from .transforms import EstfConfig

DEFAULT_SEED = 0

_DOMAINS = {"x": Domain.X, "y": Domain.Y, "t": Domain.TIME, "p": Domain.POLARITY}


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a of the UTF-8 bytes; the fixed per-file seed hash."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def derive_seed(seed: int, relpath: str) -> int:
    """Per-file seed: global seed XOR hash of the forward-slash relative path."""
    return (seed ^ fnv1a64(relpath.replace("\\", "/"))) & 0xFFFFFFFFFFFFFFFF


def _resolve_format(flag: Optional[str], path: Path) -> FormatTag:
    if flag:
        return FormatTag(flag)
    try:
        return io_formats.infer_format(path)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


_EXT_FOR = {FormatTag.CSV: ".csv", FormatTag.EVT1: ".evt1", FormatTag.ATIS_BIN: ".bin"}


def _collect_inputs(inputs: Tuple[str, ...]) -> List[Tuple[Path, str]]:
    """Expand files/directories into (path, relative-path-for-seed) pairs."""
    out: List[Tuple[Path, str]] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files = sorted(p for p in path.rglob("*") if p.is_file())
            out.extend((p, p.relative_to(path).as_posix()) for p in files)
        elif path.is_file():
            out.append((path, path.name))
        else:
            raise click.UsageError(f"input not found: {item}")
    if not out:
        raise click.UsageError("no input files")
    return out


def _build_op(
    op: str,
    *,
    c_istp: float,
    c_dst: float,
    d_istp: Domain,
    d_dst: Domain,
    r: float,
    drop_fraction: float,
    dx: int,
    dy: int,
) -> Callable[[EventStream, int], Tuple[EventStream, Dict]]:
    """Return fn(stream, seed) -> (stream, drawn-values dict) for the op."""

    def run_estf(stream: EventStream, seed: int):
        cfg = EstfConfig(c_istp, c_dst, d_istp, d_dst, r, seed)
        return transforms.estf_with_trace(stream, cfg)

    def run_istp(stream: EventStream, seed: int):
        rng = np.random.default_rng(seed)
        frag = draw_fragment(stream, c_istp, rng)
        return transforms.istp(stream, frag, d_istp), {"frag": [frag.start, frag.end]}

    def run_dst(stream: EventStream, seed: int):
        rng = np.random.default_rng(seed)
        frag = draw_fragment(stream, c_dst, rng)
        drift = transforms.draw_drift(stream.geometry, d_dst, r, rng)
        return transforms.dst(stream, frag, drift), {
            "frag": [frag.start, frag.end],
            "drift": drift.drawn_distance,
        }

    def run_drop(stream: EventStream, seed: int):
        rng = np.random.default_rng(seed)
        out = transforms.event_drop(stream, "random", fraction=drop_fraction, rng=rng)
        return out, {"fraction": drop_fraction}

    ops = {
        "estf": run_estf,
        "istp": run_istp,
        "dst": run_dst,
        "drop": run_drop,
        "flip": lambda s, _seed: (transforms.flip_horizontal(s), {}),
        "translate": lambda s, _seed: (transforms.translate(s, dx, dy), {"dx": dx, "dy": dy}),
        "none": lambda s, _seed: (s, {}),
    }
    return ops[op]


@click.group()
def main() -> None:
    """Event-stream augmentation toolkit."""


@main.command("augment")
@click.argument("inputs", nargs=-1, required=True)
@click.option("-o", "--output-dir", required=True, type=click.Path(file_okay=False))
@click.option("--op", default="estf", show_default=True,
              type=click.Choice(["estf", "istp", "dst", "drop", "flip", "translate", "none"]))
@click.option("--in-format", type=click.Choice([t.value for t in FormatTag]), default=None,
              help="Input format (default: infer from extension).")
@click.option("--out-format", type=click.Choice([t.value for t in FormatTag]), default=None,
              help="Output format (default: same as input).")
@click.option("--c-istp", default=0.25, show_default=True, help="Inversion fragment ratio.")
@click.option("--c-dst", default=0.25, show_default=True, help="Drift fragment ratio.")
@click.option("--d-istp", default="p", show_default=True, type=click.Choice(["x", "y", "t", "p"]),
              help="Inversion domain.")
@click.option("--d-dst", default="t", show_default=True, type=click.Choice(["x", "y", "t"]),
              help="Drift domain.")
@click.option("--r", "drift_ratio", default=0.1, show_default=True, help="Drift ratio.")
@click.option("--drop-fraction", default=0.25, show_default=True)
@click.option("--dx", default=0, show_default=True)
@click.option("--dy", default=0, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--swap-xy", is_flag=True, help="Swap x/y fields when reading/writing ATIS_BIN.")
def cmd_augment(inputs, output_dir, op, in_format, out_format, c_istp, c_dst, d_istp, d_dst,
                drift_ratio, drop_fraction, dx, dy, seed, workers, swap_xy) -> None:
    """Augment each input file into OUTPUT_DIR and write a manifest."""
    try:
        pairs = _collect_inputs(inputs)
        run = _build_op(
            op, c_istp=c_istp, c_dst=c_dst, d_istp=_DOMAINS[d_istp], d_dst=_DOMAINS[d_dst],
            r=drift_ratio, drop_fraction=drop_fraction, dx=dx, dy=dy,
        )
    except (ValueError, click.UsageError) as exc:
        raise click.UsageError(str(exc)) from exc

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {
        "estf": {"c_istp": c_istp, "c_dst": c_dst, "d_istp": d_istp, "d_dst": d_dst, "r": drift_ratio},
        "istp": {"c_istp": c_istp, "d_istp": d_istp},
        "dst": {"c_dst": c_dst, "d_dst": d_dst, "r": drift_ratio},
        "drop": {"fraction": drop_fraction},
        "translate": {"dx": dx, "dy": dy},
        "flip": {},
        "none": {},
    }[op]

    def process(pair: Tuple[Path, str]) -> Tuple[str, Optional[Dict], Optional[str]]:
        path, rel = pair
        try:
            tag_in = _resolve_format(in_format, path)
            tag_out = FormatTag(out_format) if out_format else tag_in
            stream = io_formats.read(path, tag_in, swap_xy=swap_xy)
            result, draws = run(stream, derive_seed(seed, rel))
            out_path = out_dir / Path(rel).with_suffix(_EXT_FOR[tag_out]).name
            io_formats.write(result, out_path, tag_out, swap_xy=swap_xy)
            entry = {
                "input": str(path),
                "output": str(out_path),
                "op": op,
                "params": dict(params, seed=seed, file_seed=derive_seed(seed, rel)),
                "draws": draws,
                "n_in": len(stream),
                "n_out": len(result),
            }
            return rel, entry, None
        except (OSError, ValueError) as exc:
            return rel, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, pairs))
    else:
        results = [process(pair) for pair in pairs]

    failed = False
    entries = []
    for rel, entry, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            click.echo(f"error: {rel}: {error}", err=True)
            failed = True
        else:
            entries.append(entry)
    manifest = out_dir / "manifest.jsonl"
    manifest.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in entries))
    if failed:
        sys.exit(1)


@main.command("stats")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format_flag", type=click.Choice([t.value for t in FormatTag]), default=None)
@click.option("--swap-xy", is_flag=True)
def cmd_stats(path, format_flag, swap_xy) -> None:
    """Print count, duration, polarity split, bounding box, and parse speed."""
    tag = _resolve_format(format_flag, Path(path))
    started = time.perf_counter()
    try:
        stream = io_formats.read(path, tag, swap_xy=swap_xy)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    elapsed = time.perf_counter() - started
    n = len(stream)
    click.echo(f"file: {path}")
    click.echo(f"format: {tag.value}")
    click.echo(f"count: {n}")
    duration = int(stream.t[-1] - stream.t[0]) if n else 0
    click.echo(f"duration_us: {duration}")
    on = int((stream.p == 1).sum())
    click.echo(f"polarity_on: {on}")
    click.echo(f"polarity_off: {n - on}")
    if n:
        click.echo(
            "bbox: x=[{},{}] y=[{},{}]".format(
                int(stream.x.min()), int(stream.x.max()), int(stream.y.min()), int(stream.y.max())
            )
        )
    else:
        click.echo("bbox: empty")
    click.echo(f"parse_events_per_s: {n / elapsed:.0f}" if elapsed > 0 else "parse_events_per_s: inf")


def _parse_perturb(spec_text: str) -> simulate.Perturbation:
    """Parse `kind:start-end[:delay]`, e.g. `delayed:2000-4000:500`."""
    parts = spec_text.split(":")
    if len(parts) not in (2, 3):
        raise click.UsageError(f"bad --perturb value {spec_text!r}, expected kind:start-end[:delay]")
    kinds = {k.value: k for k in simulate.PerturbationKind}
    if parts[0] not in kinds:
        raise click.UsageError(f"unknown perturbation kind {parts[0]!r} (choose from {sorted(kinds)})")
    try:
        start, end = (int(v) for v in parts[1].split("-"))
        delay = int(parts[2]) if len(parts) == 3 else 0
    except ValueError as exc:
        raise click.UsageError(f"bad --perturb value {spec_text!r}: {exc}") from exc
    return simulate.Perturbation(kinds[parts[0]], (start, end), delay)


@main.command("simulate")
@click.argument("scene", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--threshold", default=0.3, show_default=True, help="Contrast threshold C.")
@click.option("--refractory", default=0, show_default=True, help="Refractory period in µs.")
@click.option("--perturb", default=None, help="kind:start-end[:delay] applied to every pixel.")
@click.option("--format", "format_flag", type=click.Choice([t.value for t in FormatTag]), default=None)
def cmd_simulate(scene, output, threshold, refractory, perturb, format_flag) -> None:
    """Generate events from a brightness scene file."""
    pert = _parse_perturb(perturb) if perturb else None
    try:
        geometry, signals = simulate.read_scene(scene)
        if pert is not None:
            signals = [simulate.apply_perturbation(sig, pert) for sig in signals]
        stream = simulate.simulate_scene(geometry, signals, threshold, refractory)
    except simulate.SceneError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    tag = _resolve_format(format_flag, Path(output))
    io_formats.write(stream, output, tag)
    click.echo(f"wrote {len(stream)} events to {output}")


@main.command("bench")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--op", default="estf", show_default=True)
@click.option("--repetitions", default=5, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--format", "format_flag", type=click.Choice([t.value for t in FormatTag]), default=None)
def cmd_bench(path, op, repetitions, seed, format_flag) -> None:
    """Report median and p95 transform throughput over N repetitions."""
    try:
        run = _build_op(
            op, c_istp=0.25, c_dst=0.25, d_istp=Domain.POLARITY, d_dst=Domain.TIME,
            r=0.1, drop_fraction=0.25, dx=1, dy=1,
        )
    except KeyError:
        click.echo(f"error: unknown op {op!r}", err=True)
        sys.exit(2)
    tag = _resolve_format(format_flag, Path(path))
    stream = io_formats.read(path, tag)

    def copy_and_sort(s: EventStream, _seed: int):
        order = np.argsort(s.t, kind="stable")
        return EventStream(s.geometry, s.x[order], s.y[order], s.t[order], s.p[order]), {}

    if op == "none":
        run = copy_and_sort  # baseline: the cheapest full pass over the stream
    rates = []
    for i in range(repetitions):
        started = time.perf_counter()
        run(stream, seed + i)
        elapsed = time.perf_counter() - started
        rates.append(len(stream) / elapsed if elapsed > 0 else float("inf"))
    click.echo(f"op: {op}")
    click.echo(f"events: {len(stream)}")
    click.echo(f"repetitions: {repetitions}")
    click.echo(f"median_events_per_s: {statistics.median(rates):.0f}")
    click.echo(f"p95_events_per_s: {float(np.percentile(rates, 95)):.0f}")


if __name__ == "__main__":
    main()
