"""Command-line front end: identify, select, alerts, monitor, synth.

Each report command writes delimited outputs (CSV/JSON) plus rendered PNG
figures into the output directory; ``--no-figures`` skips the figures. Exit
codes: 0 success, 2 input error, 3 numerical error, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alerts import duration_curve, stream_monitor
from .errors import (
    ConfigError,
    InputError,
    ModalertError,
    NumericalError,
)
from .model import ModalModel, Mode
from .oracle import Excitation, exact_modes, integrate_response, shear_building
from .pipeline import PipelineConfig, identify, run_sweep, threshold_grid
from .signals import TimeSeriesSet, load_timeseries

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4


# --- serialization helpers ---------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def write_timeseries_csv(ts: TimeSeriesSet, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(ts.labels) + "\n")
        times = ts.times()
        for k in range(ts.n_samples):
            row = ",".join(_fmt(v) for v in ts.data[k])
            fh.write(f"{_fmt(times[k])},{row}\n")


def write_singular_spectrum_csv(spectrum, path: Path) -> None:
    n_sv = spectrum.singular_values.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq_hz," + ",".join(f"sv{j + 1}" for j in range(n_sv)) + "\n")
        for i, f in enumerate(spectrum.frequencies_hz):
            row = ",".join(_fmt(v) for v in spectrum.singular_values[i])
            fh.write(f"{_fmt(f)},{row}\n")


def write_profile_csv(profile, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("threshold," + ",".join(profile.channel_labels) + ",count\n")
        for i, thr in enumerate(profile.thresholds):
            durs = ",".join(_fmt(v) for v in profile.duration_s[i])
            fh.write(f"{_fmt(thr)},{durs},{int(profile.triggered_count[i])}\n")


def model_to_dict(m: ModalModel) -> dict:
    return {
        "n_channels": m.n_channels,
        "damping_scale": m.damping_scale,
        "global_gain": m.global_gain,
        "modes": [
            {
                "frequency_hz": mode.frequency_hz,
                "damping_ratio": mode.damping_ratio,
                "modal_amplitude": mode.modal_amplitude,
                "shape_re": [float(v) for v in np.real(mode.shape)],
                "shape_im": [float(v) for v in np.imag(mode.shape)],
            }
            for mode in m.modes
        ],
    }


def model_from_dict(raw: dict) -> ModalModel:
    try:
        modes = tuple(
            Mode(
                frequency_hz=float(entry["frequency_hz"]),
                damping_ratio=float(entry["damping_ratio"]),
                shape=np.array(entry["shape_re"], dtype=float)
                + 1j * np.array(entry["shape_im"], dtype=float),
                modal_amplitude=float(entry["modal_amplitude"]),
            )
            for entry in raw["modes"]
        )
        return ModalModel(
            modes=modes,
            n_channels=int(raw["n_channels"]),
            damping_scale=float(raw.get("damping_scale", 1.0)),
            global_gain=float(raw.get("global_gain", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model JSON: {exc}") from None


def load_model(path: Path) -> ModalModel:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read model: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(raw)


def _load_record(path: str) -> TimeSeriesSet:
    try:
        return load_timeseries(path)
    except OSError as exc:
        raise InputError(f"cannot read input: {exc}") from None


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_json(path)


def _outdir(arg: str) -> Path:
    out = Path(arg)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ---------------------------------------------------------------

def cmd_identify(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    data = _load_record(args.input)
    result = identify(data, cfg)
    out = _outdir(args.output_dir)

    write_json(model_to_dict(result.model), out / "model.json")
    write_singular_spectrum_csv(result.spectrum, out / "sv_spectrum.csv")
    if not args.no_figures:
        from . import plotting

        plotting.save_singular_spectrum(
            result.spectrum, out / "fig_singular_spectrum.png", result.peak_bins
        )
    print(f"identified {len(result.model.modes)} modes -> {out / 'model.json'}")
    return EXIT_OK


def cmd_select(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    data = _load_record(args.input)
    base = load_model(Path(args.model))
    if base.n_channels != data.n_channels:
        raise InputError(
            f"model has {base.n_channels} channels, record has {data.n_channels}"
        )
    sweep = run_sweep(base, data, cfg)
    out = _outdir(args.output_dir)

    report = {
        "candidates": [
            {
                "scale_factor": c.scale_factor,
                "kl_divergence": c.kl_divergence,
                "residual_energy": c.residual_energy,
                "residual_std": c.residual_std,
                "renyi_entropy": c.renyi_entropy,
                "jensen_shannon": c.jensen_shannon,
            }
            for c in sweep.candidates
        ],
        "selected_index": sweep.selected_index,
        "prior_cov_scale": sweep.prior_cov_scale,
    }
    write_json(report, out / "sweep_report.json")
    for candidate, response in zip(sweep.candidates, sweep.responses):
        write_timeseries_csv(response, out / f"candidate_{candidate.scale_factor:g}.csv")
    if not args.no_figures:
        from . import plotting

        plotting.save_divergence_sweep(
            sweep.candidates, sweep.selected_index, out / "fig_divergence_sweep.png"
        )
        plotting.save_response_overlay(
            data, sweep.responses[sweep.selected_index], out / "fig_response_overlay.png"
        )
    chosen = sweep.candidates[sweep.selected_index].scale_factor
    print(f"selected damping scale {chosen:g} -> {out / 'sweep_report.json'}")
    return EXIT_OK


def cmd_alerts(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    measured = _load_record(args.input)
    response = _load_record(args.model)
    grid = threshold_grid(measured, cfg)
    measured_profile = duration_curve(measured, grid)
    model_profile = duration_curve(response, grid)
    from .alerts import duration_discrepancy

    discrepancy = duration_discrepancy(model_profile, measured_profile)
    out = _outdir(args.output_dir)

    write_profile_csv(measured_profile, out / "measured_profile.csv")
    write_profile_csv(model_profile, out / "model_profile.csv")
    write_json({"duration_discrepancy": discrepancy}, out / "discrepancy.json")
    if not args.no_figures:
        from . import plotting

        plotting.save_duration_curves(
            measured_profile, model_profile, out / "fig_duration_curves.png"
        )
    print(f"duration discrepancy {discrepancy:.6g} -> {out / 'discrepancy.json'}")
    return EXIT_OK


def _stream_rows(path: str):
    """Yield per-sample channel vectors from a CSV stream, incrementally."""
    stream = sys.stdin if path == "-" else open(path, "r", encoding="utf-8")
    try:
        header = stream.readline()
        if not header.strip():
            return
        n_cols = len(header.rstrip("\r\n").split(","))
        first_dt: float | None = None
        prev_t: float | None = None
        for line in stream:
            if not line.strip():
                continue
            cells = line.rstrip("\r\n").split(",")
            if len(cells) != n_cols:
                raise InputError("stream row width does not match the header")
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise InputError(f"unparseable stream row: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise InputError("non-finite value in stream")
            t = values[0]
            if prev_t is not None:
                dt = t - prev_t
                if first_dt is None:
                    if dt <= 0:
                        raise InputError("stream time column is not increasing")
                    first_dt = dt
                elif abs(dt - first_dt) > 1e-3 * first_dt:
                    raise InputError("stream sampling is irregular")
            prev_t = t
            yield values[1:]
    finally:
        if stream is not sys.stdin:
            stream.close()


def _stream_rate(path: str) -> float:
    """Sample rate from the first two rows of a stream file (not stdin)."""
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        rows = []
        for line in fh:
            if line.strip():
                rows.append(float(line.split(",")[0]))
            if len(rows) == 2:
                break
    if len(rows) < 2:
        raise InputError("stream has fewer than two samples")
    dt = rows[1] - rows[0]
    if dt <= 0:
        raise InputError("stream time column is not increasing")
    return 1.0 / dt


def cmd_monitor(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    model = load_model(Path(args.model))
    if args.input == "-":
        if args.sample_rate is None:
            raise ConfigError("--sample-rate is required when streaming from stdin")
        rate = args.sample_rate
    else:
        rate = args.sample_rate or _stream_rate(args.input)

    events = stream_monitor(
        model,
        _stream_rows(args.input),
        threshold=args.threshold,
        window_samples=args.window,
        sample_rate_hz=rate,
        divergence_bound=args.divergence_bound,
        prior_cov_scale=cfg.prior_cov_scale,
    )
    for event in events:
        line = json.dumps(
            {
                "window_start": event.window_start,
                "channels": list(event.channels),
                "kl": event.kl,
                "cause": event.cause,
            }
        )
        print(line, flush=True)
    return EXIT_OK


def _scenario_from_json(path: str, seed_override: int | None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scenario: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"scenario is not valid JSON: {exc}") from None
    try:
        system = shear_building(
            n_stories=int(raw["n_stories"]),
            story_mass=float(raw["story_mass_kg"]),
            story_stiffness=float(raw["story_stiffness_n_per_m"]),
            rayleigh_a0=float(raw.get("rayleigh_a0", 0.0)),
            rayleigh_a1=float(raw.get("rayleigh_a1", 0.0)),
        )
        exc_raw = raw["excitation"]
        excitation = Excitation(
            kind=str(exc_raw["type"]),
            dof=int(exc_raw.get("dof", 0)),
            amplitude=float(exc_raw.get("amplitude", 1.0)),
            at_sample=int(exc_raw.get("at_sample", 0)),
            duration_samples=int(exc_raw.get("duration_samples", 1)),
        )
        dt = float(raw["dt_s"])
        n_samples = int(raw["n_samples"])
        noise_std = float(raw.get("noise_std", 0.0))
        seed = int(raw.get("seed", 0)) if seed_override is None else seed_override
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed scenario: {exc}") from None
    return system, excitation, dt, n_samples, noise_std, seed


def cmd_synth(args: argparse.Namespace) -> int:
    system, excitation, dt, n_samples, noise_std, seed = _scenario_from_json(
        args.input, args.seed
    )
    record = integrate_response(system, excitation, dt, n_samples, noise_std, seed)
    truth = exact_modes(system)
    out = _outdir(args.output_dir)

    write_timeseries_csv(record, out / "record.csv")
    write_json(
        {
            "modes": [
                {
                    "frequency_hz": mode.frequency_hz,
                    "damping_ratio": mode.damping_ratio,
                    "shape": [float(v) for v in mode.shape],
                }
                for mode in truth
            ]
        },
        out / "truth.json",
    )
    print(f"synthesized {n_samples} samples x {record.n_channels} channels -> {out / 'record.csv'}")
    return EXIT_OK


# --- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalert",
        description="Output-only modal identification, damping-model selection, "
        "and vibration alert analytics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, figures: bool = True) -> None:
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--output-dir", default=".", help="directory for outputs")
        if figures:
            p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("identify", help="modal model from a measured CSV record")
    p.add_argument("--input", required=True, help="measured CSV record")
    common(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("select", help="damping sweep and divergence-based selection")
    p.add_argument("--input", required=True, help="measured CSV record")
    p.add_argument("--model", required=True, help="modal model JSON")
    common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("alerts", help="duration curves and model-vs-measured discrepancy")
    p.add_argument("--input", required=True, help="measured CSV record")
    p.add_argument("--model", required=True, help="model response CSV record")
    common(p)
    p.set_defaults(func=cmd_alerts)

    p = sub.add_parser("monitor", help="stream windows and emit alert event lines")
    p.add_argument("--input", required=True, help="CSV stream path, or - for stdin")
    p.add_argument("--model", required=True, help="modal model JSON")
    p.add_argument("--threshold", type=float, required=True, help="alert amplitude (m/s^2)")
    p.add_argument("--window", type=int, required=True, help="window length in samples")
    p.add_argument(
        "--divergence-bound",
        type=float,
        default=math.inf,
        help="residual divergence bound for predictive alerts (default: disabled)",
    )
    p.add_argument("--sample-rate", type=float, help="stream rate in Hz (required for stdin)")
    p.add_argument("--config", help="pipeline config JSON")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("synth", help="synthesize an oracle record plus modal truth")
    p.add_argument("--input", required=True, help="scenario JSON")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--output-dir", default=".", help="directory for outputs")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ModalertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
