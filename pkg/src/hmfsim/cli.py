"""Command-line interface: equilibrium, simulate, analyze, theory, pipeline.

The pipeline runs equilibrium -> lattice -> perturb -> run -> analyze ->
predict -> compare from a flat INI-style config and owns all file formats.
"""

import argparse
import os
import sys
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (InvalidFitError, component, detrend_constant,
                       detrend_running, envelope, fit_power_law,
                       peak_frequency, power_spectrum)
from .dynamics import MagnetizationSeries, SimConfig, run, total_energy, total_momentum
from .ensemble import WeightedEnsemble, casimirs, init_lattice, magnetization
from .equilibrium import solve_m0
from .perturbation import KINDS, PerturbationSpec, perturbed_density
from .theory import angle_fourier, orbit_from_action, orbit_from_energy, predict_decay

ENERGY_DRIFT_LIMIT = 1e-5  # relative; a run exceeding this is flagged FAILED


class ConfigError(ValueError):
    """Config parse failure naming the offending key and line."""


@dataclass
class PipelineConfig:
    temperature: float
    nx: int
    np_rows: int
    t_end: float
    pmax: float = 3.0
    tol: float = 1e-10
    kind: str = "none"
    amplitude: float = 0.0
    dt: float = 0.1
    record_stride: int = 5
    use_symmetry: bool = False
    checkpoint_every: int = 0
    directory: str = "."
    detrend: str = ""
    detrend_halfwidth: float = 5.0
    tail_start: float = -1.0
    fit_tmin: float = -1.0
    fit_tmax: float = -1.0
    spectrum_t0: float = -1.0
    spectrum_t1: float = -1.0
    band_lo: float = 1.5
    band_hi: float = 2.5

    def __post_init__(self):
        # Resolve value-dependent defaults so a serialized config is explicit.
        if self.detrend == "":
            self.detrend = "running" if self.kind == "sine" else "constant"
        if self.tail_start < 0:
            self.tail_start = 0.5 * self.t_end
        if self.fit_tmin < 0:
            self.fit_tmin = self.t_end / 6.0
        if self.fit_tmax < 0:
            self.fit_tmax = self.t_end * 5.0 / 6.0
        if self.spectrum_t0 < 0:
            self.spectrum_t0 = self.fit_tmin
        if self.spectrum_t1 < 0:
            self.spectrum_t1 = self.t_end


_SCHEMA = {
    "equilibrium": {"temperature": float, "tol": float},
    "lattice": {"nx": int, "np": int, "pmax": float},
    "perturbation": {"kind": str, "amplitude": float},
    "integration": {"dt": float, "t_end": float, "record_stride": int,
                    "use_symmetry": bool, "checkpoint_every": int},
    "output": {"directory": str, "detrend": str, "detrend_halfwidth": float,
               "tail_start": float, "fit_tmin": float, "fit_tmax": float,
               "spectrum_t0": float, "spectrum_t1": float,
               "band_lo": float, "band_hi": float},
}
_REQUIRED = {("equilibrium", "temperature"), ("lattice", "nx"),
             ("lattice", "np"), ("integration", "t_end")}
_KEY_TO_FIELD = {("lattice", "np"): "np_rows"}


def _parse_bool(text, key, lineno):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"line {lineno}: key '{key}': expected boolean, got {text!r}")


def load_config(path) -> PipelineConfig:
    """Parse a sectioned key=value config; unknown sections or keys rejected."""
    values = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(("#", ";")):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _SCHEMA:
                    raise ConfigError(f"line {lineno}: unknown section [{section}]")
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
            if section is None:
                raise ConfigError(f"line {lineno}: key outside any section")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in _SCHEMA[section]:
                raise ConfigError(f"line {lineno}: unknown key '{key}' in [{section}]")
            typ = _SCHEMA[section][key]
            try:
                if typ is bool:
                    value = _parse_bool(text, key, lineno)
                else:
                    value = typ(text)
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(
                    f"line {lineno}: key '{key}': cannot parse {text!r} as "
                    f"{typ.__name__}") from exc
            values[(section, key)] = value

    for section, key in _REQUIRED:
        if (section, key) not in values:
            raise ConfigError(f"missing required key '{key}' in [{section}]")

    kwargs = {_KEY_TO_FIELD.get(sk, sk[1]): v for sk, v in values.items()}
    try:
        cfg = PipelineConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kind not in KINDS:
        raise ConfigError(f"key 'kind': unknown perturbation kind {cfg.kind!r}")
    return cfg


def serialize_config(cfg: PipelineConfig) -> str:
    lines = []
    field_to_key = {v: k for k, v in _KEY_TO_FIELD.items()}
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            name = _KEY_TO_FIELD.get((section, key), key)
            value = getattr(cfg, name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = f"{value:.17g}"
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def _atomic_write(path, text) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


def _build_ensemble(cfg: PipelineConfig, eq) -> WeightedEnsemble:
    spec = PerturbationSpec(kind=cfg.kind, amplitude=cfg.amplitude)
    density = perturbed_density(eq, spec)
    return init_lattice(cfg.nx, cfg.np_rows, cfg.pmax, density,
                        symmetry_reduced=cfg.use_symmetry)


def _sim_config(cfg: PipelineConfig, outdir) -> SimConfig:
    return SimConfig(dt=cfg.dt, t_end=cfg.t_end, record_stride=cfg.record_stride,
                     use_symmetry=cfg.use_symmetry,
                     checkpoint_every=cfg.checkpoint_every,
                     checkpoint_path=os.path.join(outdir, "checkpoint.bin"))


def _detrend(cfg: PipelineConfig, series, which):
    raw = component(series, which)
    if cfg.detrend == "running":
        return detrend_running(raw, cfg.detrend_halfwidth)
    return detrend_constant(raw, cfg.tail_start)


def pipeline(cfg: PipelineConfig) -> int:
    """Run all stages; returns 0 on success.  Partial outputs are retained."""
    outdir = cfg.directory
    os.makedirs(outdir, exist_ok=True)
    start = _time.time()
    start_stamp = _time.strftime("%Y-%m-%dT%H:%M:%S")

    stage = "equilibrium"
    try:
        eq = solve_m0(cfg.temperature, cfg.tol)

        stage = "lattice"
        ens = _build_ensemble(cfg, eq)
        cas_before = casimirs(ens, 4)
        e_before = total_energy(ens)
        p_before = total_momentum(ens)

        stage = "simulate"
        series = run(ens, _sim_config(cfg, outdir))
        series_path = os.path.join(outdir, "series.csv")
        series.to_csv(series_path)
        cas_after = casimirs(ens, 4)
        e_after = total_energy(ens)
        p_after = total_momentum(ens)

        stage = "analysis"
        components = ["mx", "my"] if cfg.kind == "sine" else ["mx"]
        env_rows = []
        spec_rows = []
        fit_lines = []
        for which in components:
            obs = "Mx" if which == "mx" else "My"
            pred = predict_decay(obs, eq.omega0)
            fluct = _detrend(cfg, series, which)
            tk, ak = envelope(fluct)
            env_rows += [(which, t, a) for t, a in zip(tk, ak)]
            fit_lines.append(f"component={which}")
            fit_lines.append(f"predicted_exponent={pred.exponent}")
            fit_lines.append(f"predicted_frequency={pred.frequency:.6f}")
            try:
                fit = fit_power_law(tk, ak, cfg.fit_tmin, cfg.fit_tmax)
                fit_lines.append(f"measured_exponent={fit.exponent:.6f}")
                fit_lines.append(f"fit_residual={fit.residual:.6f}")
                fit_lines.append(f"fit_points={fit.n_points}")
            except InvalidFitError as exc:
                fit_lines.append(f"measured_exponent=none ({exc})")
            fit_lines.append(f"fit_window={cfg.fit_tmin},{cfg.fit_tmax}")
            sp = power_spectrum(fluct, cfg.spectrum_t0, cfg.spectrum_t1)
            band = (cfg.band_lo, cfg.band_hi) if which == "mx" else \
                   (0.5 * cfg.band_lo, 0.5 * cfg.band_hi)
            omega_pk, _ = peak_frequency(sp, *band)
            spec_rows += [(which, o, pw) for o, pw in zip(sp.omega, sp.power)]
            fit_lines.append(f"measured_peak_omega={omega_pk:.6f}")
            fit_lines.append(f"peak_band={band[0]},{band[1]}")
            fit_lines.append("")

        env_path = os.path.join(outdir, "envelope.csv")
        with open(env_path, "w") as fh:
            fh.write("component,t,amplitude\n")
            for which, t, a in env_rows:
                fh.write(f"{which},{t:.15g},{a:.15g}\n")
        spec_path = os.path.join(outdir, "spectrum.csv")
        with open(spec_path, "w") as fh:
            fh.write("component,omega,power\n")
            for which, o, pw in spec_rows:
                fh.write(f"{which},{o:.15g},{pw:.15g}\n")
        fit_path = os.path.join(outdir, "fit.txt")
        _atomic_write(fit_path, "\n".join(fit_lines))

        stage = "manifest"
        e_scale = max(abs(e_before), 1e-300)
        energy_drift = abs(e_after - e_before) / e_scale
        momentum_drift = abs(p_after - p_before)
        casimir_ok = all(a == b for a, b in zip(cas_before, cas_after))
        status = "OK"
        if energy_drift > ENERGY_DRIFT_LIMIT or not casimir_ok:
            status = "FAILED"
        lines = [
            f"version={__version__}",
            f"start={start_stamp}",
            f"end={_time.strftime('%Y-%m-%dT%H:%M:%S')}",
            f"wall_seconds={_time.time() - start:.3f}",
            f"series={series_path}",
            f"envelope={env_path}",
            f"fit={fit_path}",
            f"spectrum={spec_path}",
            f"energy_drift_rel={energy_drift:.3e}",
            f"momentum_drift_abs={momentum_drift:.3e}",
            f"casimirs_exact={'yes' if casimir_ok else 'no'}",
            f"status={status}",
            "",
            "[config]",
        ]
        lines += ["  " + ln for ln in serialize_config(cfg).splitlines()]
        _atomic_write(os.path.join(outdir, "manifest.txt"), "\n".join(lines) + "\n")
    except Exception as exc:
        raise StageError(stage, exc) from exc

    return 0 if status == "OK" else 1


def _cmd_equilibrium(args) -> int:
    eq = solve_m0(args.temperature, args.tol)
    print(f"m0 = {eq.m0:.12g}")
    print(f"omega0 = {eq.omega0:.12g}")
    print(f"norm = {eq.norm:.12g}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    outdir = args.output or cfg.directory
    os.makedirs(outdir, exist_ok=True)
    if args.resume:
        ens = WeightedEnsemble.load(args.resume)
    else:
        eq = solve_m0(cfg.temperature, cfg.tol)
        ens = _build_ensemble(cfg, eq)
    series = run(ens, _sim_config(cfg, outdir))
    path = os.path.join(outdir, "series.csv")
    series.to_csv(path)
    print(f"wrote {path} ({len(series)} samples, t final {ens.time:g})")
    return 0


def _cmd_analyze_fit(args) -> int:
    series = MagnetizationSeries.from_csv(args.input)
    raw = component(series, args.component)
    if args.detrend == "running":
        fluct = detrend_running(raw, args.window)
    else:
        tail = args.tail_start if args.tail_start is not None else \
            0.5 * (series.t[0] + series.t[-1])
        fluct = detrend_constant(raw, tail)
    tk, ak = envelope(fluct)
    fit = fit_power_law(tk, ak, args.tmin, args.tmax)
    print(f"exponent = {fit.exponent:.6f}")
    print(f"residual = {fit.residual:.6f}")
    print(f"points = {fit.n_points}")
    return 0


def _cmd_analyze_spectrum(args) -> int:
    series = MagnetizationSeries.from_csv(args.input)
    raw = component(series, args.component)
    if args.detrend == "running":
        fluct = detrend_running(raw, args.window)
    elif args.detrend == "constant":
        fluct = detrend_constant(raw, 0.5 * (series.t[0] + series.t[-1]))
    else:
        fluct = raw
    sp = power_spectrum(fluct, args.t0, args.t1)
    lo, hi = (float(v) for v in args.band.split(","))
    omega_pk, power_pk = peak_frequency(sp, lo, hi)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("omega,power\n")
            for o, pw in zip(sp.omega, sp.power):
                fh.write(f"{o:.15g},{pw:.15g}\n")
    print(f"peak_omega = {omega_pk:.6f}")
    print(f"peak_power = {power_pk:.6g}")
    return 0


def _cmd_theory(args) -> int:
    eq = solve_m0(args.temperature)
    if args.theory_cmd == "freq":
        orbit = orbit_from_energy(args.energy, eq.m0)
        print(f"regime = {orbit.regime}")
        print(f"action = {orbit.action:.12g}")
        print(f"period = {orbit.period:.12g}")
        print(f"omega = {orbit.omega:.12g}")
    elif args.theory_cmd == "fourier":
        orbit = orbit_from_action(args.action, eq.m0)
        coeff = angle_fourier(args.m, orbit, which=args.which)
        print(f"re = {coeff.real:.12g}")
        print(f"im = {coeff.imag:.12g}")
        print(f"abs = {abs(coeff):.12g}")
    else:
        for obs in ("Mx", "My"):
            pred = predict_decay(obs, eq.omega0)
            print(f"{obs}: exponent = {pred.exponent}, "
                  f"frequency = {pred.frequency:.12g}")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.directory = args.output
    return pipeline(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmfsim")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("equilibrium", help="solve the self-consistent state")
    p.add_argument("--temperature", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("simulate", help="run the simulation from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", help="checkpoint file to resume from")
    p.add_argument("--output", help="override output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="analyze a magnetization series")
    asub = p.add_subparsers(dest="analyze_cmd", required=True)
    pf = asub.add_parser("fit")
    pf.add_argument("--input", required=True)
    pf.add_argument("--component", choices=["mx", "my"], default="mx")
    pf.add_argument("--detrend", choices=["constant", "running"], default="constant")
    pf.add_argument("--window", type=float, default=5.0,
                    help="running-average half window")
    pf.add_argument("--tail-start", type=float, default=None)
    pf.add_argument("--tmin", type=float, required=True)
    pf.add_argument("--tmax", type=float, required=True)
    pf.set_defaults(func=_cmd_analyze_fit)
    ps = asub.add_parser("spectrum")
    ps.add_argument("--input", required=True)
    ps.add_argument("--component", choices=["mx", "my"], default="mx")
    ps.add_argument("--detrend", choices=["constant", "running", "none"],
                    default="none")
    ps.add_argument("--window", type=float, default=5.0)
    ps.add_argument("--t0", type=float, required=True)
    ps.add_argument("--t1", type=float, required=True)
    ps.add_argument("--band", default="1.5,2.5", help="omega band 'lo,hi'")
    ps.add_argument("--output", help="write omega,power CSV here")
    ps.set_defaults(func=_cmd_analyze_spectrum)

    p = sub.add_parser("theory", help="pendulum action-angle quantities")
    tsub = p.add_subparsers(dest="theory_cmd", required=True)
    pt = tsub.add_parser("freq")
    pt.add_argument("--temperature", type=float, required=True)
    pt.add_argument("--energy", type=float, required=True)
    pt.set_defaults(func=_cmd_theory)
    pt = tsub.add_parser("fourier")
    pt.add_argument("--temperature", type=float, required=True)
    pt.add_argument("--action", type=float, required=True)
    pt.add_argument("--m", type=int, required=True)
    pt.add_argument("--which", choices=["cos", "sin"], default="cos")
    pt.set_defaults(func=_cmd_theory)
    pt = tsub.add_parser("predict")
    pt.add_argument("--temperature", type=float, required=True)
    pt.set_defaults(func=_cmd_theory)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override output directory")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("HMFSIM_THREADS")
    if threads:
        import numba
        numba.set_num_threads(int(threads))
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
