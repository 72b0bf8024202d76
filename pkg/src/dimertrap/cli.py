"""Command-line front door: config parsing, subcommand dispatch, CSV output.

Config is plain ``key=value`` text (one pair per line, ``#`` comments).
Exit codes: 0 success, 1 config error, 2 numerical error, 3 sign collapse.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import classical as cls
from . import matching
from .errors import ConfigError, DimerTrapError, SignCollapseError
from .lindblad import IntegratorConfig, propagate_lvne, survival_approx
from .model import BathParams, DimerParams, eigensystem, survival_closed_form
from .pimc import MAX_ENUM_SLICES, McConfig, default_slices, exact_path_sum, run_pimc
from .series import TimeSeries, read_csv

_FMT = "{:.11e}"

_DEFAULTS = {
    "E": 1.0,
    "V": 1.0,
    "Gamma": 0.1,
    "alpha": 0.0,
    "omega_c": 5.0,
    "T": 1.0,
    "t_max": 10.0,
    "n_points": 21,
    "dt": 1e-3,
    "sweeps": 100_000,
    "burn_in": 1_000,
    "chains": 4,
    "seed": 12345,
    "out": "out",
}

_INT_KEYS = {"n_points", "sweeps", "burn_in", "chains", "seed"}

SUBCOMMANDS = ("spectrum", "lvne", "approx", "pimc", "exact-sum", "classical",
               "fit-rates", "match")


@dataclass(frozen=True)
class RunConfig:
    params: DimerParams
    bath: BathParams
    t_max: float
    n_points: int
    dt: float
    sweeps: int
    burn_in: int
    chains: int
    seed: int
    out: str

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_points)

    def mc(self) -> McConfig:
        return McConfig.from_seed(self.seed, chains=self.chains,
                                  sweeps=self.sweeps, burn_in=self.burn_in)


def _check(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def parse_config(text: str) -> RunConfig:
    """Parse key=value configuration text into a validated RunConfig."""
    values = dict(_DEFAULTS)
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value (line {ln})")
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in values:
            raise ConfigError(f"unknown key '{key}' (line {ln})")
        if key == "out":
            _check(bool(val), f"out must be non-empty (line {ln})")
            values[key] = val
            continue
        try:
            values[key] = int(val) if key in _INT_KEYS else float(val)
        except ValueError:
            raise ConfigError(f"unparsable value for '{key}' (line {ln})") from None
        _validate_key(key, values[key], ln)
    return _build_config(values)


def _validate_key(key: str, v, ln: int):
    rules = {
        "E": (math.isfinite(v), "E must be finite"),
        "V": (v > 0, "V must be > 0"),
        "Gamma": (v >= 0, "Gamma must be >= 0"),
        "alpha": (v >= 0, "alpha must be >= 0"),
        "omega_c": (v > 0, "omega_c must be > 0"),
        "T": (v > 0, "T must be > 0"),
        "t_max": (v > 0, "t_max must be > 0"),
        "n_points": (v >= 2, "n_points must be >= 2"),
        "dt": (v > 0, "dt must be > 0"),
        "sweeps": (v > 0, "sweeps must be > 0"),
        "burn_in": (v >= 0, "burn_in must be >= 0"),
        "chains": (v >= 1, "chains must be >= 1"),
        "seed": (v >= 0, "seed must be >= 0"),
    }
    ok, msg = rules[key]
    _check(ok, f"{msg} (line {ln})")


def _build_config(values: dict) -> RunConfig:
    _check(values["sweeps"] > values["burn_in"], "sweeps must exceed burn_in")
    try:
        params = DimerParams(E=values["E"], V=values["V"], Gamma=values["Gamma"])
        bath = BathParams(alpha=values["alpha"], omega_c=values["omega_c"], T=values["T"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        params=params, bath=bath,
        t_max=values["t_max"], n_points=values["n_points"], dt=values["dt"],
        sweeps=values["sweeps"], burn_in=values["burn_in"],
        chains=values["chains"], seed=values["seed"], out=values["out"],
    )


def render(config: RunConfig) -> str:
    """Inverse of parse_config for valid configs."""
    pairs = [
        ("E", config.params.E), ("V", config.params.V), ("Gamma", config.params.Gamma),
        ("alpha", config.bath.alpha), ("omega_c", config.bath.omega_c), ("T", config.bath.T),
        ("t_max", config.t_max), ("n_points", config.n_points), ("dt", config.dt),
        ("sweeps", config.sweeps), ("burn_in", config.burn_in),
        ("chains", config.chains), ("seed", config.seed), ("out", config.out),
    ]
    return "\n".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in pairs) + "\n"


def _write_spectrum(config: RunConfig, quiet: bool):
    spec = eigensystem(config.params)
    path = f"{config.out}_spectrum.csv"
    labels = ["eigenvalue_plus", "eigenvalue_minus"]
    rows = [spec.eigenvalues[0], spec.eigenvalues[1]]
    for a, tag in enumerate(("plus", "minus")):
        for i in (0, 1):
            labels.append(f"right_{tag}_{i + 1}")
            rows.append(spec.right[i, a])
    for a, tag in enumerate(("plus", "minus")):
        for i in (0, 1):
            labels.append(f"left_{tag}_{i + 1}")
            rows.append(spec.left[i, a])
    with open(path, "w") as fh:
        fh.write("quantity,re,im\n")
        for label, z in zip(labels, rows):
            fh.write(f"{label},{_FMT.format(z.real)},{_FMT.format(z.imag)}\n")
    if not quiet:
        print(f"wrote {path}")


def _lam(config: RunConfig) -> float:
    return config.bath.lambda_rate()


def _integrator(config: RunConfig) -> IntegratorConfig:
    dt = min(config.dt, 0.01 / max(config.params.V, config.params.Gamma, _lam(config), 1.0))
    return IntegratorConfig(dt=dt, t_max=config.t_max)


def dispatch(subcommand: str, config: RunConfig, quiet: bool = False,
             in_path: str | None = None, pimc_path: str | None = None,
             p_slices: int | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        grid = config.grid()
        if subcommand == "spectrum":
            _write_spectrum(config, quiet)
        elif subcommand == "lvne":
            rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
            series = propagate_lvne(rho0, config.params, _lam(config), grid, _integrator(config))
            series.write_csv(f"{config.out}_lvne.csv")
            _note(quiet, f"{config.out}_lvne.csv")
        elif subcommand == "approx":
            vals = [survival_approx(config.params, _lam(config), t) for t in grid]
            TimeSeries(grid, vals).write_csv(f"{config.out}_approx.csv")
            _note(quiet, f"{config.out}_approx.csv")
        elif subcommand == "pimc":
            p_of_t = (lambda t: p_slices) if p_slices else None
            result = run_pimc(config.params, config.bath, grid, config.mc(), P_of_t=p_of_t)
            result.pi11.write_csv(f"{config.out}_pimc.csv")
            _note(quiet, f"{config.out}_pimc.csv")
        elif subcommand == "exact-sum":
            vals = []
            for t in grid:
                if t == 0.0:
                    vals.append(1.0)
                    continue
                p = p_slices or min(default_slices(t, config.params.V), MAX_ENUM_SLICES)
                vals.append(exact_path_sum(config.params, config.bath, t, p)[0])
            TimeSeries(grid, vals).write_csv(f"{config.out}_exact.csv")
            _note(quiet, f"{config.out}_exact.csv")
        elif subcommand == "classical":
            rates = cls.ClassicalRates(Et=config.params.V, Vt=config.params.V,
                                       Gt=2.0 * config.params.Gamma)
            vals = [cls.classical_survival(rates, t) for t in grid]
            TimeSeries(grid, vals).write_csv(f"{config.out}_classical.csv")
            _note(quiet, f"{config.out}_classical.csv")
        elif subcommand == "fit-rates":
            if not in_path:
                raise ConfigError("fit-rates requires --in CSV")
            rates, resid = cls.fit_classical_rates(read_csv(in_path))
            path = f"{config.out}_rates.csv"
            with open(path, "w") as fh:
                fh.write("rate,value\n")
                for name, val in (("Et", rates.Et), ("Vt", rates.Vt),
                                  ("Gt", rates.Gt), ("residual", resid)):
                    fh.write(f"{name},{_FMT.format(val)}\n")
            _note(quiet, path)
        elif subcommand == "match":
            if not pimc_path:
                raise ConfigError("match requires --pimc CSV")
            pimc_series = read_csv(pimc_path)
            result = matching.match_and_stitch(
                pimc_series, config.params, config.bath.T,
                t_max=max(config.t_max, float(pimc_series.times[-1])),
                alpha_max=max(2.0 * config.bath.alpha, 0.5),
            )
            result.stitched.write_csv(f"{config.out}_stitched.csv")
            report = f"{config.out}_match_report.txt"
            with open(report, "w") as fh:
                fh.write(f"fitted_alpha={result.alpha:.6g}\n")
                fh.write(f"window=[{result.window[0]:.6g},{result.window[1]:.6g}]\n")
                fh.write(f"goodness={result.goodness:.6g}\n")
                fh.write(f"t_cross={result.t_cross:.6g}\n")
                fh.write(f"rescale_factor={result.factor:.9g}\n")
            _note(quiet, f"{config.out}_stitched.csv and {report}")
        else:
            raise ConfigError(f"unknown subcommand '{subcommand}'")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SignCollapseError as exc:
        print(f"sign collapse: {exc}", file=sys.stderr)
        return 3
    except (DimerTrapError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


def _note(quiet: bool, what: str):
    if not quiet:
        print(f"wrote {what}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dimertrap",
        description="Excitation trapping in a dissipative dimer. Config keys "
                    "(key=value file): E=1, V=1, Gamma=0.1, alpha=0, omega_c=5, "
                    "T=1, t_max=10, n_points=21, dt=1e-3, sweeps=100000, "
                    "burn_in=1000, chains=4, seed=12345, out=out.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="path to key=value config file")
    parser.add_argument("--out", help="output path prefix (overrides config)")
    parser.add_argument("--seed", type=int, help="MC seed (overrides config)")
    parser.add_argument("--chains", type=int, help="MC chains (overrides config)")
    parser.add_argument("--t-max", type=float, dest="t_max", help="grid end (overrides config)")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--in", dest="in_path", help="input CSV for fit-rates")
    parser.add_argument("--pimc", dest="pimc_path", help="PIMC CSV for match")
    parser.add_argument("--p", dest="p_slices", type=int,
                        help="fixed slice count for pimc/exact-sum")
    args = parser.parse_args(argv)

    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        config = parse_config(text)
        if args.out:
            config = replace(config, out=args.out)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.chains is not None:
            config = replace(config, chains=args.chains)
        if args.t_max is not None:
            if args.t_max <= 0:
                raise ConfigError("t_max must be > 0")
            config = replace(config, t_max=args.t_max)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    return dispatch(args.subcommand, config, quiet=args.quiet,
                    in_path=args.in_path, pimc_path=args.pimc_path,
                    p_slices=args.p_slices)


if __name__ == "__main__":
    sys.exit(main())
