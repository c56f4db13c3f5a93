"""Run orchestration: config parsing, single runs, sweeps, CSV persistence.

Configs are flat `section.key = value` text ('#' starts a comment). Unset keys
take the paper-baseline defaults: x in [-20, 20], dx = 0.01, dt = 1e-4,
t_final = 200, background nonlinearity -2, soliton at x0 = 0, refresh every
tau = 2. Numbers are serialised with 17 significant digits so every CSV
round-trips double precision exactly and identical seeded runs produce
byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .diagnostics import RunSummary, record, summarize
from .disorder import PerturbationSpec, SigmaSchedule, build_schedule
from .errors import ConfigurationError, ContractViolationError, SimulationDivergedError
from .field import Grid1D, make_grid, soliton_initial
from .propagator import SolverParams, evolve

PRESETS = {
    # desk: coarse, fast single-core runs; paper: the full-scale configuration
    "desk": {"grid.dx": "0.02", "solver.dt": "0.001", "solver.t_final": "100"},
    "paper": {"grid.dx": "0.01", "solver.dt": "0.0001", "solver.t_final": "200"},
}

_KNOWN_KEYS = frozenset(
    [
        "grid.x_min",
        "grid.x_max",
        "grid.dx",
        "solver.dt",
        "solver.t_final",
        "solver.nonlinearity",
        "solver.boundary",
        "solver.splitting",
        "solver.sample_interval",
        "perturbation.kind",
        "perturbation.epsilon",
        "perturbation.tau",
        "perturbation.mu",
        "perturbation.seed",
        "perturbation.alpha",
        "initial.x0",
        "output.directory",
        "output.snapshot_times",
        "output.emit_sigma",
    ]
)

SUMMARY_COLUMNS = (
    "kind",
    "epsilon",
    "seed",
    "power_error",
    "signed_mean",
    "mean_abs",
    "rms",
    "l_inf",
    "min_peak_height",
    "final_centroid",
    "status",
)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshot_times: tuple[float, ...] | None = None  # None -> (0, t_final)
    emit_sigma: bool = False


@dataclass(frozen=True)
class RunConfig:
    grid: Grid1D
    solver: SolverParams
    perturbation: PerturbationSpec
    initial_x0: float = 0.0
    output: OutputConfig = OutputConfig()


@dataclass(frozen=True)
class SweepRow:
    kind: str
    epsilon: float
    seed: int | float
    status: str
    power_error: float
    signed_mean: float
    mean_abs: float
    rms: float
    l_inf: float
    min_peak_height: float
    final_centroid: float


@dataclass
class SweepResult:
    rows: list[SweepRow]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_seed(seed) -> str:
    return str(seed) if isinstance(seed, int) else _fmt(seed)


def _parse_lines(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in _KNOWN_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _cast_float(key: str, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {token!r}") from None


def _cast_positive(key: str, token: str) -> float:
    v = _cast_float(key, token)
    if not (math.isfinite(v) and v > 0):
        raise ConfigurationError(f"{key} must be > 0, got {token}")
    return v


def _cast_seed(key: str, token: str):
    try:
        return int(token)
    except ValueError:
        pass
    return _cast_float(key, token)


def _cast_bool(key: str, token: str) -> bool:
    low = token.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigurationError(f"{key}: expected true/false, got {token!r}")


def _cast_times(key: str, token: str) -> tuple[float, ...]:
    return tuple(_cast_float(key, tok.strip()) for tok in token.split(",") if tok.strip())


def _build_config(kv: dict[str, str]) -> RunConfig:
    def f(key, default):
        tok = kv.get(key)
        return default if tok is None else _cast_float(key, tok)

    def fpos(key, default):
        tok = kv.get(key)
        return default if tok is None else _cast_positive(key, tok)

    grid = make_grid(f("grid.x_min", -20.0), f("grid.x_max", 20.0), fpos("grid.dx", 0.01))

    si_tok = kv.get("solver.sample_interval")
    sample_interval = None if si_tok in (None, "none") else _cast_positive("solver.sample_interval", si_tok)
    solver = SolverParams(
        dt=fpos("solver.dt", 1e-4),
        t_final=fpos("solver.t_final", 200.0),
        nonlinearity=f("solver.nonlinearity", -2.0),
        boundary=kv.get("solver.boundary", "dirichlet"),
        splitting=kv.get("solver.splitting", "strang"),
        sample_interval=sample_interval,
    )

    alpha_tok = kv.get("perturbation.alpha")
    alpha = None if alpha_tok in (None, "none") else _cast_float("perturbation.alpha", alpha_tok)
    eps_tok = kv.get("perturbation.epsilon")
    epsilon = 0.1 if eps_tok is None else _cast_float("perturbation.epsilon", eps_tok)
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise ConfigurationError(f"perturbation.epsilon must be >= 0, got {eps_tok}")
    perturbation = PerturbationSpec(
        kind=kv.get("perturbation.kind", "none"),
        epsilon=epsilon,
        tau=fpos("perturbation.tau", 2.0),
        logistic_mu=f("perturbation.mu", 4.0),
        seed=_cast_seed("perturbation.seed", kv["perturbation.seed"]) if "perturbation.seed" in kv else 0,
        alpha=alpha,
    )

    snap_tok = kv.get("output.snapshot_times")
    output = OutputConfig(
        directory=kv.get("output.directory", "out"),
        snapshot_times=None if snap_tok in (None, "none") else _cast_times("output.snapshot_times", snap_tok),
        emit_sigma=_cast_bool("output.emit_sigma", kv.get("output.emit_sigma", "false")),
    )

    return RunConfig(
        grid=grid,
        solver=solver,
        perturbation=perturbation,
        initial_x0=f("initial.x0", 0.0),
        output=output,
    )


def parse_config(text: str, *, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Parse config text into a validated RunConfig.

    Precedence, lowest first: built-in defaults, preset, config text, overrides.
    """
    kv: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        kv.update(PRESETS[preset])
    kv.update(_parse_lines(text))
    if overrides:
        for key, value in overrides.items():
            if key not in _KNOWN_KEYS:
                raise ConfigurationError(f"unknown override key {key!r}")
            kv[key] = str(value)
    return _build_config(kv)


def load_config(path: str | None = None, *, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """parse_config over the contents of a file (or defaults when path is None)."""
    if path is None:
        text = ""
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    return parse_config(text, preset=preset, overrides=overrides)


def canonical_physics_items(config: RunConfig) -> list[tuple[str, str]]:
    """Physics-relevant keys in canonical serialised form (output section excluded)."""
    s = config.solver
    p = config.perturbation
    return [
        ("grid.x_min", _fmt(config.grid.x_min)),
        ("grid.x_max", _fmt(config.grid.x_max)),
        ("grid.dx", _fmt(config.grid.dx)),
        ("solver.dt", _fmt(s.dt)),
        ("solver.t_final", _fmt(s.t_final)),
        ("solver.nonlinearity", _fmt(s.nonlinearity)),
        ("solver.boundary", s.boundary),
        ("solver.splitting", s.splitting),
        ("solver.sample_interval", "none" if s.sample_interval is None else _fmt(s.sample_interval)),
        ("perturbation.kind", p.kind),
        ("perturbation.epsilon", _fmt(p.epsilon)),
        ("perturbation.tau", _fmt(p.tau)),
        ("perturbation.mu", _fmt(p.logistic_mu)),
        ("perturbation.seed", _fmt_seed(p.seed)),
        ("perturbation.alpha", "none" if p.alpha is None else _fmt(p.alpha)),
        ("initial.x0", _fmt(config.initial_x0)),
    ]


def fingerprint(config: RunConfig) -> str:
    """Stable hash of the physics configuration; guards silent default drift."""
    blob = "\n".join(f"{k} = {v}" for k, v in canonical_physics_items(config))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_timeseries(path, records) -> None:
    lines = ["t,power,height_x0,centroid,peak_pos,peak_height"]
    for r in records:
        lines.append(
            ",".join(_fmt(v) for v in (r.t, r.power, r.height_x0, r.centroid, r.peak_pos, r.peak_height))
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_snapshots(path, snapshots) -> None:
    """snapshots: iterable of (t, WaveField), rows grouped by snapshot time."""
    lines = ["t,x,re,im,density"]
    for t, fld in snapshots:
        ts = _fmt(t)
        x = fld.grid.nodes
        v = fld.values
        dens = v.real**2 + v.imag**2
        for i in range(fld.grid.n):
            lines.append(f"{ts},{_fmt(x[i])},{_fmt(v[i].real)},{_fmt(v[i].imag)},{_fmt(dens[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_sigma(path, schedule: SigmaSchedule) -> None:
    lines = ["segment,t_start,x,sigma"]
    x = schedule.grid.nodes
    for k in range(schedule.n_segments):
        t0 = _fmt(schedule.t_starts[k])
        seg = schedule.segments[k]
        for i in range(schedule.grid.n):
            lines.append(f"{k},{t0},{_fmt(x[i])},{_fmt(seg[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(path, rows) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.kind,
                    _fmt(r.epsilon),
                    _fmt_seed(r.seed),
                    _fmt(r.power_error),
                    _fmt(r.signed_mean),
                    _fmt(r.mean_abs),
                    _fmt(r.rms),
                    _fmt(r.l_inf),
                    _fmt(r.min_peak_height),
                    _fmt(r.final_centroid),
                    r.status,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _summary_row(config: RunConfig, summary: RunSummary, status: str) -> SweepRow:
    rep = summary.error_report
    return SweepRow(
        kind=config.perturbation.kind,
        epsilon=config.perturbation.epsilon,
        seed=config.perturbation.seed,
        status=status,
        power_error=summary.power_error,
        signed_mean=rep.signed_mean,
        mean_abs=rep.mean_abs,
        rms=rep.rms,
        l_inf=rep.l_inf,
        min_peak_height=summary.min_peak_height,
        final_centroid=summary.final_centroid_displacement,
    )


def run(config: RunConfig) -> RunSummary:
    """Execute one configuration and persist its outputs.

    Writes timeseries.csv, snapshots.csv, summary.csv (and sigma.csv when
    requested) into the configured directory. On divergence the partial
    outputs are still written, the summary row is flagged, and the
    SimulationDivergedError is re-raised with a .summary attached.

    Requested snapshot times are snapped to the observation grid (multiples
    of the sample interval, plus the final step).
    """
    grid = config.grid
    solver = config.solver
    initial = soliton_initial(grid, config.initial_x0)
    schedule = build_schedule(config.perturbation, grid, solver.t_final)
    outdir = Path(config.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)

    dt = solver.dt
    n_steps = round(solver.t_final / dt)
    m_sample = max(1, round(solver.effective_sample_interval() / dt))
    snap_times = config.output.snapshot_times
    if snap_times is None:
        snap_times = (0.0, solver.t_final)
    snap_steps = set()
    for ts in snap_times:
        if not 0.0 <= ts <= solver.t_final:
            raise ConfigurationError(
                f"output.snapshot_times entry {ts} outside [0, {solver.t_final}]"
            )
        k = round(round(ts / dt) / m_sample) * m_sample
        snap_steps.add(min(n_steps, k))

    snapshots = []

    def observer(t, fld):
        if round(t / dt) in snap_steps:
            snapshots.append((t, fld))
        return record(t, fld)

    status = "ok"
    failure = None
    try:
        final, records = evolve(initial, schedule, solver, observer)
    except SimulationDivergedError as e:
        final, records, status, failure = e.field, e.records, "diverged", e

    summary = summarize(initial, final, records)
    write_timeseries(outdir / "timeseries.csv", records)
    write_snapshots(outdir / "snapshots.csv", snapshots)
    if config.output.emit_sigma:
        write_sigma(outdir / "sigma.csv", schedule)
    write_summary(outdir / "summary.csv", [_summary_row(config, summary, status)])

    if failure is not None:
        failure.summary = summary
        raise failure
    return summary


def _nan_row(kind, epsilon, seed, status) -> SweepRow:
    nan = float("nan")
    return SweepRow(kind, epsilon, seed, status, nan, nan, nan, nan, nan, nan, nan)


def _run_combo(config: RunConfig, kind: str, epsilon: float, seed) -> SweepRow:
    try:
        label = f"{kind}_eps{epsilon:g}_seed{seed}"
        sub = replace(
            config,
            perturbation=replace(config.perturbation, kind=kind, epsilon=epsilon, seed=seed, alpha=None),
            output=replace(config.output, directory=str(Path(config.output.directory) / label)),
        )
        summary = run(sub)
        return _summary_row(sub, summary, "ok")
    except SimulationDivergedError as e:
        return _summary_row(sub, e.summary, "diverged")
    except (ConfigurationError, ContractViolationError) as e:
        reason = str(e).replace(",", ";").replace("\n", " ")
        return _nan_row(kind, epsilon, seed, f"error({reason})")


def sweep(config: RunConfig, kinds, epsilons, seeds, jobs: int = 1) -> SweepResult:
    """Cartesian product of runs over kind x epsilon x seed.

    Each run writes into its own subdirectory of the configured output
    directory; an aggregated summary.csv lands at the top. Failed runs are
    recorded per row with their failure reason, and the sweep continues.
    For the quasiperiodic kind the amplitude follows epsilon (alpha is reset
    to track it), so strengths stay matched across kinds.
    """
    kinds, epsilons, seeds = list(kinds), list(epsilons), list(seeds)
    if not kinds or not epsilons or not seeds:
        raise ConfigurationError("sweep needs non-empty kinds, epsilons, and seeds lists")
    combos = [(k, e, s) for k in kinds for e in epsilons for s in seeds]
    if jobs <= 1:
        rows = [_run_combo(config, *combo) for combo in combos]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_run_combo, config, *combo) for combo in combos]
            rows = [f.result() for f in futures]
    outdir = Path(config.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    write_summary(outdir / "summary.csv", rows)
    return SweepResult(rows)
