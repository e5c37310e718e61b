"""
Batch scenario runner.

    cavityfeedback <scenario> --config run.json [--out results.csv] [--seed N] [--threads N]

Scenarios: evolve, trajectories, qubit-fidelity, qubit-optimal, stirap, sweep.
The configuration is a JSON document; every run writes its CSV table and a
``<out>.meta.json`` sidecar holding the effective configuration (all
defaults filled in) plus scenario metadata. Exit status is 0 on success, 2
for configuration errors and 3 for numerical failures.
"""

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fock, liouville, mcwf, qubit, stirap
from .errors import ConfigError, NumericalError

SCENARIOS = ("evolve", "trajectories", "qubit-fidelity", "qubit-optimal", "stirap", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class InitialState:
    kind: str = "fock"
    n: int | None = None
    alpha: tuple | None = None
    qubit: dict | None = None


@dataclass(frozen=True)
class TrajSettings:
    n_traj: int = 1000
    master_seed: int = 0


@dataclass(frozen=True)
class StirapSettings:
    g_max: float | None = None
    omega_max: float | None = None
    centers: tuple | None = None
    width: float | None = None
    t_cross: float = 1.0
    nbar: float = 1.0
    gamma_e: float = 0.01
    dt: float | None = None


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    dim: int = 8
    gamma: float = 1.0
    eta: float | None = None
    eta_list: tuple | None = None
    t_final: float = 1.0
    dt: float | None = None
    sample_points: int = 10
    initial: InitialState = field(default_factory=InitialState)
    traj: TrajSettings = field(default_factory=TrajSettings)
    stirap: StirapSettings = field(default_factory=StirapSettings)
    grid: int = 128
    n_plus_m_max: int = 7
    out: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("eta_list",):
            if d[key] is not None:
                d[key] = list(d[key])
        if d["initial"]["alpha"] is not None:
            d["initial"]["alpha"] = list(d["initial"]["alpha"])
        if d["stirap"]["centers"] is not None:
            d["stirap"]["centers"] = list(d["stirap"]["centers"])
        return d

    @property
    def etas(self) -> list:
        return list(self.eta_list) if self.eta_list is not None else [self.eta]

    def params(self, eta: float | None = None) -> liouville.FeedbackParams:
        return liouville.FeedbackParams(self.gamma, self.eta if eta is None else eta)


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))


# ---------------------------------------------------------------- parsing


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _number(d, key, path, kind=float, default=None, required=False):
    if key not in d or d[key] is None:
        _require(not required, f"{path}{key}", "is required")
        return default
    v = d[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}{key}",
             f"expected a number, got {v!r}")
    if kind is int:
        _require(float(v).is_integer(), f"{path}{key}", f"expected an integer, got {v!r}")
        return int(v)
    _require(np.isfinite(v), f"{path}{key}", "must be finite")
    return float(v)


def _check_keys(d, allowed, path):
    _require(isinstance(d, dict), path or "config", "expected an object")
    extra = sorted(set(d) - set(allowed))
    _require(not extra, path or "config", f"unknown key(s) {extra}")


def _parse_eta(v, path):
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), path, f"expected a number, got {v!r}")
    _require(0.0 <= v <= 1.0, path, f"eta = {v} outside [0, 1]")
    return float(v)


def _parse_alpha(v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (float(v), 0.0)
    if isinstance(v, dict):
        _check_keys(v, ("re", "im"), "initial.alpha")
        return (float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    _require(isinstance(v, (list, tuple)) and len(v) == 2, "initial.alpha",
             "expected a number, [re, im] or {re, im}")
    return (float(v[0]), float(v[1]))


def _parse_initial(d, scenario):
    d = {} if d is None else d
    _check_keys(d, ("kind", "n", "alpha", "qubit"), "initial")
    default_kind = "qubit" if scenario.startswith("qubit") else "fock"
    kind = d.get("kind", default_kind)
    _require(kind in ("fock", "coherent", "qubit"), "initial.kind", f"unknown kind {kind!r}")
    if kind == "fock":
        n = _number(d, "n", "initial.", int, default=0)
        _require(n >= 0, "initial.n", "must be >= 0")
        return InitialState(kind, n=n)
    if kind == "coherent":
        _require("alpha" in d, "initial.alpha", "is required for kind 'coherent'")
        return InitialState(kind, alpha=_parse_alpha(d["alpha"]))
    q = d.get("qubit", {})
    _check_keys(q, ("n", "m", "alpha_re", "alpha_im", "beta_re", "beta_im"), "initial.qubit")
    n = _number(q, "n", "initial.qubit.", int, default=1)
    m = _number(q, "m", "initial.qubit.", int, default=0)
    amps = {k: _number(q, k, "initial.qubit.", default=dflt) for k, dflt in
            (("alpha_re", 1 / np.sqrt(2)), ("alpha_im", 0.0), ("beta_re", 1 / np.sqrt(2)), ("beta_im", 0.0))}
    _require(n != m, "initial.qubit", f"n != m required, got n = m = {n}")
    _require(n >= 0 and m >= 0, "initial.qubit", "photon numbers must be >= 0")
    norm = sum(v * v for v in amps.values())
    _require(abs(norm - 1.0) <= 1e-12, "initial.qubit", f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
    return InitialState(kind, qubit={"n": n, "m": m, **amps})


def _parse_stirap(d, cfg_dt):
    d = {} if d is None else d
    _check_keys(d, ("g_max", "omega_max", "centers", "width", "t_cross", "nbar", "gamma_e", "dt"),
                "stirap")
    t_cross = _number(d, "t_cross", "stirap.", default=1.0)
    _require(t_cross > 0, "stirap.t_cross", "must be > 0")
    base = stirap.PulseSchedule.default(t_cross)
    centers = d.get("centers")
    if centers is None:
        centers = (base.t_center_g, base.t_center_omega)
    _require(isinstance(centers, (list, tuple)) and len(centers) == 2, "stirap.centers",
             "expected [t_center_g, t_center_omega]")
    s = StirapSettings(
        g_max=_number(d, "g_max", "stirap.", default=base.g_max),
        omega_max=_number(d, "omega_max", "stirap.", default=base.omega_max),
        centers=(float(centers[0]), float(centers[1])),
        width=_number(d, "width", "stirap.", default=base.width),
        t_cross=t_cross,
        nbar=_number(d, "nbar", "stirap.", default=1.0),
        gamma_e=_number(d, "gamma_e", "stirap.", default=0.01),
        dt=_number(d, "dt", "stirap.", default=t_cross / 2e4),
    )
    _require(s.nbar > 0 and s.gamma_e > 0, "stirap", "nbar and gamma_e must be > 0")
    _require(s.dt > 0, "stirap.dt", "must be > 0")
    return s


def _schedule(s: StirapSettings) -> stirap.PulseSchedule:
    return stirap.PulseSchedule(s.g_max, s.omega_max, s.centers[0], s.centers[1], s.width, s.t_cross)


def parse_config(text: str, scenario: str | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    ``scenario`` (from the subcommand) must agree with the document's
    ``scenario`` key when both are given.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _check_keys(doc, [f.name for f in RunConfig.__dataclass_fields__.values()], "")
    sc = doc.get("scenario", scenario)
    _require(sc in SCENARIOS, "scenario", f"expected one of {SCENARIOS}, got {sc!r}")
    _require(scenario is None or sc == scenario, "scenario",
             f"config says {sc!r} but subcommand is {scenario!r}")

    dim = _number(doc, "dim", "", int, default=8)
    _require(dim >= 2, "dim", "must be >= 2")
    gamma = _number(doc, "gamma", "", default=1.0)
    _require(gamma > 0, "gamma", "must be > 0")
    eta = _parse_eta(doc["eta"], "eta") if doc.get("eta") is not None else None
    eta_list = None
    if doc.get("eta_list") is not None:
        _require(isinstance(doc["eta_list"], list) and doc["eta_list"], "eta_list",
                 "expected a non-empty list")
        eta_list = tuple(_parse_eta(v, f"eta_list[{i}]") for i, v in enumerate(doc["eta_list"]))
    if sc in ("sweep", "qubit-fidelity"):
        _require(eta is not None or eta_list is not None, "eta_list", "eta or eta_list is required")
        if eta_list is None:
            eta_list = (eta,)
    elif sc != "stirap":
        _require(eta is not None, "eta", "is required for this scenario")
        _require(eta_list is None, "eta_list", f"not used by scenario {sc!r}")

    t_final = _number(doc, "t_final", "", default=1.0)
    _require(t_final >= 0, "t_final", "must be >= 0")
    dt = _number(doc, "dt", "", default=1e-3 / gamma)
    _require(dt > 0, "dt", "must be > 0")
    _require(t_final == 0 or dt <= t_final, "dt", f"dt = {dt} exceeds t_final = {t_final}")
    sample_points = _number(doc, "sample_points", "", int, default=10)
    _require(sample_points >= 1, "sample_points", "must be >= 1")

    initial = _parse_initial(doc.get("initial"), sc)
    traj_doc = doc.get("traj") or {}
    _check_keys(traj_doc, ("n_traj", "master_seed"), "traj")
    traj = TrajSettings(n_traj=_number(traj_doc, "n_traj", "traj.", int, default=1000),
                        master_seed=_number(traj_doc, "master_seed", "traj.", int, default=0))
    _require(traj.n_traj >= 1, "traj.n_traj", "must be >= 1")
    _require(0 <= traj.master_seed < 2**64, "traj.master_seed", "must be an unsigned 64-bit integer")
    st = _parse_stirap(doc.get("stirap"), dt)
    grid = _number(doc, "grid", "", int, default=128)
    _require(grid >= 64, "grid", "must be >= 64")
    npm = _number(doc, "n_plus_m_max", "", int, default=7)
    _require(npm >= 1, "n_plus_m_max", "must be >= 1")
    out = doc.get("out")
    _require(out is None or isinstance(out, str), "out", "expected a path string")

    cfg = RunConfig(scenario=sc, dim=dim, gamma=gamma, eta=eta, eta_list=eta_list, t_final=t_final,
                    dt=dt, sample_points=sample_points, initial=initial, traj=traj, stirap=st,
                    grid=grid, n_plus_m_max=npm, out=out)
    _validate_modules(cfg)
    return cfg


def _validate_modules(cfg: RunConfig):
    """Re-check the preconditions the computational modules will impose."""
    try:
        for e in cfg.etas:
            if e is not None:
                cfg.params(e)
        if cfg.scenario in ("evolve", "sweep", "trajectories", "stirap"):
            _require(cfg.initial.kind != "qubit", "initial.kind",
                     f"scenario {cfg.scenario!r} needs a single-mode state")
            _single_mode_state(cfg)
        if cfg.scenario in ("qubit-fidelity", "qubit-optimal"):
            _require(cfg.initial.kind == "qubit" or cfg.scenario == "qubit-optimal", "initial.kind",
                     "qubit-fidelity needs a qubit initial state")
        if cfg.scenario == "qubit-fidelity":
            qubit.QubitSpec(**_qubit_spec_args(cfg.initial.qubit))
        if cfg.scenario == "stirap":
            _schedule(cfg.stirap)
            _require(fock.top_population(fock.projector(_single_mode_state(cfg))) <= fock.TRUNCATION_GUARD,
                     "initial", "top Fock level populated; raise dim for the one-photon transfer")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{cfg.scenario}: {exc}") from None


def _qubit_spec_args(q):
    return dict(n=q["n"], m=q["m"], alpha=complex(q["alpha_re"], q["alpha_im"]),
                beta=complex(q["beta_re"], q["beta_im"]))


def _single_mode_state(cfg: RunConfig) -> np.ndarray:
    init = cfg.initial
    if init.kind == "fock":
        return fock.fock_ket(init.n, cfg.dim)
    return fock.coherent_state(complex(*init.alpha), cfg.dim)


# ---------------------------------------------------------------- scenarios


def _evolve_rows(cfg: RunConfig, eta: float):
    rho0 = fock.projector(_single_mode_state(cfg))
    ic = liouville.IntegratorConfig(t_final=cfg.t_final, dt=cfg.dt, sample_points=cfg.sample_points)
    ev = liouville.integrate(rho0, cfg.params(eta), ic)
    rows = []
    for t, rho in zip(ev.times, ev.states):
        amp = liouville.mean_amplitude(rho)
        rows.append([t, np.trace(rho).real, np.real(np.sum(rho * rho.T)),
                     *np.real(np.diag(rho)), amp.real, amp.imag])
    return rows


def _evolve_columns(dim):
    return ["t", "trace", "purity", *[f"p{k}" for k in range(dim)], "re_amp", "im_amp"]


def _map_ordered(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_evolve(cfg, threads):
    return ResultTable(_evolve_columns(cfg.dim), _evolve_rows(cfg, cfg.eta))


def run_sweep(cfg, threads):
    parts = _map_ordered(lambda e: _evolve_rows(cfg, e), list(cfg.eta_list), threads)
    rows = [[e, *r] for e, part in sorted(zip(cfg.eta_list, parts), key=lambda x: x[0]) for r in part]
    return ResultTable(["eta", *_evolve_columns(cfg.dim)], rows)


def run_trajectories(cfg, threads):
    psi0 = _single_mode_state(cfg)
    times = tuple(float(t) for t in np.linspace(0.0, cfg.t_final, cfg.sample_points + 1))
    tc = mcwf.TrajectoryConfig(t_final=cfg.t_final, dt=cfg.dt, n_traj=cfg.traj.n_traj,
                               master_seed=cfg.traj.master_seed, sample_times=times)
    res = mcwf.ensemble_density(psi0, cfg.params(), tc, workers=threads)
    d = cfg.dim
    cols = ["t", "mean_n", "se_n", "re_amp", "se_re_amp", "im_amp", "se_im_amp",
            *[f"p{k}" for k in range(d)], *[f"se_p{k}" for k in range(d)], "trace"]
    rows = []
    for s, t in enumerate(res.times):
        rows.append([t, res.means["n"][s], res.stderr["n"][s],
                     res.means["re_amp"][s], res.stderr["re_amp"][s],
                     res.means["im_amp"][s], res.stderr["im_amp"][s],
                     *res.means["p"][s], *res.stderr["p"][s], np.trace(res.rho[s]).real])
    counts = np.bincount(res.jump_counts)
    meta = {"jump_count_histogram": {str(k): int(c) for k, c in enumerate(counts) if c},
            "mean_jumps": float(res.jump_counts.mean()), "max_jumps": int(res.jump_counts.max())}
    return ResultTable(cols, rows, meta)


def run_qubit_fidelity(cfg, threads):
    q = cfg.initial.qubit
    gamma_t = cfg.gamma * cfg.t_final

    def one(eta):
        ts, _, _, F = qubit.fidelity_landscape(q["n"], q["m"], cfg.params(eta), gamma_t, cfg.grid,
                                               dt=cfg.dt, sample_points=cfg.sample_points)
        return [[gt, eta, qubit.min_fidelity_closed(q["n"], q["m"], eta, gt), F[k].min()]
                for k, gt in enumerate(ts)]

    parts = _map_ordered(one, list(cfg.eta_list), threads)
    rows = [r for _, part in sorted(zip(cfg.eta_list, parts), key=lambda x: x[0]) for r in part]
    return ResultTable(["gamma_t", "eta", "F_min_closed", "F_min_numeric"], rows)


def run_qubit_optimal(cfg, threads):
    gamma_t = cfg.gamma * cfg.t_final
    best = qubit.optimal_qubit(cfg.eta, gamma_t, cfg.n_plus_m_max)
    rows = []
    for total in range(1, cfg.n_plus_m_max + 1):
        for m in range((total + 1) // 2):
            n = total - m
            rows.append([n, m, gamma_t, cfg.eta, qubit.min_fidelity_closed(n, m, cfg.eta, gamma_t),
                         (n, m) == best])
    return ResultTable(["n", "m", "gamma_t", "eta", "F_min_closed", "optimal"], rows,
                       {"optimal": list(best)})


def run_stirap(cfg, threads):
    sched = _schedule(cfg.stirap)
    st = cfg.stirap
    report = stirap.adiabaticity_check(sched, st.nbar, cfg.gamma, st.gamma_e)
    rho = fock.projector(_single_mode_state(cfg))
    _, diag = stirap.simulate_crossing(rho, sched, dt=st.dt)
    rows = [[t, o, e] for t, o, e in zip(diag.times, diag.dark_overlap, diag.excited_pop)]
    meta = {"adiabaticity": report.as_dict(), "transfer_fidelity": diag.transfer_fidelity,
            "max_excited_pop": diag.max_excited_pop, "final_g2_pop": diag.final_g2_pop}
    return ResultTable(["t", "dark_overlap", "excited_pop"], rows, meta)


RUNNERS = {
    "evolve": run_evolve,
    "sweep": run_sweep,
    "trajectories": run_trajectories,
    "qubit-fidelity": run_qubit_fidelity,
    "qubit-optimal": run_qubit_optimal,
    "stirap": run_stirap,
}


def run(cfg: RunConfig, threads: int = 1) -> ResultTable:
    """Dispatch a validated configuration; ``threads`` never changes the numbers."""
    table = RUNNERS[cfg.scenario](cfg, max(1, threads))
    for row in table.rows:
        for v in row:
            if not isinstance(v, (bool, np.bool_)) and not np.isfinite(float(v)):
                raise NumericalError("non-finite value in result table")
    return table


def write_outputs(cfg: RunConfig, table: ResultTable, out: Path):
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(table.to_csv())
    meta = {"config": cfg.to_dict(), "metadata": table.metadata}
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavityfeedback", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path)
        p.add_argument("--seed", type=int, help="override traj.master_seed")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text, args.scenario)
        if args.seed is not None:
            _require(0 <= args.seed < 2**64, "--seed", "must be an unsigned 64-bit integer")
            cfg = replace(cfg, traj=replace(cfg.traj, master_seed=args.seed))
        out = args.out or (Path(cfg.out) if cfg.out else Path(f"{cfg.scenario}.csv"))
        if args.out is not None:
            cfg = replace(cfg, out=str(out))
        table = run(cfg, args.threads)
        write_outputs(cfg, table, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
