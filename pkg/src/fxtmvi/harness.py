"""Experiment runner: trajectories, CSVs, settling reports and plot scripts."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .certificates import (CertificateError, RobustnessCheck, SettlingCertificate,
                           lambda_cap, robust_feasibility, settling_bound_const,
                           settling_bound_tv)
from .config import ExperimentConfig, example1_config, load_config
from .dynamics import Constant, DisturbanceSpec, make_field, residual
from .integrator import Trajectory, integrate, write_csv
from .problem import AssumptionReport, MviProblem, assess

# worst case of lambda_cap = 4z/(4z - mu L^2) over the region mu L^2 < 2 z
LAMBDA_WORST = 2.0


@dataclass
class RunReport:
    config: ExperimentConfig
    trajectories: list
    assumption_report: AssumptionReport
    certificate: Optional[SettlingCertificate] = None
    refusal: Optional[str] = None
    robustness: dict = field(default_factory=dict)  # label -> RobustnessCheck
    lambda_used: Optional[float] = None
    csv_paths: dict = field(default_factory=dict)
    output_dir: Optional[Path] = None

    @property
    def all_settled(self) -> bool:
        return bool(self.trajectories) and all(t.settled_at is not None for t in self.trajectories)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_settled and self.assumption_report is not None else 1

    def lines(self) -> list[str]:
        out = [f"problem={self.config.problem if isinstance(self.config.problem, str) else 'inline'}",
               f"model={self.config.model}"]
        out += [f"assumption.{s}" for s in self.assumption_report.lines()]
        if self.certificate is not None:
            out += [f"certificate.{s}" for s in self.certificate.lines()]
        else:
            out.append(f"certificate.refused={self.refusal}")
        for tr in self.trajectories:
            out += [f"{tr.label}.settled_at={tr.settled_at!r}",
                    f"{tr.label}.final_error={tr.final_error!r}",
                    f"{tr.label}.terminated_reason={tr.terminated_reason}",
                    f"{tr.label}.steps={tr.steps}"]
        if self.robustness:
            out.append(f"robust.lambda_used={self.lambda_used!r}")
            for label, chk in self.robustness.items():
                out += [f"{label}.gain_condition_all={chk.all_ok}",
                        f"{label}.gain_margin_min={float(np.min(chk.margins))!r}"]
        out.append(f"all_settled={self.all_settled}")
        return out


def _certify(cfg: ExperimentConfig, p: MviProblem, rep: AssumptionReport):
    """Return (certificate, refusal reason)."""
    if not rep.step_condition_holds:
        return None, (f"step condition fails: mu L^2 = {p.mu * rep.lipschitz_used ** 2:.6g} >= "
                      f"2 zeta = {2 * rep.zeta_used:.6g} ({rep.provenance} constants)")
    g = cfg.build_schedule()
    try:
        if all(isinstance(s, Constant) for s in (g.gamma1, g.gamma2, g.gamma3)):
            phi0 = min(float(np.linalg.norm(residual(p, np.asarray(x, dtype=float))))
                       for x in cfg.initial_conditions)
            cert = settling_bound_const(g.gamma1.beta, g.gamma2.beta, g.gamma3.beta, g.rho1,
                                        g.rho2, None, p.mu, rep.zeta_used, rep.lipschitz_used,
                                        phi0)
        else:
            cert = settling_bound_tv(g, p.mu, rep.zeta_used, rep.lipschitz_used)
    except CertificateError as exc:
        return None, str(exc)
    if rep.provenance == "estimate":
        cert.notes.append("constants are probe estimates, not guarantees")
    return cert, None


def _label(prefix: str, i: int) -> str:
    return f"{prefix}_x{i + 1}"


def _run_batch(cfg: ExperimentConfig, p: MviProblem, model: str, prefix: str,
               disturbance: Optional[DisturbanceSpec], stop_on_settle: bool) -> list:
    g = cfg.build_schedule()
    rhs, res = make_field(model, p, g, disturbance)
    icfg = replace(cfg.integrator, stop_on_settle=stop_on_settle)

    def one(i):
        tr = integrate(rhs, cfg.initial_conditions[i], icfg, res, p.known_solution)
        tr.label = _label(prefix, i)
        return tr

    n = len(cfg.initial_conditions)
    with ThreadPoolExecutor(max_workers=min(n, 8)) as pool:
        return list(pool.map(one, range(n)))


def _write_error_curves(trajs, path: Path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "t", "log10_err_sq"])
        for tr in trajs:
            if tr.error_norms is None:
                continue
            for t, e in zip(tr.times, tr.error_norms):
                val = math.log10(e * e) if e > 0 else -math.inf
                w.writerow([tr.label, format(float(t), ".17g"), format(val, ".17g")])


def execute(cfg: ExperimentConfig) -> RunReport:
    """Run an experiment described by ``cfg`` and write its artifacts."""
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"output_dir {out} is not writable: {exc}") from exc
    p = cfg.build_problem()
    rep = assess(p, cfg.probe_samples, cfg.probe_radius, cfg.seed)
    cert, refusal = _certify(cfg, p, rep)

    trajs = []
    if cfg.model != "disturbed":
        trajs += _run_batch(cfg, p, cfg.model, "nominal", None, True)
    if cfg.disturbance.kind != "none":
        # the full time-varying gain with constant schedules equals the constant-gain model
        trajs += _run_batch(cfg, p, "disturbed", "disturbed", cfg.disturbance, False)

    report = RunReport(cfg, trajs, rep, cert, refusal, output_dir=out)
    if cfg.disturbance.kind != "none":
        if rep.step_condition_holds:
            lam = lambda_cap(p.mu, rep.zeta_used, rep.lipschitz_used)
        else:
            lam = LAMBDA_WORST
        report.lambda_used = lam
        g = cfg.build_schedule()
        for tr in trajs:
            if tr.label.startswith("disturbed"):
                report.robustness[tr.label] = robust_feasibility(g, cfg.disturbance.q, lam, tr)

    for tr in trajs:
        report.csv_paths[tr.label] = write_csv(tr, out / f"{tr.label}.csv")
    _write_error_curves(trajs, out / "error_curves.csv")
    (out / "report.txt").write_text("\n".join(report.lines()) + "\n")
    emit_plot_script(report, out)
    return report


def run_config(path) -> RunReport:
    return execute(load_config(path))


def run_example1(output_dir="out/example1", t_end: float = 2.0, dt: float = 1e-4,
                 seed: int = 0) -> RunReport:
    return execute(example1_config(str(output_dir), t_end, dt, seed))


_PLOT_TEMPLATE = '''"""Plot the trajectories written next to this script (needs matplotlib)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
NOMINAL = {nominal!r}
DISTURBED = {disturbed!r}


def load(name):
    with open(HERE / name) as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    cols = list(zip(*[[float(x) if x else float("nan") for x in r] for r in body]))
    return dict(zip(head, cols))


def states_figure(names, title):
    fig, ax = plt.subplots()
    for name in names:
        d = load(name)
        for key in d:
            if key.startswith("w"):
                ax.plot(d["t"], d[key], lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("state components")
    ax.set_title(title)
    return fig


def error_figure(names, title):
    import math
    fig, ax = plt.subplots()
    for name in names:
        d = load(name)
        err = [2 * math.log10(e) if e > 0 else float("nan") for e in d["error"]]
        ax.plot(d["t"], err, label=name[:-4])
    ax.set_xlabel("t")
    ax.set_ylabel("log10 |w - w*|^2")
    ax.set_title(title)
    ax.legend()
    return fig


if __name__ == "__main__":
    states_figure(NOMINAL, "state trajectories").savefig(HERE / "fig_states.png", dpi=150)
    error_figure(NOMINAL, "error curves").savefig(HERE / "fig_errors.png", dpi=150)
    if DISTURBED:
        error_figure(DISTURBED, "error curves with disturbance").savefig(
            HERE / "fig_disturbed.png", dpi=150)
'''


def emit_plot_script(report: RunReport, output_dir) -> Path:
    """Write ``plot_figures.py`` referencing the CSVs by relative path."""
    if not report.trajectories:
        raise ValueError("cannot emit a plot script for an empty report")
    nominal = [f"{t.label}.csv" for t in report.trajectories if not t.label.startswith("disturbed")]
    disturbed = [f"{t.label}.csv" for t in report.trajectories if t.label.startswith("disturbed")]
    if not nominal:
        nominal, disturbed = disturbed, []
    path = Path(output_dir) / "plot_figures.py"
    path.write_text(_PLOT_TEMPLATE.format(nominal=nominal, disturbed=disturbed))
    return path
