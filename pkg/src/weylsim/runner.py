"""Task execution: orchestrates the engines and writes CSV/JSON artifacts.

Outputs are deterministic given the configuration (and seeds): floats are
formatted with repr-faithful precision and no timestamps enter the data
files. The run manifest is written atomically at the end and records the
config hash, per-task status, output paths, and wall-clock seconds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, ionfock, measurement, observables, wavepacket
from .config import ExperimentConfig, TaskSpec, load_config
from .errors import ConfigError, WeylsimError
from .grids import MomentumGrid
from .wavepacket import WavePacketSpec

VERIFICATION_TASKS = ("verify-identities", "crosscheck")


@dataclass
class TaskResult:
    name: str
    type: str
    status: str            # "pass", "fail", or "error"
    outputs: list[str] = field(default_factory=list)
    seconds: float = 0.0
    detail: str = ""


@dataclass
class RunManifest:
    config_hash: str
    version: str
    output_dir: str
    tasks: list[TaskResult] = field(default_factory=list)

    @property
    def verification_ok(self) -> bool:
        return all(t.status == "pass" for t in self.tasks if t.type in VERIFICATION_TASKS)

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, "version": self.version,
                "output_dir": self.output_dir, "tasks": [asdict(t) for t in self.tasks]}


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_csv(path: Path, header: str, columns) -> None:
    rows = np.broadcast_arrays(*columns)
    with open(path, "w", newline="") as handle:
        handle.write(header + "\n")
        for i in range(len(rows[0])):
            handle.write(",".join(_fmt(float(col[i])) for col in rows) + "\n")


def _prepare_output(path: Path, overwrite: bool) -> None:
    if path.exists() and not overwrite:
        raise WeylsimError(f"refusing to overwrite existing output {path} "
                           f"(pass overwrite to allow)")


def _floats(params: dict, key: str, default):
    raw = params.get(key)
    if raw is None:
        return default
    try:
        return [float(tok) for tok in str(raw).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"key {key!r} must be a list of numbers, got {raw!r}") from None


def _float(params, key, default):
    raw = params.get(key)
    try:
        return default if raw is None else float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} must be a number, got {raw!r}") from None


def _int(params, key, default):
    return int(_float(params, key, default))


# ---------------------------------------------------------------------------
# task executors
# ---------------------------------------------------------------------------

def _task_spec(cfg: ExperimentConfig, task: TaskSpec) -> tuple[WavePacketSpec, MomentumGrid]:
    packet = cfg.packet_for(task)
    spec = WavePacketSpec(n=_float(task.params, "n", packet.spec.n),
                          m=_float(task.params, "m", packet.spec.m),
                          width=_float(task.params, "width", packet.spec.width))
    return spec, packet.grid


def run_trajectory_task(cfg, task, outdir, overwrite) -> list[str]:
    spec, grid = _task_spec(cfg, task)
    t_max = _float(task.params, "t_max", 3.0)
    samples = _int(task.params, "samples", 121)
    method = task.params.get("method", "both")
    times = np.linspace(0.0, t_max, samples)
    methods = ("quadrature", "spectral") if method == "both" else (method,)
    records = [observables.trajectory(spec, times, method=meth, grid=grid)
               for meth in methods]
    path = outdir / f"{task.name}.csv"
    _prepare_output(path, overwrite)
    with open(path, "w", newline="") as handle:
        handle.write("t,mean_x,mean_y,method\n")
        for rec in records:
            for t, x, y in zip(rec.times, rec.mean_x, rec.mean_y):
                handle.write(f"{_fmt(t)},{_fmt(x)},{_fmt(y)},{rec.method}\n")
    return [str(path)]


def run_density_task(cfg, task, outdir, overwrite) -> list[str]:
    spec, grid = _task_spec(cfg, task)
    times = _floats(task.params, "times", [0.0, 1.5, 3.0])
    initial = wavepacket.make_initial(spec, grid)
    outputs = []
    for t in times:
        evolved = wavepacket.evolve(initial, t)
        parts = wavepacket.decompose(evolved)
        total = wavepacket.position_density(evolved)
        plus = wavepacket.position_density(parts.psi_plus)
        minus = wavepacket.position_density(parts.psi_minus)
        ax = grid.position_axis
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        label = _fmt(t).replace(".", "p").replace("-", "m")
        path = outdir / f"{task.name}_t{label}.csv"
        _prepare_output(path, overwrite)
        write_csv(path, "x,y,density_total,density_plus,density_minus_inverted",
                  (xx.ravel(), yy.ravel(), total.ravel(), plus.ravel(), -minus.ravel()))
        outputs.append(str(path))
    return outputs


def run_prepare_task(cfg, task, outdir, overwrite) -> list[str]:
    spec, _ = _task_spec(cfg, task)
    ion_cfg = cfg.ion
    if "fock_n" in task.params:
        ion_cfg = ionfock.FockConfig(n_fock=_int(task.params, "fock_n", ion_cfg.n_fock),
                                     modes=ion_cfg.modes, eta=ion_cfg.eta,
                                     rabi=ion_cfg.rabi, rabi_y=ion_cfg.rabi_y)
    state = ionfock.prepare_kicked_state(spec.n, spec.m, ion_cfg)
    psi = state.reshaped()
    n = ion_cfg.n_fock
    q, nx, ny = np.meshgrid(np.arange(2), np.arange(n), np.arange(n), indexing="ij")
    path = outdir / f"{task.name}.csv"
    _prepare_output(path, overwrite)
    write_csv(path, "qubit,nx,ny,re,im",
              (q.ravel(), nx.ravel(), ny.ravel(), psi.real.ravel(), psi.imag.ravel()))
    return [str(path)]


def run_measure_task(cfg, task, outdir, overwrite) -> list[str]:
    spec, grid = _task_spec(cfg, task)
    probe = cfg.probe
    axis = task.params.get("axis", probe["axis"])
    k_max = _float(task.params, "k_max", probe["k_max"]) / spec.width
    dk = _float(task.params, "dk", probe["dk"]) / spec.width
    shots_raw = task.params.get("shots")
    shots = probe["shots"] if shots_raw is None else (
        None if str(shots_raw).lower() in ("exact", "none") else int(shots_raw))
    seed = _int(task.params, "seed", probe["seed"])
    t = _float(task.params, "t", 0.0)
    state = wavepacket.evolve(wavepacket.make_initial(spec, grid), t)
    schedule = measurement.ProbeSchedule.uniform(axis, k_max=k_max, dk=dk)
    record = measurement.measure(state, schedule, width=spec.width)
    if shots is not None:
        record = measurement.shot_noise(record, shots, seed)
    rec_path = outdir / f"{task.name}_record.csv"
    _prepare_output(rec_path, overwrite)
    write_csv(rec_path, "k,P_z,P_y,cos_k,sin_k",
              (record.k, record.p_z, record.p_y, record.cos_k, record.sin_k))
    dens = measurement.reconstruct_density(record, window=task.params.get("window", "rect"))
    dens_path = outdir / f"{task.name}_density.csv"
    _prepare_output(dens_path, overwrite)
    write_csv(dens_path, "y,density", (dens.coords, dens.density))
    return [str(rec_path), str(dens_path)]


def identity_report(ion_cfg: ionfock.FockConfig, truncations) -> dict:
    """Operator-identity suite at the requested truncations."""
    report = {"checks": [], "ok": True}
    for n in truncations:
        cfg_n = ionfock.FockConfig(n_fock=int(n), modes="xy", eta=ion_cfg.eta,
                                   rabi=ion_cfg.rabi)
        built = ionfock.build_bichromatic_weyl(cfg_n)
        target = ionfock.weyl_target(cfg_n)
        dev_weyl = ionfock.identity_deviation(built, target)
        herm = built.hermiticity_defect()
        dev_disp = max(
            ionfock.identity_deviation(ionfock.build_displacement(mode, cfg_n),
                                       ionfock.displacement_target(mode, cfg_n))
            for mode in ("x", "y"))
        ok = dev_weyl <= 1e-12 and dev_disp <= 1e-12 and herm <= 1e-12
        report["checks"].append({"n_fock": int(n), "weyl_identity": dev_weyl,
                                 "displacement_identity": dev_disp,
                                 "hermiticity": herm, "ok": ok})
        report["ok"] = report["ok"] and ok
    return report


def run_verify_identities_task(cfg, task, outdir, overwrite) -> tuple[list[str], bool]:
    truncations = _floats(task.params, "fock_n", [8, 16])
    report = identity_report(cfg.ion, truncations)
    path = outdir / f"{task.name}.json"
    _prepare_output(path, overwrite)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return [str(path)], report["ok"]


def run_crosscheck_task(cfg, task, outdir, overwrite) -> tuple[list[str], bool]:
    spec, grid = _task_spec(cfg, task)
    t = _float(task.params, "t", 1.5)
    threshold = _float(task.params, "threshold", 0.02)
    n_fock = _int(task.params, "fock_n", max(cfg.ion.n_fock, 32))
    ion_cfg = ionfock.FockConfig(n_fock=n_fock, modes="xy", eta=cfg.ion.eta,
                                 rabi=cfg.ion.rabi)
    report = ionfock.fock_vs_spectral_crosscheck(spec, t, ion_cfg, grid)
    ok = report.deviation <= threshold and report.leakage <= ionfock.LEAKAGE_TOLERANCE
    payload = {**asdict(report), "threshold": threshold, "ok": ok}
    path = outdir / f"{task.name}.json"
    _prepare_output(path, overwrite)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return [str(path)], ok


# ---------------------------------------------------------------------------
# run / verify entry points
# ---------------------------------------------------------------------------

def _execute(cfg: ExperimentConfig, task: TaskSpec, outdir: Path) -> TaskResult:
    started = time.perf_counter()
    try:
        if task.type == "trajectory":
            outputs, ok = run_trajectory_task(cfg, task, outdir, cfg.overwrite), True
        elif task.type == "density":
            outputs, ok = run_density_task(cfg, task, outdir, cfg.overwrite), True
        elif task.type == "prepare":
            outputs, ok = run_prepare_task(cfg, task, outdir, cfg.overwrite), True
        elif task.type == "measure":
            outputs, ok = run_measure_task(cfg, task, outdir, cfg.overwrite), True
        elif task.type == "verify-identities":
            outputs, ok = run_verify_identities_task(cfg, task, outdir, cfg.overwrite)
        elif task.type == "crosscheck":
            outputs, ok = run_crosscheck_task(cfg, task, outdir, cfg.overwrite)
        else:
            raise ConfigError(f"unknown task type {task.type!r}")
        status = "pass" if ok else "fail"
        detail = ""
    except Exception as exc:
        outputs, status, detail = [], "error", f"{type(exc).__name__}: {exc}"
    return TaskResult(task.name, task.type, status, outputs,
                      time.perf_counter() - started, detail)


def default_output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("WEYLSIM_OUTDIR")
    return Path(env) / cfg.output_dir if env else Path(cfg.output_dir)


def run(config_path, output_dir: str | None = None, overwrite: bool | None = None,
        parallel: bool = False, tasks_filter=None) -> RunManifest:
    """Execute the run plan of a configuration file.

    Task outputs land under the output directory; the manifest is written
    atomically as ``manifest.json`` when every task has finished. Failed
    tasks are recorded and do not stop later tasks.
    """
    cfg = load_config(config_path)
    if overwrite is not None:
        object.__setattr__(cfg, "overwrite", overwrite)
    outdir = default_output_dir(cfg, output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    manifest = RunManifest(digest, __version__, str(outdir))
    tasks = [t for t in cfg.tasks if tasks_filter is None or t.type in tasks_filter]
    if parallel and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=min(4, len(tasks))) as pool:
            manifest.tasks = list(pool.map(lambda t: _execute(cfg, t, outdir), tasks))
    else:
        manifest.tasks = [_execute(cfg, t, outdir) for t in tasks]
    for result in manifest.tasks:
        for out in result.outputs:
            if not Path(out).exists():
                result.status = "error"
                result.detail = f"declared output missing: {out}"
    tmp = outdir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, outdir / "manifest.json")
    return manifest


def verify(config_path, output_dir: str | None = None,
           overwrite: bool | None = None) -> RunManifest:
    """Run only the verification tasks of a configuration."""
    return run(config_path, output_dir=output_dir, overwrite=overwrite,
               tasks_filter=VERIFICATION_TASKS)
