"""Run configuration, result persistence, and feasibility arithmetic.

Every run directory uses the same small set of plain-text artifacts:

* ``summary.json``  - nested key/value document with parameters,
  per-pattern metrics before/after training, recomputed percent deltas,
  and efficiency numbers,
* ``fringes_afek.csv`` / ``fringes_trained.csv`` - phi, one probability
  column per pattern, one CFI column per pattern,
* ``trace.csv`` - step, loss, then the eight parameter columns,
* ``wigner_*.csv`` - x, p, W triples.

All floating-point output carries 17 significant digits so parsed
values are bit-identical to the doubles that produced them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import circuit
from .optimizer import AdamConfig

FLOAT_FMT = ".17g"


# ---------------------------------------------------------------------------
# JSON with fixed float formatting

def _emit(obj, indent: int) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{pad}  {_emit(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), FLOAT_FMT)
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def json_write(path, obj) -> None:
    Path(path).write_text(_emit(obj, 0) + "\n")


def json_read(path):
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# pattern keys and CSV helpers

def pattern_key(pattern) -> str:
    return f"{pattern[0]},{pattern[1]}"


def parse_pattern(key: str) -> tuple[int, int]:
    a, b = key.split(",")
    return int(a), int(b)


def _fmt(x) -> str:
    return format(float(x), FLOAT_FMT)


def write_fringes_csv(path, phis, probs: dict, cfis: dict, patterns) -> None:
    cols = ["phi"]
    cols += [f"p_{p[0]}_{p[1]}" for p in patterns]
    cols += [f"cfi_{p[0]}_{p[1]}" for p in patterns]
    lines = [",".join(cols)]
    for i in range(len(phis)):
        row = [_fmt(phis[i])]
        row += [_fmt(probs[p][i]) for p in patterns]
        row += [_fmt(cfis[p][i]) for p in patterns]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_fringes_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    patterns = []
    for name in header:
        if name.startswith("p_"):
            _, a, b = name.split("_")
            patterns.append((int(a), int(b)))
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    phis = data[:, 0]
    probs = {p: data[:, 1 + i] for i, p in enumerate(patterns)}
    cfis = {p: data[:, 1 + len(patterns) + i] for i, p in enumerate(patterns)}
    return phis, probs, cfis, patterns


def write_trace_csv(path, losses, params_list) -> None:
    lines = [",".join(["step", "loss", *circuit.PARAM_NAMES])]
    for step, (lo, vec) in enumerate(zip(losses, params_list)):
        lines.append(",".join([str(step), _fmt(lo), *(_fmt(v) for v in vec)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return data[:, 1], [row for row in data[:, 2:]]


def write_wigner_csv(path, grid) -> None:
    lines = ["x,p,w"]
    for i, x in enumerate(grid.x_axis):
        for j, p in enumerate(grid.p_axis):
            lines.append(f"{_fmt(x)},{_fmt(p)},{_fmt(grid.values[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_wigner_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    xs = np.unique(data[:, 0])
    ps = np.unique(data[:, 1])
    values = data[:, 2].reshape(len(xs), len(ps))
    return xs, ps, values


# ---------------------------------------------------------------------------
# run configuration

@dataclass
class RunConfig:
    """Hyperparameters of one run; the defaults are the full protocol."""

    n_total: int = 2
    cutoff: int | None = None
    adam: AdamConfig = field(default_factory=AdamConfig)
    scan_points: int = 400
    k_samples: int = 8
    beta: float = 50.0
    eps_frac: float = 0.05
    wigner_extent: float = 6.0
    wigner_points: int = 201
    seed: int = 0

    @classmethod
    def from_file(cls, path, n_total: int | None = None) -> "RunConfig":
        raw = json_read(path) if path else {}
        adam = AdamConfig(**raw.pop("adam", {}))
        cfg = cls(adam=adam, **raw)
        if n_total is not None:
            cfg.n_total = n_total
        return cfg

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "cutoff": self.cutoff,
            "adam": {
                "learning_rate": self.adam.learning_rate,
                "beta1": self.adam.beta1,
                "beta2": self.adam.beta2,
                "epsilon_adam": self.adam.epsilon_adam,
                "steps": self.adam.steps,
            },
            "scan_points": self.scan_points,
            "k_samples": self.k_samples,
            "beta": self.beta,
            "eps_frac": self.eps_frac,
            "wigner_extent": self.wigner_extent,
            "wigner_points": self.wigner_points,
            "seed": self.seed,
        }

    def resolved_cutoff(self) -> int:
        from . import fock

        return self.cutoff or fock.cutoff_for(self.n_total)


# ---------------------------------------------------------------------------
# results bundle

_METRIC_FIELDS = ("f_peak_raw", "f_peak_norm", "p_max", "visibility",
                  "fft_dominant", "fft_harmonic_ratio")
_EFF_FIELDS = ("qfi", "p_sel", "f_sigma_raw", "eta_sigma", "events_per_pulse",
               "phi_star", "phi_star_alt", "p_sel_alt")


def percent_delta(before: float, after: float) -> float:
    return 100.0 * (after - before) / before


@dataclass
class ResultsBundle:
    """Everything one training run produces, ready to persist."""

    config: RunConfig
    patterns: list
    afek_params: np.ndarray
    trained_params: np.ndarray
    afek_metrics: dict
    trained_metrics: dict
    efficiency_afek: dict
    efficiency_trained: dict
    weights: dict
    losses: list
    trace_params: list
    fringes_afek: tuple = None
    fringes_trained: tuple = None

    def drift(self) -> dict:
        d = self.trained_params - self.afek_params
        return {name: float(v) for name, v in zip(circuit.PARAM_NAMES, d)}

    def deltas(self) -> dict:
        """Percent changes, always recomputed from the stored absolutes."""
        out = {}
        for p in self.patterns:
            a, t = self.afek_metrics[p], self.trained_metrics[p]
            entry = {
                "f_peak_raw": percent_delta(a["f_peak_raw"], t["f_peak_raw"]),
                "p_max": percent_delta(a["p_max"], t["p_max"]),
            }
            if isinstance(a["f_peak_norm"], float) and isinstance(t["f_peak_norm"], float):
                entry["f_peak_norm"] = percent_delta(a["f_peak_norm"], t["f_peak_norm"])
            out[pattern_key(p)] = entry
        return out

    def summary_dict(self) -> dict:
        return {
            "run": {"n_total": self.config.n_total,
                    "cutoff": self.config.resolved_cutoff(),
                    "seed": self.config.seed},
            "config": self.config.to_dict(),
            "patterns": [pattern_key(p) for p in self.patterns],
            "params": {
                "afek": dict(zip(circuit.PARAM_NAMES, self.afek_params)),
                "trained": dict(zip(circuit.PARAM_NAMES, self.trained_params)),
                "drift": self.drift(),
            },
            "weights": {pattern_key(p): w for p, w in self.weights.items()},
            "metrics": {
                "afek": {pattern_key(p): self.afek_metrics[p] for p in self.patterns},
                "trained": {pattern_key(p): self.trained_metrics[p] for p in self.patterns},
            },
            "deltas_percent": self.deltas(),
            "efficiency": {"afek": self.efficiency_afek,
                           "trained": self.efficiency_trained},
            "loss": {"initial": self.losses[0], "final": self.losses[-1]},
        }

    def save(self, outdir) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        json_write(outdir / "summary.json", self.summary_dict())
        write_trace_csv(outdir / "trace.csv", self.losses, self.trace_params)
        if self.fringes_afek is not None:
            phis, probs, cfis = self.fringes_afek
            write_fringes_csv(outdir / "fringes_afek.csv", phis, probs, cfis,
                              self.patterns)
        if self.fringes_trained is not None:
            phis, probs, cfis = self.fringes_trained
            write_fringes_csv(outdir / "fringes_trained.csv", phis, probs, cfis,
                              self.patterns)

    @classmethod
    def load(cls, outdir) -> "ResultsBundle":
        outdir = Path(outdir)
        s = json_read(outdir / "summary.json")
        cfg_raw = dict(s["config"])
        cfg = RunConfig(adam=AdamConfig(**cfg_raw.pop("adam")), **cfg_raw)
        patterns = [parse_pattern(k) for k in s["patterns"]]
        losses, trace_params = read_trace_csv(outdir / "trace.csv")

        def metrics_in(block):
            out = {}
            for key, m in block.items():
                out[parse_pattern(key)] = {f: m[f] for f in _METRIC_FIELDS}
            return out

        fr_a = fr_t = None
        if (outdir / "fringes_afek.csv").exists():
            phis, probs, cfis, _ = read_fringes_csv(outdir / "fringes_afek.csv")
            fr_a = (phis, probs, cfis)
        if (outdir / "fringes_trained.csv").exists():
            phis, probs, cfis, _ = read_fringes_csv(outdir / "fringes_trained.csv")
            fr_t = (phis, probs, cfis)
        return cls(
            config=cfg,
            patterns=patterns,
            afek_params=np.array([s["params"]["afek"][k] for k in circuit.PARAM_NAMES]),
            trained_params=np.array([s["params"]["trained"][k] for k in circuit.PARAM_NAMES]),
            afek_metrics=metrics_in(s["metrics"]["afek"]),
            trained_metrics=metrics_in(s["metrics"]["trained"]),
            efficiency_afek=s["efficiency"]["afek"],
            efficiency_trained=s["efficiency"]["trained"],
            weights={parse_pattern(k): w for k, w in s["weights"].items()},
            losses=list(losses),
            trace_params=trace_params,
            fringes_afek=fr_a,
            fringes_trained=fr_t,
        )


# ---------------------------------------------------------------------------
# feasibility arithmetic

def acquisition_time(p_sel: float, f_rep: float, n_c: float) -> float:
    """Seconds to accumulate n_c selected events at pulse rate f_rep."""
    if p_sel <= 0:
        raise ValueError("p_sel must be positive")
    return n_c / (f_rep * p_sel)


def feasibility_report(summary: dict, f_rep: float = 1e4, n_c: float = 1e4,
                       eta_loss: float = 0.0) -> dict:
    """Acquisition times and improvement factors from a run summary.

    Times are reported both for the total post-selection probability and
    per pattern (using each pattern's peak probability); a per-photon
    loss eta_loss rescales every selection probability by
    (1 - eta_loss)^N.
    """
    n = summary["run"]["n_total"]
    loss_factor = (1.0 - eta_loss) ** n
    eff_a = summary["efficiency"]["afek"]
    eff_t = summary["efficiency"]["trained"]
    out = {
        "f_rep": f_rep,
        "n_c": n_c,
        "eta_loss": eta_loss,
        "loss_factor": loss_factor,
        "total": {
            "afek_seconds": acquisition_time(eff_a["p_sel"] * loss_factor, f_rep, n_c),
            "trained_seconds": acquisition_time(eff_t["p_sel"] * loss_factor, f_rep, n_c),
        },
        "per_pattern": {},
    }
    out["total"]["speedup"] = (out["total"]["afek_seconds"]
                               / out["total"]["trained_seconds"])
    for key in summary["patterns"]:
        pa = summary["metrics"]["afek"][key]["p_max"]
        pt = summary["metrics"]["trained"][key]["p_max"]
        out["per_pattern"][key] = {
            "afek_seconds": acquisition_time(pa * loss_factor, f_rep, n_c),
            "trained_seconds": acquisition_time(pt * loss_factor, f_rep, n_c),
        }
    rate_ratio = (eff_t["events_per_pulse"] / eff_a["events_per_pulse"]
                  if eff_a["events_per_pulse"] > 0 else float("nan"))
    out["events_rate_ratio"] = rate_ratio
    out["phase_uncertainty_improvement"] = float(np.sqrt(rate_ratio))
    return out
