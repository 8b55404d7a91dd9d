"""Scenario runner: ``catqed <scenario> [--config FILE] [overrides]``.

Configuration documents are JSON objects. Keys are strict per scenario;
command-line flags override config values. Every run writes a primary
payload (CSV or JSON) plus a ``<out>.meta.json`` sidecar with provenance.
The payload depends only on the resolved config and seed, so reruns are
byte-identical; wall-clock timestamps live only in the sidecar.

Exit codes: 0 ok, 2 invalid config value, 3 Fock truncation too small,
4 numerical invariant violated, 5 malformed config document.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, catcode, channel, composite, fock, wigner
from ._backend import BACKEND
from .errors import CatQEDError, ConfigParseError, ConfigValidationError

SCENARIOS = ("wigner", "cat-prepare", "parity-decay", "spectroscopy", "qec", "oracle-check")
U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float, int, str, sign, floats, complex
    default: Any
    help: str
    check: Callable[[Any], bool] | None = None
    constraint: str = ""
    choices: tuple = ()


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


COMMON = (
    Key("seed", "int", 0, "RNG seed (unsigned 64-bit)", lambda x: 0 <= x <= U64_MAX, "0 <= seed < 2^64"),
    Key("dim", "int", None, "Fock truncation; default sized from the state amplitude", lambda x: x >= 2, "dim >= 2"),
    Key("out", "str", None, "output path; default catqed-<scenario>.<format>"),
    Key("format", "str", None, "csv or json (scenario default in brackets)", choices=("csv", "json")),
)

SCENARIO_KEYS: dict[str, tuple[Key, ...]] = {
    "wigner": (
        Key("state", "str", "cat", "cat, coherent or fock", choices=("cat", "coherent", "fock")),
        Key("alpha", "float", 2.5, "cat/coherent amplitude (real)", _nonneg, "alpha >= 0"),
        Key("sign", "sign", 1, "cat parity sign, +1 or -1"),
        Key("n", "int", 0, "Fock level for state=fock", _nonneg, "n >= 0"),
        Key("re_min", "float", -4.0, "grid Re(beta) lower edge"),
        Key("re_max", "float", 4.0, "grid Re(beta) upper edge"),
        Key("im_min", "float", -4.0, "grid Im(beta) lower edge"),
        Key("im_max", "float", 4.0, "grid Im(beta) upper edge"),
        Key("n_re", "int", 81, "grid points along Re(beta)", lambda x: x >= 2, "n_re >= 2"),
        Key("n_im", "int", 81, "grid points along Im(beta)", lambda x: x >= 2, "n_im >= 2"),
    ),
    "cat-prepare": (
        Key("method", "str", "measurement", "measurement or deterministic", choices=("measurement", "deterministic")),
        Key("alpha", "float", 1.0, "coherent amplitude (real)", _positive, "alpha > 0"),
        Key("sign", "sign", 1, "target parity for method=deterministic"),
        Key("shots", "int", 1000, "parity measurements for method=measurement", _positive, "shots > 0"),
    ),
    "parity-decay": (
        Key("alpha", "float", 2.0, "cat amplitude (real)", _positive, "alpha > 0"),
        Key("sign", "sign", -1, "cat parity sign"),
        Key("kappa", "float", 1.0, "photon loss rate", _nonneg, "kappa >= 0"),
        Key("t_max", "float", 3.0, "last time point", _nonneg, "t_max >= 0"),
        Key("n_times", "int", 31, "evenly spaced points from 0 to t_max", lambda x: x >= 1, "n_times >= 1"),
        Key("times", "floats", None, "explicit ascending times (overrides t_max/n_times)",
            lambda xs: all(t >= 0 for t in xs) and all(b >= a for a, b in zip(xs, xs[1:])), "ascending, >= 0"),
    ),
    "spectroscopy": (
        Key("nbar", "float", 4.0, "mean photon number of the coherent drive", _nonneg, "nbar >= 0"),
        Key("chi", "float", 1.0, "dispersive shift", _positive, "chi > 0"),
        Key("n_peaks", "int", 12, "number of photon-number peaks", _positive, "n_peaks > 0"),
    ),
    "qec": (
        Key("alpha0", "float", 2.0, "initial codeword amplitude", _positive, "alpha0 > 0"),
        Key("kappa", "float", 1.0, "photon loss rate", _nonneg, "kappa >= 0"),
        Key("delta_t", "float", 0.005, "parity measurement interval", _positive, "delta_t > 0"),
        Key("t_final", "float", 0.5, "storage time", _positive, "t_final > 0"),
        Key("readout_flip_p", "float", 0.0, "parity readout error probability",
            lambda x: 0 <= x < 1, "0 <= readout_flip_p < 1"),
        Key("c1", "complex", [1.0, 0.0], "logical amplitude on W1 as [re, im]"),
        Key("c2", "complex", [1.0, 0.0], "logical amplitude on W2 as [re, im] (pair is normalized)"),
        Key("shots", "int", 10000, "Monte Carlo trajectories", lambda x: x >= 2, "shots >= 2"),
        Key("sweep", "floats", None, "measurement interval counts for the slope fit",
            lambda xs: len(xs) >= 2 and all(x >= 1 and x == int(x) for x in xs), "at least two integers >= 1"),
    ),
    "oracle-check": (
        Key("alpha", "float", 2.5, "cat amplitude used by the cross-oracle suite", _positive, "alpha > 0"),
    ),
}

DEFAULT_FORMAT = {
    "wigner": "csv",
    "cat-prepare": "json",
    "parity-decay": "csv",
    "spectroscopy": "csv",
    "qec": "csv",
    "oracle-check": "json",
}
CSV_CAPABLE = {"wigner", "parity-decay", "spectroscopy", "qec"}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.params[key]

    @property
    def fmt(self) -> str:
        return self.params["format"]

    @property
    def out(self) -> Path:
        return Path(self.params["out"])


def accepted_keys(scenario: str) -> list[str]:
    return [k.name for k in COMMON + SCENARIO_KEYS[scenario]]


def _coerce(key: Key, value):
    name = key.name
    bad = ConfigValidationError(f"{name}: expected {key.kind}, got {value!r}", name)
    if value is None:
        return None
    if key.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise bad
        return float(value)
    if key.kind in ("int", "sign"):
        if isinstance(value, bool):
            raise bad
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise bad
        if key.kind == "sign" and value not in (1, -1):
            raise ConfigValidationError(f"{name}: must be +1 or -1, got {value}", name)
        return value
    if key.kind == "str":
        if not isinstance(value, str):
            raise bad
        return value
    if key.kind == "floats":
        if not isinstance(value, list) or not value:
            raise bad
        return [_coerce(Key(name, "float", None, ""), v) for v in value]
    if key.kind == "complex":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value, 0.0]
        if not isinstance(value, list) or len(value) != 2:
            raise bad
        return [_coerce(Key(name, "float", None, ""), v) for v in value]
    raise AssertionError(key.kind)


def validate(scenario: str, raw: dict) -> ScenarioConfig:
    """Fill defaults, coerce types and range-check every key."""
    if scenario not in SCENARIOS:
        raise ConfigValidationError(f"scenario: unknown {scenario!r}; choose from {', '.join(SCENARIOS)}", "scenario")
    keys = {k.name: k for k in COMMON + SCENARIO_KEYS[scenario]}
    unknown = sorted(set(raw) - set(keys))
    if unknown:
        raise ConfigValidationError(
            f"unknown key(s) {', '.join(unknown)} for scenario {scenario}; accepted keys: {', '.join(keys)}",
            unknown[0],
        )
    params = {}
    for name, key in keys.items():
        value = _coerce(key, raw.get(name, key.default))
        if value is not None:
            if key.choices and value not in key.choices:
                raise ConfigValidationError(f"{name}: must be one of {', '.join(key.choices)}, got {value!r}", name)
            if key.check is not None and not key.check(value):
                raise ConfigValidationError(f"{name}: violates {key.constraint} (got {value!r})", name)
        params[name] = value
    if params["format"] is None:
        params["format"] = DEFAULT_FORMAT[scenario]
    if params["format"] == "csv" and scenario not in CSV_CAPABLE:
        raise ConfigValidationError(f"format: scenario {scenario} only writes json", "format")
    if params["out"] is None:
        params["out"] = f"catqed-{scenario}.{params['format']}"
    if scenario == "wigner":
        if not (params["re_max"] > params["re_min"] and params["im_max"] > params["im_min"]):
            raise ConfigValidationError("re_max/im_max: grid upper edge must exceed the lower edge", "re_max")
    if scenario == "qec":
        if not params["delta_t"] < params["t_final"]:
            raise ConfigValidationError("delta_t: must be smaller than t_final", "delta_t")
        k = params["t_final"] / params["delta_t"]
        if abs(k - round(k)) > 1e-9 * k:
            raise ConfigValidationError("delta_t: t_final must be an integer multiple of delta_t", "delta_t")
        if params["c1"] == [0.0, 0.0] and params["c2"] == [0.0, 0.0]:
            raise ConfigValidationError("c1/c2: logical amplitudes are both zero", "c1")
    return ScenarioConfig(scenario, params)


def parse_config(text: str, scenario: str | None = None) -> ScenarioConfig:
    """Parse a JSON config document.

    The document names its scenario under ``"scenario"``; ``scenario`` may
    supply or confirm it. Malformed documents raise
    :class:`ConfigParseError`; bad keys or values raise
    :class:`ConfigValidationError` naming the key.
    """
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigParseError("config document must be a JSON object")
    doc = dict(doc)
    named = doc.pop("scenario", None)
    if named is not None and scenario is not None and named != scenario:
        raise ConfigValidationError(f"scenario: config says {named!r} but {scenario!r} was requested", "scenario")
    chosen = scenario or named
    if chosen is None:
        raise ConfigValidationError("scenario: not given", "scenario")
    return validate(chosen, doc)


# ---------------------------------------------------------------- scenarios


def _fmt(x: float) -> str:
    return repr(float(x))


def _csv(header: str, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


@dataclass
class Outcome:
    payload: str
    meta: dict
    lines: list[str] = field(default_factory=list)
    exit_code: int = 0


def _wigner_state(cfg: ScenarioConfig):
    alpha = cfg["alpha"]
    state = cfg["state"]
    if state == "fock":
        dim = cfg["dim"] or max(cfg["n"] + 2, 8)
        return fock.fock_state(cfg["n"], dim), {"state": "fock", "n": cfg["n"]}
    if state == "coherent":
        dim = cfg["dim"] or fock.required_dim(alpha)
        return fock.coherent_state(alpha, dim), {"state": "coherent", "alpha": alpha}
    if alpha == 0:
        raise ConfigValidationError("alpha: a cat needs alpha > 0", "alpha")
    dim = cfg["dim"] or fock.required_dim(alpha, sign=cfg["sign"])
    return fock.cat_state(alpha, cfg["sign"], dim), {"state": "cat", "alpha": alpha, "sign": cfg["sign"]}


def run_wigner(cfg: ScenarioConfig) -> Outcome:
    psi, recipe = _wigner_state(cfg)
    spec = wigner.GridSpec(cfg["re_min"], cfg["re_max"], cfg["im_min"], cfg["im_max"], cfg["n_re"], cfg["n_im"])
    grid = wigner.wigner_grid(psi, spec)
    re, im = spec.axes()
    meta = {"grid": spec.to_dict(), "quadrature_norm": grid.quadrature_norm, "dim": psi.dim, "recipe": recipe}
    if cfg.fmt == "csv":
        rows = ((re[i], im[j], grid.values[i, j]) for i in range(spec.n_re) for j in range(spec.n_im))
        payload = _csv("beta_re,beta_im,w", rows)
    else:
        payload = _json({**meta, "provenance": _provenance(cfg), "w": grid.values.tolist()})
    return Outcome(payload, meta, [f"quadrature_norm {grid.quadrature_norm:.10f}"])


def run_cat_prepare(cfg: ScenarioConfig) -> Outcome:
    alpha = cfg["alpha"]
    if cfg["method"] == "deterministic":
        dim = cfg["dim"] or fock.required_dim(2.0 * alpha) + 10
        with warnings.catch_warnings():
            # the report carries the fidelity; no need to warn about it too
            warnings.simplefilter("ignore", composite.LowFidelityWarning)
            branch = composite.prepare_cat_deterministic(alpha, cfg["sign"], dim)
        ideal = fock.cat_state(alpha, cfg["sign"], dim)
        result = {
            "method": "deterministic",
            "alpha": alpha,
            "sign": cfg["sign"],
            "dim": dim,
            "joint_fidelity": abs(ideal.inner(branch)) ** 2,
            "g_branch_weight": branch.norm() ** 2,
        }
    else:
        dim = cfg["dim"] or fock.required_dim(alpha)
        start = fock.coherent_state(alpha, dim)
        rng = np.random.default_rng(cfg["seed"])
        even = fock.cat_state(alpha, 1, dim)
        odd = fock.cat_state(alpha, -1, dim)
        n_even = 0
        worst = 1.0
        for _ in range(cfg["shots"]):
            rec = composite.measure_parity(start, rng)
            target = even if rec.outcome == 1 else odd
            worst = min(worst, fock.fidelity(target, rec.post_state))
            n_even += rec.outcome == 1
        shots = cfg["shots"]
        p_pred = 0.5 * (1.0 + math.exp(-2.0 * alpha**2))
        result = {
            "method": "measurement",
            "alpha": alpha,
            "dim": dim,
            "shots": shots,
            "even_count": int(n_even),
            "even_fraction": n_even / shots,
            "even_probability_exact": p_pred,
            "binomial_sigma": math.sqrt(p_pred * (1 - p_pred) / shots),
            "min_post_state_fidelity": worst,
        }
    result["provenance"] = _provenance(cfg)
    meta = {"dim": result["dim"]}
    return Outcome(_json(result), meta, [f"{k} {v}" for k, v in result.items() if k != "provenance"])


def run_parity_decay(cfg: ScenarioConfig) -> Outcome:
    times = cfg["times"]
    if times is None:
        n = cfg["n_times"]
        times = [cfg["t_max"] * i / (n - 1) for i in range(n)] if n > 1 else [0.0]
    dim = cfg["dim"] or fock.required_dim(cfg["alpha"], sign=cfg["sign"])
    psi = fock.cat_state(cfg["alpha"], cfg["sign"], dim)
    parity = channel.parity_decay_curve(psi, cfg["kappa"], times)
    meta = {"dim": dim, "recipe": {"state": "cat", "alpha": cfg["alpha"], "sign": cfg["sign"]}, "kappa": cfg["kappa"]}
    if cfg.fmt == "csv":
        payload = _csv("t,parity", zip(times, parity))
    else:
        payload = _json({**meta, "provenance": _provenance(cfg), "t": times, "parity": parity})
    return Outcome(payload, meta)


def run_spectroscopy(cfg: ScenarioConfig) -> Outcome:
    n_peaks = cfg["n_peaks"]
    dim = cfg["dim"] or max(n_peaks, fock.required_dim(math.sqrt(cfg["nbar"])))
    peaks = composite.jump_spectroscopy(cfg["nbar"], cfg["chi"], n_peaks, dim)
    meta = {"dim": dim}
    if cfg.fmt == "csv":
        payload = _csv("detuning,weight", peaks)
    else:
        payload = _json({**meta, "provenance": _provenance(cfg), "detuning": [p[0] for p in peaks],
                         "weight": [p[1] for p in peaks]})
    return Outcome(payload, meta)


def run_qec(cfg: ScenarioConfig) -> Outcome:
    params = catcode.CodeParams(cfg["alpha0"], cfg["kappa"], cfg["delta_t"], cfg["t_final"], cfg["readout_flip_p"])
    lq = catcode.LogicalQubit.normalized(complex(*cfg["c1"]), complex(*cfg["c2"]))
    sweep = [int(x) for x in cfg["sweep"]] if cfg["sweep"] else None
    report = catcode.run_qec_experiment(params, lq, cfg["shots"], cfg["seed"], dim=cfg["dim"], sweep_intervals=sweep)
    summary = report.to_dict()
    meta = {"dim": report.dim, "slope_fit": report.slope_fit, "sweep": report.sweep,
            "min_paired_gap_sigma": report.min_paired_gap_sigma}
    if cfg.fmt == "csv":
        payload = _csv("t,fid_monitored,fid_unmonitored", zip(report.times, report.fid_monitored, report.fid_unmonitored))
    else:
        payload = _json({**summary, "provenance": _provenance(cfg)})
    lines = [
        f"monitored_slope {report.slope_fit['monitored_slope']:.4f}",
        f"unmonitored_slope {report.slope_fit['unmonitored_slope']:.4f}",
    ]
    return Outcome(payload, meta, lines)


def _oracle_suite(alpha: float, dim: int | None, seed: int) -> list[tuple[str, bool, str]]:
    """Cross-check every module against an independent closed form."""
    results = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except CatQEDError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))

    dim = dim or max(fock.required_dim(alpha, sign=1), fock.required_dim(alpha, sign=-1))
    rng = np.random.default_rng(seed)
    betas = rng.uniform(-2.0, 2.0, 6) + 1j * rng.uniform(-2.0, 2.0, 6)

    def coherent():
        psi = fock.coherent_state(alpha, dim)
        err = max(abs(wigner.displaced_parity(psi, b) - wigner.analytic_coherent_wigner(alpha, b)) for b in betas)
        return err < 1e-7, f"max error {err:.2e}"

    def cat_three_way():
        worst = 0.0
        for sign in (1, -1):
            psi = fock.cat_state(alpha, sign, dim)
            for b in betas[:3]:
                dp = wigner.displaced_parity(psi, b)
                an = float(wigner.analytic_cat_wigner(alpha, sign, b, exact_norm=True))
                qd = 2.0 * wigner.wigner_position_quadrature(psi, *wigner.beta_to_xp(b))
                worst = max(worst, abs(dp - an), abs(dp - qd))
        return worst < 1e-5, f"max spread {worst:.2e}"

    def grid_kernel():
        psi = fock.cat_state(alpha, 1, dim)
        spec = wigner.GridSpec(-1.0, 1.0, -1.0, 1.0, 3, 3)
        grid = wigner.wigner_grid(psi, spec)
        re, im = spec.axes()
        err = max(abs(grid.values[i, j] - wigner.displaced_parity(psi, complex(re[i], im[j])))
                  for i in range(3) for j in range(3))
        return err < 1e-9, f"grid vs dense max error {err:.2e}"

    def kraus():
        worst = max(channel.kraus_set(kt, 30, ell_max=29).completeness_defect for kt in (0.1, 1.0, 10.0))
        return worst < 1e-10, f"max defect {worst:.2e}"

    def coherent_decay():
        d = fock.required_dim(2.0)
        out = channel.apply_channel(fock.coherent_state(2.0, d), channel.kraus_set(0.5, d))
        f = fock.fidelity(out, fock.coherent_state(2.0 * math.exp(-0.25), d))
        return f > 1 - 1e-8 and abs(out.purity() - 1) < 1e-8, f"fidelity {f:.12f}"

    def protocol():
        err = float(np.max(np.abs(composite.parity_protocol_unitary(64).matrix
                                  - composite.parity_protocol_expected(64).matrix)))
        return err < 1e-12, f"max entry error {err:.2e}"

    def syndromes():
        d = fock.required_dim(2.0)
        _, p1 = catcode.syndrome_action(1, 2, 2.0, d)
        _, p2 = catcode.syndrome_action(2, 2, 2.0, d)
        _, p4 = catcode.syndrome_action(2, 4, 2.0, d)
        err = max(abs(p1 - 1), abs(p2 + 1), abs(p4 - 1))
        return err < 1e-10, f"max phase error {err:.2e}"

    def backends():
        from . import _backend
        if "cython" not in _backend.available():
            return True, "compiled backend not built; skipped"
        psi = fock.cat_state(alpha, 1, dim).to_density().matrix
        axis = np.linspace(-3.0, 3.0, 7)
        a = _backend.load("cython").wigner_grid(psi, axis, axis)
        b = _backend.load("python").wigner_grid(psi, axis, axis)
        return float(np.max(np.abs(a - b))) < 1e-12, f"max difference {float(np.max(np.abs(a - b))):.2e}"

    check("coherent_wigner_closed_form", coherent)
    check("cat_wigner_three_way", cat_three_way)
    check("grid_kernel_matches_dense", grid_kernel)
    check("kraus_completeness", kraus)
    check("coherent_state_decay", coherent_decay)
    check("parity_protocol_identity", protocol)
    check("syndrome_phases", syndromes)
    check("backend_agreement", backends)
    return results


def run_oracle_check(cfg: ScenarioConfig) -> Outcome:
    results = _oracle_suite(cfg["alpha"], cfg["dim"], cfg["seed"])
    body = {
        "checks": [{"name": n, "pass": ok, "detail": d} for n, ok, d in results],
        "all_pass": all(ok for _, ok, _ in results),
        "provenance": _provenance(cfg),
    }
    lines = [f"{'PASS' if ok else 'FAIL'} {n}: {d}" for n, ok, d in results]
    return Outcome(_json(body), {}, lines, 0 if body["all_pass"] else 4)


RUNNERS = {
    "wigner": run_wigner,
    "cat-prepare": run_cat_prepare,
    "parity-decay": run_parity_decay,
    "spectroscopy": run_spectroscopy,
    "qec": run_qec,
    "oracle-check": run_oracle_check,
}


def _provenance(cfg: ScenarioConfig) -> dict:
    """Deterministic provenance: no clock, no host, no backend name."""
    echo = {k: v for k, v in cfg.params.items() if k != "out"}
    return {
        "scenario": cfg.scenario,
        "config": echo,
        "seed": cfg["seed"],
        "library_version": __version__,
        "tolerances": {
            "tail_tol": fock.DEFAULT_TAIL_TOL,
            "structural_tol": fock.STRUCTURAL_TOL,
            "analysis_tol": fock.ANALYSIS_TOL,
        },
    }


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def run_scenario(cfg: ScenarioConfig, timestamp: bool = True, stdout=None) -> int:
    """Run ``cfg``, write its payload and sidecar, return the exit code."""
    stdout = stdout or sys.stdout
    try:
        outcome = RUNNERS[cfg.scenario](cfg)
    except CatQEDError as exc:
        print(f"catqed {cfg.scenario}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    out = cfg.out
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    out.write_text(outcome.payload, encoding="utf-8")
    meta = {**outcome.meta, "provenance": _provenance(cfg), "payload": out.name, "backend": BACKEND}
    if timestamp:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    sidecar_path(out).write_text(_json(meta), encoding="utf-8")
    for line in outcome.lines:
        print(line, file=stdout)
    print(f"wrote {out}", file=stdout)
    return outcome.exit_code


# ---------------------------------------------------------------- argparse


def _flag_type(key: Key):
    if key.kind == "float":
        return float
    if key.kind in ("int", "sign"):
        return int
    if key.kind == "floats":
        return lambda s: [float(x) for x in s.split(",")]
    if key.kind == "complex":
        return lambda s: [float(x) for x in s.split(",")]
    return str


def _describe(key: Key) -> str:
    default = "auto" if key.default is None else key.default
    text = f"{key.help} [default: {default}]"
    if key.choices:
        text += f" (one of: {', '.join(key.choices)})"
    if key.kind in ("floats", "complex"):
        text += " (comma separated on the command line)"
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catqed",
        description="Dispersive cQED scenarios: " + ", ".join(SCENARIOS) + ".",
        epilog="Exit codes: 0 ok, 2 invalid config, 3 truncation, 4 invariant violation, 5 malformed config.",
    )
    parser.add_argument("--version", action="version", version=f"catqed {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for name in SCENARIOS:
        keys = COMMON + SCENARIO_KEYS[name]
        p = sub.add_parser(
            name,
            help=f"keys: {', '.join(k.name for k in keys)}",
            description=f"Scenario {name}. Config keys may also be given as flags; flags win.",
        )
        p.add_argument("--config", type=Path, default=None, help="JSON config document")
        p.add_argument("--no-timestamp", action="store_true", help="omit the wall-clock time from the sidecar")
        for key in keys:
            flag = "--" + key.name.replace("_", "-")
            p.add_argument(flag, dest=key.name, type=_flag_type(key), default=None, help=_describe(key))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"catqed: cannot read config: {exc}", file=sys.stderr)
        return ConfigParseError.exit_code
    try:
        base = parse_config(text, args.scenario)
        overrides = {k.name: getattr(args, k.name) for k in COMMON + SCENARIO_KEYS[args.scenario]}
        overrides = {k: v for k, v in overrides.items() if v is not None}
        cfg = base
        if overrides:
            doc = json.loads(text) if text.strip() else {}
            doc.pop("scenario", None)
            doc.update(overrides)
            cfg = validate(args.scenario, doc)
    except CatQEDError as exc:
        print(f"catqed {args.scenario}: {exc}", file=sys.stderr)
        return exc.exit_code
    return run_scenario(cfg, timestamp=not args.no_timestamp)


if __name__ == "__main__":
    raise SystemExit(main())
