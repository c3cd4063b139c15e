"""Command-line driver.

Examples::

    cavity-teleport teleport-maximal --a 0.6 --b 0.8 --seed 1
    cavity-teleport analytic --alpha1 0.8 --beta1 0.6 --alpha2 0.6 --beta2 0.8
    cavity-teleport monte-carlo --protocol nonmaximal --trials 100000 --seed 7
    cavity-teleport sweep --protocol maximal --offsets 0.001,0.01,0.1 --format csv

Reports are JSON (``config``, ``results``, ``version``) or CSV with one row
per branch, trial summary or sweep point. Floats use the shortest
round-trip representation, and no report field depends on wall-clock time,
so equal arguments give byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (
    ProtocolParams,
    analytic_success_prob,
    enumerate_branches,
    monte_carlo,
    run_protocol,
    timing_sensitivity,
)
from .cavity_ops import (
    BELL_BITS,
    BellKind,
    bell_discriminate,
    bell_state,
    dispersive_two_atom_unitary,
)
from .kernels import BACKEND
from .protocol import MAXIMAL_FORMS, ChannelSpec, InputState, prepare_epr_via_cavity
from .statevec import QState, apply_unitary, concurrence_2q, outcome_probabilities

COMMANDS = ("prepare-epr", "discriminate", "teleport-maximal", "teleport-nonmaximal",
            "teleport-ghz", "monte-carlo", "sweep", "analytic")
PROTOCOL_IDS = {"teleport-maximal": "maximal", "teleport-nonmaximal": "nonmaximal",
                "teleport-ghz": "ghz"}

DEFAULT_A, DEFAULT_B = 0.6, 0.8
DEFAULT_ALPHA, DEFAULT_BETA = math.sqrt(0.8), math.sqrt(0.2)
U64_MAX = 2**64 - 1
DEFAULT_TRIALS = 1000


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    a: complex = DEFAULT_A
    b: complex = DEFAULT_B
    channels: list[tuple[complex, complex]] = field(default_factory=list)
    channel_form: str | None = None
    n: int = 2
    protocol: str = "nonmaximal"
    trials: int | None = None
    workers: int = 1
    seed: int = 0
    offsets: list[float] = field(default_factory=list)
    parameter: str = "theta"
    atoms: str = "gg"
    bell: str = "PhiPlus"
    normalize: bool = False
    out: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        d = {
            "command": self.command, "a": _c(self.a), "b": _c(self.b),
            "channels": [{"alpha": _c(x), "beta": _c(y)} for x, y in self.channels],
            "channel_form": self.channel_form, "n": self.n, "protocol": self.protocol,
            "trials": self.trials, "seed": self.seed, "offsets": list(self.offsets),
            "parameter": self.parameter, "atoms": self.atoms, "bell": self.bell,
            "normalize": self.normalize, "format": self.format,
        }
        return d


def _c(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _pair(name_x: str, x: complex, name_y: str, y: complex, normalize: bool):
    total = abs(x) ** 2 + abs(y) ** 2
    if normalize:
        if total == 0:
            raise ConfigError(f"{name_x}/{name_y}: both coefficients are zero")
        s = math.sqrt(total)
        return x / s, y / s
    if abs(total - 1.0) > 1e-10:
        raise ConfigError(f"{name_x}/{name_y}: |{name_x}|^2 + |{name_y}|^2 = {total!r}, expected 1 "
                          "(pass --normalize to rescale)")
    return x, y


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command: unknown {cfg.command!r}")
    if not 0 <= cfg.seed <= U64_MAX:
        raise ConfigError("seed: must be an unsigned 64-bit integer")
    if cfg.trials is not None and cfg.trials < 1:
        raise ConfigError("trials: must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers: must be >= 1")
    if cfg.command == "monte-carlo" and cfg.trials is None:
        cfg.trials = DEFAULT_TRIALS
    cfg.a, cfg.b = _pair("a", cfg.a, "b", cfg.b, cfg.normalize)
    cfg.channels = [_pair(f"alpha{j + 1}", x, f"beta{j + 1}", y, cfg.normalize)
                    for j, (x, y) in enumerate(cfg.channels)]
    if cfg.channel_form is not None and cfg.channel_form not in MAXIMAL_FORMS:
        raise ConfigError(f"channels: expected one of {MAXIMAL_FORMS}")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format: expected json or csv")
    return cfg


def _params(cfg: RunConfig, protocol: str) -> ProtocolParams:
    inp = InputState(cfg.a, cfg.b)
    specs = [ChannelSpec(x, y) for x, y in cfg.channels]
    if protocol == "maximal":
        return ProtocolParams(inp)
    if protocol == "nonmaximal":
        if not specs:
            specs = [ChannelSpec(DEFAULT_ALPHA, DEFAULT_BETA)] * 2
        if len(specs) == 1:
            specs = specs * 2
        if len(specs) != 2:
            raise ConfigError("channels: nonmaximal scheme takes two channels")
        return ProtocolParams(inp, tuple(specs))
    if protocol == "ghz":
        if cfg.channel_form is not None or not specs:
            return ProtocolParams(inp, cfg.channel_form or "maximal", n=cfg.n)
        if len(specs) == 1:
            specs = specs * cfg.n
        if len(specs) != cfg.n:
            raise ConfigError(f"channels: ghz scheme with n={cfg.n} takes 1 or {cfg.n} channels")
        return ProtocolParams(inp, tuple(specs), n=cfg.n)
    raise ConfigError(f"protocol: unknown {protocol!r}")


def _branch_row(rec) -> dict:
    return {
        "bell_outcomes": [k.value for k in rec.bell_outcomes],
        "photon_detected": rec.photon_detected,
        "probability": rec.branch_probability,
        "success": rec.success,
        "fidelity": rec.fidelity,
        "correction": None if rec.correction is None else list(rec.correction.ops),
    }


def _execute(cfg: RunConfig) -> tuple[dict, list[dict]]:
    """Results dict and flat CSV rows."""
    cmd = cfg.command
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    if cmd == "prepare-epr":
        if len(cfg.atoms) != 2 or set(cfg.atoms) - {"g", "e"}:
            raise ConfigError("atoms: expected two letters from g/e, e.g. 'ge'")
        st = prepare_epr_via_cavity([1 if c == "e" else 0 for c in cfg.atoms])
        labels = ["gg", "ge", "eg", "ee"]
        amps = [_c(z) for z in st.amplitudes]
        res = {"atoms": cfg.atoms, "amplitudes": amps, "concurrence": concurrence_2q(st)}
        rows = [{"basis": lab, "re": z["re"], "im": z["im"]} for lab, z in zip(labels, amps)]
        return res, rows

    if cmd == "discriminate":
        try:
            kind = BellKind(cfg.bell)
        except ValueError:
            raise ConfigError(f"bell: expected one of {[k.value for k in BellKind]}") from None
        st = QState(bell_state(kind))
        res = bell_discriminate(st, 0, 1, rng)
        probs = outcome_probabilities(apply_unitary(st, (0, 1), dispersive_two_atom_unitary()),
                                      (0, 1))
        branches = [{"bits": list(BELL_BITS[k]), "kind": k.value,
                     "probability": float(probs[BELL_BITS[k][0] * 2 + BELL_BITS[k][1]])}
                    for k in BellKind]
        out = {"bell": kind.value, "run": {"kind": res.kind.value, "bits": list(res.record.outcome),
                                           "phase": _c(res.phase),
                                           "probability": res.record.probability},
               "branches": branches}
        rows = [{"kind": b["kind"], "bits": "".join(map(str, b["bits"])),
                 "probability": b["probability"]} for b in branches]
        return out, rows

    if cmd in PROTOCOL_IDS:
        pid = PROTOCOL_IDS[cmd]
        params = _params(cfg, pid)
        rec = run_protocol(pid, params, rng)
        ex = enumerate_branches(pid, params)
        branches = [_branch_row(b) for b in ex.branches]
        out = {"run": rec.to_dict(), "success_probability": ex.success_probability,
               "total_probability": ex.total_probability, "branches": branches}
        rows = [{**b, "bell_outcomes": ";".join(b["bell_outcomes"]),
                 "correction": "" if b["correction"] is None else ";".join(b["correction"])}
                for b in branches]
        return out, rows

    if cmd == "monte-carlo":
        params = _params(cfg, cfg.protocol)
        mc = monte_carlo(cfg.protocol, params, cfg.trials, cfg.seed, cfg.workers)
        summary = {"trials": mc.trials, "successes": mc.successes,
                   "success_rate": mc.success_rate,
                   "mean_conditional_fidelity": mc.mean_conditional_fidelity,
                   "min_conditional_fidelity": mc.min_conditional_fidelity,
                   "ci95_low": mc.ci95[0], "ci95_high": mc.ci95[1]}
        return {"trials_summary": summary}, [summary]

    if cmd == "sweep":
        params = _params(cfg, cfg.protocol)
        offsets = cfg.offsets or [0.0, 1e-3, 1e-2, 1e-1]
        sw = timing_sensitivity(cfg.protocol, params, offsets, cfg.trials, cfg.seed, cfg.parameter)
        points = [{"offset": p.offset, "mean_fidelity": p.mean_fidelity,
                   "success_rate": p.success_rate} for p in sw.points]
        return {"parameter": sw.parameter, "points": points}, points

    # analytic
    params = _params(cfg, "nonmaximal")
    br = analytic_success_prob(*params.channels)
    out = {"p_a": br.p_a, "p_b": br.p_b, "p_c": br.p_c, "p_d": br.p_d, "total": br.total}
    return out, [out]


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def render(cfg: RunConfig, results: dict, rows: list[dict]) -> str:
    if cfg.format == "json":
        report = {"version": __version__, "backend": BACKEND, "config": cfg.echo(),
                  "results": results}
        return json.dumps(_json_safe(report), indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                         for k, v in r.items()})
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a config; returns (exit status, report or error message)."""
    try:
        cfg = validate(cfg)
        results, rows = _execute(cfg)
    except (ConfigError, ValueError) as e:
        return 2, f"error: {e}\n"
    return 0, render(cfg, results, rows)


def _complex(re, im):
    return complex(re if re is not None else 0.0, im if im is not None else 0.0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavity-teleport", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--a", "--a-re", dest="a_re", type=float, default=None)
        s.add_argument("--a-im", type=float, default=None)
        s.add_argument("--b", "--b-re", dest="b_re", type=float, default=None)
        s.add_argument("--b-im", type=float, default=None)
        for j in ("1", "2", ""):
            for coef in ("alpha", "beta"):
                s.add_argument(f"--{coef}{j}", f"--{coef}{j}-re", dest=f"{coef}{j}_re",
                               type=float, default=None)
                s.add_argument(f"--{coef}{j}-im", type=float, default=None)
        s.add_argument("--channels", choices=MAXIMAL_FORMS, default=None,
                       help="maximal channel convention for teleport-ghz")
        s.add_argument("--n", type=int, default=2)
        s.add_argument("--protocol", choices=("maximal", "nonmaximal", "ghz"),
                       default="nonmaximal")
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--offsets", default="", help="comma-separated sweep offsets")
        s.add_argument("--parameter", choices=("theta", "epsilon_t"), default="theta")
        s.add_argument("--atoms", default="gg", help="prepare-epr input, e.g. 'ge'")
        s.add_argument("--bell", default="PhiPlus", help="discriminate input Bell state")
        s.add_argument("--normalize", action="store_true")
        s.add_argument("--out", default=None)
        s.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def config_from_args(ns) -> RunConfig:
    def coef(name, default):
        re, im = getattr(ns, f"{name}_re"), getattr(ns, f"{name}_im")
        if re is None and im is None:
            return default
        return _complex(re, im)

    channels = []
    single = coef("alpha", None), coef("beta", None)
    pairs = [(coef(f"alpha{j}", None), coef(f"beta{j}", None)) for j in ("1", "2")]
    given = [(x, y) for x, y in pairs if x is not None or y is not None]
    if single != (None, None):
        given = [single] + given
    for x, y in given:
        if x is None or y is None:
            raise ConfigError("channels: alpha and beta must be given together")
        channels.append((x, y))
    try:
        offsets = [float(x) for x in ns.offsets.split(",") if x.strip()]
    except ValueError:
        raise ConfigError("offsets: expected comma-separated numbers") from None
    return RunConfig(
        command=ns.command, a=coef("a", DEFAULT_A), b=coef("b", DEFAULT_B), channels=channels,
        channel_form=ns.channels, n=ns.n, protocol=ns.protocol, trials=ns.trials,
        workers=ns.workers, seed=ns.seed, offsets=offsets, parameter=ns.parameter,
        atoms=ns.atoms, bell=ns.bell, normalize=ns.normalize, out=ns.out, format=ns.format)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ConfigError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    status, text = run(cfg)
    if status != 0:
        sys.stderr.write(text)
        return status
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as e:
            sys.stderr.write(f"error: out: {e}\n")
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
