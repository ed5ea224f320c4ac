"""``rmt-smin`` command line.

Every option may also come from an INI config file (``--config``): keys in a
section named after the subcommand (``[verify]``, ``[graph]``...) apply to
that subcommand, keys in ``[run]`` apply to all. Command-line flags win over
the file. The seed falls back to $RMT_SMIN_SEED, then 0.

Exit status: 0 success, 1 a verification recorded violations, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys

import numpy as np

from . import __version__, certify, graph, linalg, profile, sampler, spectral, verify

EXPERIMENTS = ("main-theorem", "optimality", "norm-event", "anticoncentration", "normal-event", "coverage")

# option name -> (type, default); None default means "required or derived"
OPTIONS = {
    "profile": (str, None),
    "dist": (str, "real_gaussian"),
    "z": (str, None),
    "kappa": (float, 0.1),
    "R": (float, 1.0),
    "seed": (int, None),
    "trials": (int, 20),
    "trial": (int, 0),
    "jobs": (int, None),
    "json": (str, None),
    "csv": (str, None),
    "out": (str, None),
    "dot": (str, None),
    "L2": (float, None),
    "delta": (float, None),
    "beta": (float, None),
    "cap": (int, 100_000),
    "structures_cap": (int, 10**6),
    "J": (str, None),
    "matrix": (str, None),
    "sizes": (str, None),
    "eps": (float, None),
    "kind": (str, "corollary"),
    "n": (int, None),
    "d": (int, None),
    "w": (int, None),
    "m": (int, 1),
    "samples": (int, 20),
    "y_samples": (int, 20),
    "t_grid": (str, "0.05,0.1,0.2,0.5"),
    "grid": (str, None),
    "delta_n": (float, None),
    "realizations": (int, 5),
    "svg": (str, None),
    "cdf_svg": (str, None),
    "calibrate": (int, 0),
    "nu": (int, 0),
    "seed2": (int, None),
}

COMMAND_OPTIONS = {
    "profile": ["profile", "out", "json"],
    "sample": ["profile", "dist", "z", "seed", "trial", "out", "json"],
    "smin": ["profile", "dist", "z", "seed", "trials", "json", "csv"],
    "graph": ["profile", "z", "kappa", "L2", "delta", "beta", "cap", "structures_cap", "json", "dot"],
    "certify": ["profile", "dist", "z", "kappa", "seed", "trial", "J", "matrix", "sizes", "eps", "R", "kind",
                "cap", "json"],
    "verify": ["profile", "dist", "z", "kappa", "R", "seed", "trials", "jobs", "n", "d", "m", "samples",
               "y_samples", "t_grid", "grid", "delta_n", "json", "csv"],
    "esd": ["n", "w", "seed", "dist", "realizations", "calibrate", "nu", "z", "kappa", "seed2", "profile",
            "json", "csv", "svg", "cdf_svg"],
}


class ConfigError(ValueError):
    pass


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmt-smin", description="Smallest singular values of shifted random matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="INI file with [run] and per-command sections")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "profile": "build a variance profile and print its statistics",
        "sample": "draw A = V*W and write A - z Id",
        "smin": "smallest singular value of A - z Id over trials",
        "graph": "build the submatrix graph; export JSON/DOT",
        "certify": "block certificates (explicit matrix or graph terminals)",
        "verify": "Monte-Carlo experiments",
        "esd": "empirical spectral distribution of band matrices",
    }
    for cmd, names in COMMAND_OPTIONS.items():
        sp = sub.add_parser(cmd, help=helps[cmd])
        if cmd == "verify":
            sp.add_argument("experiment", choices=EXPERIMENTS)
        for name in names:
            typ, _ = OPTIONS[name]
            sp.add_argument(_flag(name), dest=name, type=typ, default=None)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags, config file and defaults into one flat, serializable config."""
    cfg = {}
    file_values = {}
    if args.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        for section in ("run", args.command):
            if cp.has_section(section):
                file_values.update(dict(cp.items(section)))
    for name in COMMAND_OPTIONS[args.command]:
        typ, default = OPTIONS[name]
        value = getattr(args, name)
        if value is None and name in file_values:
            try:
                value = typ(file_values[name])
            except ValueError as exc:
                raise ConfigError(f"config key {name!r}: {exc}") from exc
        if value is None:
            value = default
        cfg[name] = value
    unknown = set(file_values) - set(OPTIONS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "seed" in cfg and cfg["seed"] is None:
        env = os.environ.get("RMT_SMIN_SEED")
        try:
            cfg["seed"] = int(env) if env else 0
        except ValueError as exc:
            raise ConfigError(f"RMT_SMIN_SEED must be an integer, got {env!r}") from exc
    if "jobs" in cfg and cfg["jobs"] is None:
        cfg["jobs"] = os.cpu_count() or 1
    cfg["command"] = args.command
    if args.command == "verify":
        cfg["experiment"] = args.experiment
    return cfg


def _need(cfg, *names):
    for n in names:
        if cfg.get(n) is None:
            raise ConfigError(f"{cfg['command']}: missing required option {_flag(n)}")


def _profile(cfg) -> profile.VarianceProfile:
    _need(cfg, "profile")
    return profile.parse_profile_spec(cfg["profile"])


def _z(cfg, default=None) -> complex:
    if cfg.get("z") is None:
        if default is None:
            raise ConfigError(f"{cfg['command']}: missing required option --z")
        return complex(default)
    return sampler.parse_z(cfg["z"])


def _floats(text) -> list:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _grid(text) -> list:
    """``"re:im;re:im"`` or ``"re,re"`` (real points)."""
    pts = []
    for tok in str(text).replace(";", " ").split():
        for item in tok.split(","):
            if ":" in item:
                a, b = item.split(":")
                pts.append(complex(float(a), float(b)))
            elif item:
                pts.append(complex(float(item), 0.0))
    return pts


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _envelope(cfg, result) -> str:
    # the worker count never changes results, so it stays out of the byte-stable report
    shown = {k: v for k, v in cfg.items() if k != "jobs"}
    payload = {"version": __version__, "config": shown, "result": result}
    return json.dumps(verify._jsonable(payload), indent=2) + "\n"


# --- commands -----------------------------------------------------------------------


def cmd_profile(cfg):
    prof = _profile(cfg)
    st = profile.stats(prof)
    if cfg["out"]:
        profile.save_profile(prof, cfg["out"])
    result = {"name": prof.name, "n": prof.n, "sigma_star": st.sigma_star, "sigma": st.sigma,
              "sparsity_ratio": st.sparsity_ratio}
    summary = f"profile {prof.name}: n={prof.n} sigma*={st.sigma_star:.6g} sigma={st.sigma:.6g}"
    return 0, result, summary


def cmd_sample(cfg):
    prof = _profile(cfg)
    z = _z(cfg, 0.0)
    s = sampler.sample(prof, cfg["dist"], z, cfg["seed"], cfg["trial"])
    if cfg["out"]:
        _write(cfg["out"], profile.dumps_matrix(s.matrix))
    result = {"n": s.n, "z": z, "seed": s.seed, "trial": s.trial, "smin": s.smin(),
              "norm": linalg.spectral_norm(s.A)}
    return 0, result, f"sample n={s.n} z={z} smin={result['smin']:.6g}"


def cmd_smin(cfg):
    prof = _profile(cfg)
    z = _z(cfg, 0.0)
    rows = []
    for t in range(cfg["trials"]):
        s = sampler.sample(prof, cfg["dist"], z, cfg["seed"], t)
        rows.append({"trial": t, "smin": s.smin()})
    if cfg["csv"]:
        _write(cfg["csv"], "trial,smin\n" + "".join(f"{r['trial']},{r['smin']!r}\n" for r in rows))
    vals = [r["smin"] for r in rows]
    result = {"z": z, "per_trial": rows, "min": min(vals) if vals else None}
    return 0, result, f"smin over {len(rows)} trials: min={result['min']}"


def cmd_graph(cfg):
    prof = _profile(cfg)
    if cfg["L2"] is not None:
        params = graph.GraphParams.raw_override(prof.n, cfg["L2"], delta=cfg["delta"] or 0.0, beta=cfg["beta"])
    else:
        _need(cfg, "z")
        params = graph.GraphParams.from_shift(prof.n, _z(cfg), cfg["kappa"])
    g = graph.build_graph(prof, params, cap=cfg["cap"])
    checks = graph.validate(g)
    result = g.to_json_dict()
    result["checks"] = checks
    result["params"] = params.to_dict()
    if not g.truncated:
        try:
            en = graph.enumerate_structures(g, 0, cap=0)
            result["structureCount"] = en.count
            result["structureBound"] = en.bound
        except ValueError:
            pass
    if cfg["dot"]:
        _write(cfg["dot"], g.to_dot())
    term = g.terminals
    summary = (f"graph: {len(g.vertices)} vertices, {len(g.edges)} edges, {len(term)} terminals"
               + (" (truncated)" if g.truncated else ""))
    return 0, result, summary


def cmd_certify(cfg):
    if cfg["matrix"]:
        _need(cfg, "eps")
        with open(cfg["matrix"]) as fh:
            M = profile.loads_matrix(fh.read())
        sizes = [int(x) for x in cfg["sizes"].split(",")] if cfg["sizes"] else [M.shape[0]]
        part = certify.BlockPartition.from_sizes(sizes)
        if cfg["kind"] == "gershgorin":
            cert = certify.gershgorin_certificate(M, part, cfg["eps"], cfg["R"])
        elif cfg["kind"] == "corollary":
            cert = certify.corollary_certificate(M, part, _z(cfg), cfg["eps"], cfg["R"])
        else:
            raise ConfigError("--kind must be 'gershgorin' or 'corollary'")
        M_check = M if cfg["kind"] == "gershgorin" else sampler.shift_matrix(M, _z(cfg))
        result = cert.to_dict()
        result["smin"] = linalg.smin(M_check)
        return 0, result, f"certificate {cert.kind}: bound={cert.lower_bound:.6g} ok={cert.precondition_ok}"
    prof = _profile(cfg)
    z = _z(cfg)
    s = sampler.sample(prof, cfg["dist"], z, cfg["seed"], cfg["trial"])
    if cfg["J"]:
        targets = [tuple(int(x) for x in cfg["J"].split(","))]
    else:
        g = graph.build_graph(prof, graph.GraphParams.from_shift(prof.n, z, cfg["kappa"]), cap=cfg["cap"])
        targets = [tuple(J) for J in g.non_empty_terminals]
    certs = []
    for J in targets:
        c = certify.certify_terminal(s, J, cfg["kappa"])
        d = c.to_dict()
        d["J"] = list(J)
        d["smin"] = linalg.smin(s.principal(J))
        certs.append(d)
    ok = sum(c["preconditionOk"] for c in certs)
    return 0, {"certificates": certs}, f"certified {ok}/{len(certs)} terminals"


def cmd_verify(cfg):
    exp = cfg["experiment"]
    jobs = cfg["jobs"]
    seed = cfg["seed"]
    if exp == "main-theorem":
        prof = _profile(cfg)
        z = _z(cfg, profile.stats(prof).sigma)
        cfg["z"] = f"{z.real!r},{z.imag!r}"
        rep = verify.check_main_theorem(prof, cfg["dist"], z, cfg["kappa"], cfg["R"], cfg["trials"], seed, jobs)
    elif exp == "optimality":
        _need(cfg, "n", "d")
        rep = verify.check_optimality_example(cfg["n"], cfg["d"], cfg["trials"], seed, jobs)
    elif exp == "norm-event":
        rep = verify.check_norm_event(_profile(cfg), cfg["dist"], cfg["trials"], cfg["samples"], seed, jobs=jobs)
    elif exp == "anticoncentration":
        rep = verify.check_anticoncentration(cfg["dist"], cfg["m"], cfg["y_samples"], _floats(cfg["t_grid"]),
                                             cfg["trials"], seed, jobs)
    elif exp == "normal-event":
        prof = _profile(cfg)
        z = _z(cfg, profile.stats(prof).sigma)
        rep = verify.check_normal_event(prof, cfg["dist"], z, cfg["trials"], cfg["samples"], seed, jobs)
    else:
        prof = _profile(cfg)
        _need(cfg, "grid")
        delta_n = cfg["delta_n"] if cfg["delta_n"] is not None else verify.default_delta(prof, 2 * cfg["kappa"])
        _, rep = verify.pseudospectrum_coverage(prof, cfg["dist"], _grid(cfg["grid"]), delta_n, cfg["trials"],
                                                seed, jobs)
    if cfg["csv"]:
        _write(cfg["csv"], rep.to_csv())
    status = 0 if rep.passed else 1
    fc = "n/a" if rep.fitted_constant is None else f"{rep.fitted_constant:.6g}"
    summary = (f"verify {exp}: n={rep.n} trials={rep.trials} violations={rep.violations} "
               f"fitted={fc} {'PASS' if status == 0 else 'FAIL'} ({rep.runtime_seconds:.1f}s)")
    return status, rep.to_dict(), summary


def cmd_esd(cfg):
    if cfg["nu"]:
        _need(cfg, "n")
        n = cfg["n"]
        prof = _profile(cfg) if cfg["profile"] else spectral.gaussian_profile(n)
        z = _z(cfg, 1.0)
        seed2 = cfg["seed2"] if cfg["seed2"] is not None else cfg["seed"] + 1
        res = spectral.nu_comparison(prof, cfg["dist"], z, n, (cfg["seed"], seed2), kappa=cfg["kappa"])
        return 0, res.to_dict(), f"nu distance {res.nu_distance:.6g}, logdet gap {res.logdet_gap}"
    _need(cfg, "n")
    n = cfg["n"]
    w = cfg["w"] if cfg["w"] is not None else math.ceil(0.3 * n)
    result = {}
    if cfg["calibrate"]:
        result["calibration"] = spectral.calibrate(n, cfg["calibrate"], cfg["seed"])
    runs = [spectral.band_esd(n, w, cfg["seed"], cfg["dist"], trial=t) for t in range(cfg["realizations"])]
    result["realizations"] = [r.to_dict() for r in runs]
    result["mean_modulus_ks"] = float(np.mean([r.modulus_ks for r in runs]))
    result["mean_angular_ks"] = float(np.mean([r.angular_ks for r in runs]))
    if cfg["csv"]:
        spectral.write_eigenvalues_csv(cfg["csv"], np.concatenate([r.eigenvalues for r in runs]))
    if cfg["svg"]:
        spectral.plot_spectrum_svg(cfg["svg"], runs[0].eigenvalues, f"n={n}, w={w}")
    if cfg["cdf_svg"]:
        spectral.plot_cdf_svg(cfg["cdf_svg"], runs[0].eigenvalues, f"n={n}, w={w}")
    summary = (f"esd n={n} w={w}: modulus KS {result['mean_modulus_ks']:.4f}, "
               f"angular KS {result['mean_angular_ks']:.4f}")
    return 0, result, summary


COMMANDS = {"profile": cmd_profile, "sample": cmd_sample, "smin": cmd_smin, "graph": cmd_graph,
            "certify": cmd_certify, "verify": cmd_verify, "esd": cmd_esd}


def run(cfg: dict) -> int:
    status, result, summary = COMMANDS[cfg["command"]](cfg)
    if cfg.get("json"):
        _write(cfg["json"], _envelope(cfg, result))
    print(summary)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return run(cfg)
    except (ConfigError, verify.HypothesisError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rmt-smin {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
