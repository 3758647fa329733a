"""Experiment orchestration: strict configs, deterministic runs, manifests.

Configs are INI text with exactly one section, named after the experiment
kind.  Parsing is strict: unknown keys, missing seeds, or out-of-range
values raise ConfigError with the offending field path.  Every run writes
CSV artifacts (single header row, 17 significant digits) plus a manifest
listing each emitted file with its SHA-256 digest; identical (config, seed)
reruns produce byte-identical CSVs.
"""

import configparser
import hashlib
import io
import json
import os
import time

import numpy as np

from . import __version__
from .contour import Contour, ContourQuadrature, semigroup_contour_check
from .flow import (DiffusionConfig, correlation_curve, evolve_ensemble,
                   l2_decay_curve, sample_ensemble, sample_neighborhood)
from .geometry import GroupElement, Observable, bolza_group, frame_coordinates, reduce_batch
from .rates import (build_dictionary, discrepancy, envelope_checks,
                    fit_exponential, lyapunov_estimate, prefactor_exponent)
from .spectral import (TorusMap, build_advection_diffusion_generator,
                       build_transfer_operator, gap_sweep,
                       resonance_convergence, shear_sector_gaps,
                       spectrum_and_gap)


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


KINDS = ("mix", "decay", "correlate", "spectrum", "contour", "lyapunov")

# every key a kind accepts, beyond the common ones; value = parser
_COMMON = {"seed": int, "out": str, "workers": int}


def _float_list(s):
    return [float(x) for x in s.replace(",", " ").split()]


def _str_list(s):
    return [x for x in s.replace(",", " ").split() if x]


_SCHEMAS = {
    "mix": {"n": int, "nu": float, "times": _float_list, "w_radius": float,
            "theta_center": float, "theta_halfwidth": float},
    "decay": {"nu_list": _float_list, "times": _float_list, "n_base": int,
              "n_paths": int, "r0": float, "ubar": float,
              "windows": _float_list, "c_env": float},
    "correlate": {"n_samples": int, "times": _float_list, "r0": float,
                  "window": _float_list},
    "spectrum": {"eps": float, "nu_list": _float_list, "n_modes": int,
                 "mode": str, "region_r0": float, "times": _float_list},
    "contour": {"cases": _str_list, "t": float, "beta": float, "nu": float,
                "tol": float, "n_modes": int},
    "lyapunov": {"systems": _str_list, "horizon": float, "n_samples": int,
                 "eps": float},
}

_BOUNDS = {
    ("mix", "n"): (1, 10 ** 8), ("mix", "nu"): (0.0, 10.0),
    ("decay", "n_base"): (2, 10 ** 8), ("decay", "n_paths"): (2, 64),
    ("decay", "r0"): (1e-6, 1.528), ("decay", "c_env"): (1.0, 1e6),
    ("correlate", "n_samples"): (2, 10 ** 8),
    ("correlate", "r0"): (1e-6, 1.528),
    ("spectrum", "eps"): (0.0, 0.053), ("spectrum", "n_modes"): (4, 64),
    ("contour", "t"): (1e-6, 1e3), ("contour", "beta"): (1e-6, 1e3),
    ("contour", "nu"): (1e-6, 10.0), ("contour", "n_modes"): (4, 64),
    ("lyapunov", "n_samples"): (1, 10 ** 6),
}


class ExperimentConfig:
    """Parsed and validated experiment description."""

    def __init__(self, kind, params, seed, out_dir, workers=1):
        if kind not in KINDS:
            raise ConfigError("unknown experiment kind %r" % kind)
        self.kind = kind
        self.params = dict(params)
        self.seed = int(seed)
        self.out_dir = out_dir
        self.workers = int(workers)
        if self.workers < 1:
            raise ConfigError("%s.workers: must be >= 1" % kind)

    @classmethod
    def from_text(cls, text, overrides=None):
        """Parse INI text with exactly one kind-named section, strictly."""
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            cp.read_string(text)
        except configparser.Error as e:
            raise ConfigError("config syntax: %s" % e) from e
        sections = cp.sections()
        if len(sections) != 1:
            raise ConfigError("config must have exactly one section, got %r"
                              % (sections,))
        kind = sections[0]
        if kind not in KINDS:
            raise ConfigError("unknown experiment kind [%s]" % kind)
        schema = _SCHEMAS[kind]
        params, seed, out_dir, workers = {}, None, ".", 1
        for key, raw in cp.items(kind):
            if key in _COMMON:
                try:
                    val = _COMMON[key](raw)
                except ValueError as e:
                    raise ConfigError("%s.%s: %s" % (kind, key, e)) from e
                if key == "seed":
                    seed = val
                elif key == "out":
                    out_dir = val
                else:
                    workers = val
                continue
            if key not in schema:
                raise ConfigError("%s.%s: unknown key" % (kind, key))
            try:
                params[key] = schema[key](raw)
            except ValueError as e:
                raise ConfigError("%s.%s: %s" % (kind, key, e)) from e
        overrides = overrides or {}
        if "seed" in overrides and overrides["seed"] is not None:
            seed = int(overrides["seed"])
        if "out" in overrides and overrides["out"] is not None:
            out_dir = overrides["out"]
        if "workers" in overrides and overrides["workers"] is not None:
            workers = int(overrides["workers"])
        if seed is None:
            raise ConfigError("%s.seed: required, never auto-generated" % kind)
        cfg = cls(kind, params, seed, out_dir, workers)
        cfg.validate()
        return cfg

    def validate(self):
        for key, val in self.params.items():
            bound = _BOUNDS.get((self.kind, key))
            if bound is None:
                continue
            vals = val if isinstance(val, (list, tuple)) else [val]
            for v in vals:
                if not bound[0] <= v <= bound[1]:
                    raise ConfigError("%s.%s: %r outside [%g, %g]"
                                      % (self.kind, key, v, *bound))
        for key in ("nu_list", "times"):
            if key in self.params:
                vals = self.params[key]
                if any(v < 0 for v in vals):
                    raise ConfigError("%s.%s: negative entry" % (self.kind, key))
        if self.kind == "mix" and self.params.get("nu", 0.0) < 0:
            raise ConfigError("mix.nu: negative")


class RunManifest:
    def __init__(self, config_echo, version, wall_time, files):
        self.config_echo = config_echo
        self.version = version
        self.wall_time = wall_time
        self.files = dict(files)                # name -> sha256 hex

    def to_json(self):
        return json.dumps({"config": self.config_echo, "version": self.version,
                           "wall_time_s": self.wall_time, "files": self.files},
                          indent=2, sort_keys=True)


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    data = buf.getvalue().encode()
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def _write_text(path, text):
    data = text.encode()
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# experiment runners (each returns {filename: digest})

def _run_mix(cfg, out):
    from .presets import DICTIONARY_INTEGRALS, UNIFORM_REF_MEAN, UNIFORM_REF_STD
    p = cfg.params
    n = p.get("n", 100_000)
    nu = p.get("nu", 0.0)
    times = sorted(p.get("times", [0.0, 5.0, 8.0]))
    flow_cfg = DiffusionConfig(nu) if nu > 0 else DiffusionConfig(0.0, dt=0.02)
    ens = sample_neighborhood(n, cfg.seed,
                              w_radius=p.get("w_radius", 0.1),
                              theta_center=p.get("theta_center", np.pi / 5),
                              theta_halfwidth=p.get("theta_halfwidth", 0.1),
                              config=flow_cfg)
    group, domain = bolza_group()
    dic = build_dictionary(integrals=DICTIONARY_INTEGRALS)
    files = {}
    rows = []
    for t in times:
        ens = evolve_ensemble(ens, t, workers=cfg.workers)
        red = reduce_batch(ens.states, group, domain)
        w, theta = frame_coordinates(red)
        name = "snapshot_t%s.csv" % ("%g" % t)
        files[name] = _write_csv(os.path.join(out, name),
                                 ["z_re", "z_im", "theta"],
                                 zip(w.real, w.imag, theta))
        rows.append((t, discrepancy(red, dic), UNIFORM_REF_MEAN, UNIFORM_REF_STD))
    files["discrepancy.csv"] = _write_csv(
        os.path.join(out, "discrepancy.csv"),
        ["t", "discrepancy", "ref_mean", "ref_std"], rows)
    return files


def _run_decay(cfg, out):
    p = cfg.params
    nu_list = p.get("nu_list", [1e-2])
    times = p.get("times", [round(0.2 * i, 10) for i in range(41)])
    n_base = p.get("n_base", 4096)
    n_paths = p.get("n_paths", 2)
    r0 = p.get("r0", 1.2)
    ubar = p.get("ubar")
    c_env = p.get("c_env", 20.0)
    windows = p.get("windows")   # flat [lo0, hi0, lo1, hi1, ...] per nu
    if windows is not None and len(windows) != 2 * len(nu_list):
        raise ConfigError("decay.windows: need 2 entries per nu")
    if ubar is None:
        raise ConfigError("decay.ubar: required (frozen observable mean)")
    obs = Observable(GroupElement.identity(), r0)
    files = {}
    fit_rows, fits, verdict = [], [], []
    for i, nu in enumerate(nu_list):
        curve = l2_decay_curve(obs, times, DiffusionConfig(nu), n_base,
                               n_paths, seed=cfg.seed + i, ubar=ubar,
                               workers=cfg.workers)
        name = "curve_nu%s.csv" % ("%g" % nu)
        files[name] = _write_csv(os.path.join(out, name),
                                 ["t", "value", "stderr"],
                                 zip(curve.times, curve.values, curve.stderrs))
        window = (tuple(windows[2 * i:2 * i + 2]) if windows is not None
                  else (1.0, times[-1]))
        fit = fit_exponential(curve, window)
        fits.append(fit)
        fit_rows.append((nu, fit.beta, fit.ci[0], fit.ci[1], fit.C, fit.r2))
        if nu > 0 and nu < 1 / np.e:
            rep = envelope_checks(curve, nu, c_env)
            verdict.append("nu=%g envelope(i): %s (C_env_needed=%.3g)"
                           % (nu, "PASS" if rep["envelope_pass"] else "FAIL",
                              rep["C_env_needed"]))
            verdict.append("nu=%g short-time(ii): %s"
                           % (nu, "PASS" if rep["short_time_pass"] else "FAIL"))
    files["fits.csv"] = _write_csv(
        os.path.join(out, "fits.csv"),
        ["nu", "beta_hat", "beta_lo", "beta_hi", "C_hat", "R2"], fit_rows)
    if len(nu_list) >= 4:
        order = sorted(range(len(nu_list)), key=lambda i: -nu_list[i])
        sweep = prefactor_exponent([nu_list[i] for i in order],
                                   [fits[i] for i in order])
        verdict.append("prefactor exponent K_hat=%.4g beta_floor=%.4g"
                       % (sweep.K_hat, sweep.beta_floor))
    if verdict:
        files["verdict.txt"] = _write_text(os.path.join(out, "verdict.txt"),
                                           "\n".join(verdict) + "\n")
    return files


def _run_correlate(cfg, out):
    p = cfg.params
    r0 = p.get("r0", 1.2)
    times = p.get("times", [round(0.2 * i, 10) for i in range(36)])
    n = p.get("n_samples", 1_000_000)
    window = tuple(p.get("window", [1.0, 6.0]))
    obs = Observable(GroupElement.identity(), r0)
    curve = correlation_curve(obs, obs, times, n, seed=cfg.seed)
    files = {"correlation.csv": _write_csv(
        os.path.join(out, "correlation.csv"), ["t", "value", "stderr"],
        zip(curve.times, curve.values, curve.stderrs))}
    fit = fit_exponential(curve, window)
    files["fit.csv"] = _write_csv(
        os.path.join(out, "fit.csv"),
        ["nu", "beta_hat", "beta_lo", "beta_hi", "C_hat", "R2"],
        [(0.0, fit.beta, fit.ci[0], fit.ci[1], fit.C, fit.r2)])
    return files


_CAT = np.array([[2, 1], [1, 1]])
_SHEAR_SHAPE = [((1, 0), (1.0, 1.0), "sin")]


def _run_spectrum(cfg, out):
    p = cfg.params
    mode = p.get("mode", "gap")
    nu_list = p.get("nu_list", [1e-2])
    N = p.get("n_modes", 16)
    files = {}
    if mode == "shear":
        rows = []
        for nu in nu_list:
            total, enh = shear_sector_gaps(nu, N)
            rows.append((nu, total, enh, N))
        files["gaps.csv"] = _write_csv(
            os.path.join(out, "gaps.csv"),
            ["nu", "gap", "enhancement", "N"], rows)
        return files
    if mode == "diffusion":
        # exactly solvable control: every mode decays at 4 pi^2 nu |k|^2, so
        # the slowest L2 norm curve is the plain exponential at the gap
        times = np.asarray(p.get("times", [2.0 * i for i in range(61)]))
        rows = []
        for nu in nu_list:
            gen = build_advection_diffusion_generator([], nu, N)
            gap = spectrum_and_gap(gen).gap
            rows.append((nu, gap, N, True))
            name = "curve_nu%s.csv" % ("%g" % nu)
            vals = np.exp(-gap * times)
            files[name] = _write_csv(os.path.join(out, name),
                                     ["t", "value", "stderr"],
                                     zip(times, vals, np.zeros_like(times)))
        files["gaps.csv"] = _write_csv(os.path.join(out, "gaps.csv"),
                                       ["nu", "gap", "N", "converged"], rows)
        return files
    eps = p.get("eps", 0.004)
    tmap = TorusMap(_CAT, eps, _SHEAR_SHAPE if eps > 0 else [])
    if mode == "resonance":
        nus = sorted(nu_list, reverse=True)
        rep = resonance_convergence(tmap, nus,
                                    region_r0=p.get("region_r0", 0.08), N=N)
        rows = zip(nus, rep["counts"],
                   [0.0] + list(rep["max_displacement_per_step"]))
        files["resonances.csv"] = _write_csv(
            os.path.join(out, "resonances.csv"),
            ["nu", "count", "max_displacement"], rows)
        files["resonance_summary.csv"] = _write_csv(
            os.path.join(out, "resonance_summary.csv"),
            ["region_r0", "boundary_events", "truncation_displacement",
             "truncation_stable"],
            [(rep["region_r0"], len(rep["boundary_events"]),
              rep.get("truncation_displacement", 0.0),
              rep.get("truncation_stable", True))])
        return files
    rows = gap_sweep(tmap, nu_list, N)
    for nu in nu_list:
        res = spectrum_and_gap(build_transfer_operator(tmap, nu, N))
        ev = res.eigenvalues
        name = "spectrum_nu%s.csv" % ("%g" % nu)
        with np.errstate(divide="ignore"):
            rates = -np.log(np.abs(ev))
        files[name] = _write_csv(os.path.join(out, name),
                                 ["re", "im", "decay_rate"],
                                 zip(ev.real, ev.imag, rates))
    files["gaps.csv"] = _write_csv(
        os.path.join(out, "gaps.csv"), ["nu", "gap", "N", "converged"],
        [(r["nu"], r["gap"], r["N"], r["converged"]) for r in rows])
    return files


def _contour_case(case, nu, N, seed):
    if case == "diag2":
        return np.diag([1.0, 2.0]), np.zeros((2, 2))
    if case == "random8":
        rng = np.random.Generator(np.random.Philox(seed))
        B = rng.normal(size=(8, 8))
        M = B @ B.T / 8 + 0.5 * np.eye(8)
        v = np.ones(8) / np.sqrt(8)
        P = np.eye(8) - np.outer(v, v)
        return P @ M @ P, np.outer(v, v)
    if case == "advection":
        gen = build_advection_diffusion_generator(
            [((0, 1), (1.0, 0.0), "sin")], nu, N)
        return gen, None
    raise ConfigError("contour.case: unknown case %r" % case)


def _run_contour(cfg, out):
    p = cfg.params
    cases = p.get("cases", ["diag2"])
    nu = p.get("nu", 0.05)
    t = p.get("t", 1.0)
    beta = p.get("beta", 0.25)
    N = p.get("n_modes", 16)
    tol = p.get("tol", 1e-8)
    files, rows = {}, []
    for case in cases:
        M, proj = _contour_case(case, nu, N, cfg.seed)
        dev, diag = semigroup_contour_check(M, t, Contour(beta, nu),
                                            ContourQuadrature(tol=tol),
                                            projector=proj)
        lam = diag["sample_lambdas"]
        name = "contour_nodes_%s.csv" % case
        files[name] = _write_csv(
            os.path.join(out, name),
            ["lambda_re", "lambda_im", "resolvent_norm"],
            zip(np.real(lam), np.imag(lam), diag["resolvent_norms"]))
        rows.append((case, t, beta, nu, dev, diag["nodes"],
                     diag["refinements"]))
    files["summary.csv"] = _write_csv(
        os.path.join(out, "summary.csv"),
        ["case", "t", "beta", "nu", "deviation", "nodes", "refinements"],
        rows)
    return files


def _run_lyapunov(cfg, out):
    p = cfg.params
    systems = p.get("systems", ["bolza-flow", "cat-map"])
    n_samples = p.get("n_samples", 6)
    eps = p.get("eps", 0.0)
    rows = []
    for sysname in systems:
        if sysname == "bolza-flow":
            T = p.get("horizon", 50.0)
            est = lyapunov_estimate("bolza-flow", T, n_samples, seed=cfg.seed)
        elif sysname in ("cat-map", "perturbed-cat-map"):
            T = p.get("horizon", 3000.0)
            e = eps if sysname == "perturbed-cat-map" else 0.0
            tmap = TorusMap(_CAT, e, _SHEAR_SHAPE if e > 0 else [])
            est = lyapunov_estimate(tmap, T, n_samples, seed=cfg.seed)
        else:
            raise ConfigError("lyapunov.systems: unknown system %r" % sysname)
        rows.append((sysname, est.gamma0, est.mean, est.ci[0], est.ci[1],
                     est.T, est.n_samples))
    return {"lyapunov.csv": _write_csv(
        os.path.join(out, "lyapunov.csv"),
        ["system", "gamma0", "mean", "ci_lo", "ci_hi", "T", "n_samples"],
        rows)}


_RUNNERS = {"mix": _run_mix, "decay": _run_decay, "correlate": _run_correlate,
            "spectrum": _run_spectrum, "contour": _run_contour,
            "lyapunov": _run_lyapunov}


def run_experiment(cfg):
    """Execute one configured experiment; returns its RunManifest."""
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError("output directory %r is not writable" % out)
    start = time.time()
    files = _RUNNERS[cfg.kind](cfg, out)
    manifest = RunManifest(
        {"kind": cfg.kind, "seed": cfg.seed, "workers": cfg.workers,
         "params": {k: v for k, v in sorted(cfg.params.items())}},
        __version__, round(time.time() - start, 3), files)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        fh.write(manifest.to_json() + "\n")
    return manifest
