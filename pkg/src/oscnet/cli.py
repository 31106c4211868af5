"""Batch front-end: JSON experiment configs -> reproducible CSV artifacts.

A config is a single JSON document with sections ``network``,
``protocol``, ``decoherence`` (optional), ``noise`` (optional),
``state`` plus top-level ``shots``, ``seed`` and ``out``.  Unknown keys
are rejected.  ``shots = 0`` is the exact-mode sentinel: sampling is
bypassed and the analytic pipeline values are written.  The same config
and seed reproduce byte-identical CSV output regardless of worker
count, because every point owns a generator seeded by (seed, index) and
rows are written in point order.

Subcommands: diagonalize, synthesize, simulate, reconstruct,
noise-scan, validate.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import ChiSample, bochner_check, estimate_temperature, fit_moments
from .chain import ChainSpec, chain_decomposition
from .decoherence import (
    DecoherenceSpec,
    brute_force_lindblad,
    correct_signal,
    damping_factor,
    eta_from_profile,
    measured_signal,
    validity_horizon,
)
from .dynamics import (
    brute_force_evolve,
    chi_fock,
    chi_gaussian,
    coherent_state,
    fock_cat,
    fock_coherent,
    ideal_measurement,
    point_seed,
    sample_shots,
    squeezed_state,
    thermal_state,
    two_mode_squeezed_state,
    vacuum_state,
)
from .errors import ConfigError, OscnetError
from .network import NetworkSpec, check_assumptions, diagonalize, local_normal_convert, verify_symplectic
from .noise import delta_beta_covariance, monte_carlo_delta_beta, resolution_spectrum
from .protocol import build_M, evaluate_g, min_interaction_time, synthesize_profile

RECORD_COLUMNS = [
    "basis",
    "shots",
    "est_s1",
    "est_s2",
    "stderr",
    "f",
    "chi_re",
    "chi_im",
    "chi_err",
    "status",
]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _require_keys(section: dict, allowed: set, name: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    """Validated experiment description (see module docstring)."""

    network: dict
    protocol: dict
    state: dict
    shots: int
    seed: Optional[int]
    out: str
    decoherence: Optional[dict] = None
    noise: Optional[dict] = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        allowed = {"network", "protocol", "decoherence", "noise", "state", "shots", "seed", "out"}
        _require_keys(doc, allowed, "config")
        for req in ("network", "protocol", "state"):
            if req not in doc:
                raise ConfigError(f"missing config section {req!r}")
        _require_keys(doc["network"], {"chain", "N", "omega", "J", "K", "a1_index"}, "network")
        _require_keys(
            doc["protocol"],
            {"t", "basis", "points", "grid", "export_profiles", "samples_per_period", "det_sweep"},
            "protocol",
        )
        _require_keys(doc["state"], {"name", "basis", "alpha", "nbar", "T", "r", "phi"}, "state")
        if "decoherence" in doc and doc["decoherence"] is not None:
            _require_keys(
                doc["decoherence"],
                {"kappa", "T", "nbar", "Gamma1", "Gamma2", "Nq", "damping_sweep", "time_sweep"},
                "decoherence",
            )
        if "noise" in doc and doc["noise"] is not None:
            _require_keys(
                doc["noise"],
                {"epsilon", "realizations", "dt", "resolution_sweep"},
                "noise",
            )
        shots = int(doc.get("shots", 0))
        if shots < 0:
            raise ConfigError("shots must be >= 0 (0 means exact mode)")
        seed = doc.get("seed")
        noise = doc.get("noise")
        needs_seed = shots > 0 or (noise is not None and noise.get("realizations", 0))
        if needs_seed and seed is None:
            raise ConfigError("a seed is required whenever shots or noise realizations are requested")
        return cls(
            network=doc["network"],
            protocol=doc["protocol"],
            state=doc["state"],
            shots=shots,
            seed=None if seed is None else int(seed),
            out=doc.get("out", "."),
            decoherence=doc.get("decoherence"),
            noise=noise,
            raw=doc,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def parse_chain_arg(text: str) -> ChainSpec:
    """Parse the ``--chain N,omega,J`` shorthand."""
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("--chain expects N,omega,J")
    return ChainSpec(int(parts[0]), float(parts[1]), float(parts[2]))


def network_from_config(section: dict):
    """Return (NetworkSpec, decomposition) from the network section."""
    if "chain" in section:
        ch = section["chain"]
        _require_keys(ch, {"N", "omega", "J"}, "network.chain")
        cs = ChainSpec(int(ch["N"]), float(ch["omega"]), float(ch["J"]))
        return cs.as_network_spec(), chain_decomposition(cs)
    spec = NetworkSpec(section["omega"], section.get("J"), section.get("K"))
    if "N" in section and int(section["N"]) != spec.N:
        raise ConfigError(f"N = {section['N']} does not match len(omega) = {spec.N}")
    return spec, diagonalize(spec, a1_index=int(section.get("a1_index", 0)))


def _points_from_protocol(section: dict, n_modes: int) -> list[np.ndarray]:
    if "points" in section:
        if not section["points"]:
            raise ConfigError("protocol.points must be non-empty")
        pts = []
        for row in section["points"]:
            if len(row) != n_modes:
                raise ConfigError(f"each point needs {n_modes} [re, im] pairs")
            pts.append(np.array([complex(re, im) for re, im in row]))
        return pts
    if "grid" in section:
        g = section["grid"]
        _require_keys(g, {"mode", "radii", "angles", "include_origin"}, "protocol.grid")
        mode = int(g.get("mode", 0))
        pts = []
        if g.get("include_origin", True):
            pts.append(np.zeros(n_modes, dtype=complex))
        for r in g["radii"]:
            for m in range(int(g["angles"])):
                p = np.zeros(n_modes, dtype=complex)
                p[mode] = r * np.exp(2j * np.pi * m / int(g["angles"]))
                pts.append(p)
        return pts
    raise ConfigError("protocol needs 'points' or 'grid'")


def state_from_config(section: dict, n_modes: int):
    """Build the catalog state; returns (chi_fn, basis)."""
    name = section.get("name", "vacuum")
    basis = section.get("basis", "normal")
    if name == "vacuum":
        st = vacuum_state(n_modes)
    elif name == "coherent":
        alpha = [complex(re, im) for re, im in section["alpha"]]
        if len(alpha) != n_modes:
            raise ConfigError("coherent state needs one alpha per mode")
        st = coherent_state(alpha)
    elif name == "thermal":
        if "T" in section:
            raise ConfigError("thermal state takes per-mode 'nbar' (temperatures need nu; use nbar)")
        st = thermal_state(section["nbar"])
    elif name == "squeezed":
        if n_modes != 1:
            raise ConfigError("squeezed catalog state is single-mode")
        st = squeezed_state(float(section["r"]), float(section.get("phi", 0.0)))
    elif name == "two_mode_squeezed":
        if n_modes != 2:
            raise ConfigError("two_mode_squeezed needs exactly 2 modes")
        st = two_mode_squeezed_state(float(section["r"]))
    elif name == "cat":
        if n_modes != 1:
            raise ConfigError("cat catalog state is single-mode")
        fs = fock_cat(complex(*section["alpha"][0]), 40)
        return (lambda xi: chi_fock(fs, xi)), basis
    else:
        raise ConfigError(f"unknown state {name!r}")
    return (lambda xi: chi_gaussian(st, xi)), basis


@dataclass
class RunArtifacts:
    records_csv: Path
    manifest: Path
    extra: list[Path]
    n_failed: int = 0
    failures: tuple = ()


def run(config: ExperimentConfig, workers: int = 1) -> RunArtifacts:
    """Execute the pipeline for every requested phase-space point.

    synthesize -> damping factor -> true chi -> sample -> correct,
    one CSV row per point (ordered by point index).
    """
    started = time.time()
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)

    spec, decomp = network_from_config(config.network)
    n = decomp.N
    proto = config.protocol
    basis = proto.get("basis", "normal")
    if basis not in ("normal", "local"):
        raise ConfigError(f"unknown basis {basis!r}")
    points = _points_from_protocol(proto, n)

    t_min_guard = 2 * min_interaction_time(decomp)
    t = float(proto["t"]) if proto.get("t") else t_min_guard

    deco = None
    if config.decoherence is not None:
        deco = _deco_from_config(config.decoherence, decomp)

    chi_fn, state_basis = state_from_config(config.state, n)

    def chi_at(point: np.ndarray) -> complex:
        if state_basis == basis:
            return chi_fn(point)
        direction = "local_to_normal" if basis == "local" else "normal_to_local"
        return chi_fn(local_normal_convert(decomp, point, direction))

    export_profiles = bool(proto.get("export_profiles", False))
    extra: list[Path] = []

    def process(idx: int):
        point = points[idx]
        try:
            if deco is not None:
                eta = point if basis == "normal" else local_normal_convert(
                    decomp, point, "local_to_normal"
                )
                profile = synthesize_profile(decomp, eta, t, basis="normal", kappa=deco.kappa)
                f = damping_factor(profile, decomp, deco)
            else:
                profile = synthesize_profile(decomp, -point / 2, t, basis=basis)
                f = 0.0
            chi_true = chi_at(point)
            signal = measured_signal(chi_true, f)
            truth = ideal_measurement(signal)
            if config.shots == 0:
                corrected = complex(*truth) * np.exp(f)
                row = [basis, 0, _fmt(truth[0]), _fmt(truth[1]), _fmt(0.0), _fmt(f)]
                row += [_fmt(corrected.real), _fmt(corrected.imag), _fmt(0.0), "ok"]
            else:
                rec = sample_shots(
                    truth=truth,
                    shots=config.shots,
                    seed=point_seed(config.seed, idx),
                    point=point,
                    basis=basis,
                )
                rec = correct_signal(rec, f)
                row = [
                    basis,
                    config.shots,
                    _fmt(rec.est_s1),
                    _fmt(rec.est_s2),
                    _fmt(rec.stderr),
                    _fmt(f),
                    _fmt(rec.chi_corrected.real),
                    _fmt(rec.chi_corrected.imag),
                    _fmt(rec.chi_err),
                    "ok",
                ]
            return idx, point, row, profile
        except OscnetError as exc:
            row = [basis, config.shots] + [""] * 7 + [f"error:{type(exc).__name__}"]
            return idx, point, row, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, range(len(points))))
    else:
        results = [process(i) for i in range(len(points))]
    results.sort(key=lambda r: r[0])

    records_csv = outdir / "records.csv"
    point_cols = [f"point_{ax}_{j}" for j in range(n) for ax in ("re", "im")]
    with open(records_csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS[:1] + point_cols + RECORD_COLUMNS[1:])
        for idx, point, row, _ in results:
            coords = []
            for j in range(n):
                coords += [_fmt(point[j].real), _fmt(point[j].imag)]
            w.writerow(row[:1] + coords + row[1:])

    if export_profiles:
        density = int(proto.get("samples_per_period", 40))
        for idx, point, row, profile in results:
            if profile is None:
                continue
            path = outdir / f"profile_{idx:03d}.csv"
            nu_max = float(decomp.nu.max())
            m = int(np.ceil(profile.t * nu_max * density)) + 1
            s = np.linspace(0.0, profile.t, m)
            g = evaluate_g(profile, s)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["s", "g"])
                for si, gi in zip(s, g):
                    w.writerow([_fmt(si), _fmt(gi)])
            extra.append(path)

    if proto.get("det_sweep"):
        extra.append(_det_sweep(proto["det_sweep"], decomp, deco, outdir))
    if deco is not None and config.decoherence.get("damping_sweep"):
        extra.append(
            _damping_sweep(config.decoherence["damping_sweep"], decomp, deco, t, outdir)
        )
    if deco is not None and config.decoherence.get("time_sweep"):
        extra.append(
            _damping_time_sweep(config.decoherence["time_sweep"], decomp, deco, outdir)
        )
    if config.noise is not None and config.noise.get("resolution_sweep"):
        extra.append(
            _resolution_sweep(config.noise, decomp, outdir)
        )

    manifest = outdir / "manifest.json"
    doc = {
        "config": config.raw,
        "config_sha256": hashlib.sha256(
            json.dumps(config.raw, sort_keys=True).encode()
        ).hexdigest(),
        "seed": config.seed,
        "version": __version__,
        "wall_time_s": round(time.time() - started, 3),
        "n_points": len(points),
        "interaction_time": t,
    }
    with open(manifest, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failures = tuple(
        (idx, row[-1].removeprefix("error:")) for idx, _, row, _ in results if row[-1] != "ok"
    )
    return RunArtifacts(
        records_csv=records_csv,
        manifest=manifest,
        extra=extra,
        n_failed=len(failures),
        failures=failures,
    )


def _deco_from_config(section: dict, decomp) -> DecoherenceSpec:
    kappa = section.get("kappa", 0.0)
    if np.isscalar(kappa):
        kappa = np.full(decomp.N, float(kappa))
    common = dict(
        Gamma1=float(section.get("Gamma1", 0.0)),
        Gamma2=float(section.get("Gamma2", 0.0)),
        Nq=float(section.get("Nq", 0.0)),
    )
    if "nbar" in section:
        return DecoherenceSpec(kappa=kappa, Nbar=section["nbar"], **common)
    if "T" in section:
        return DecoherenceSpec.from_temperature(kappa, decomp.nu, float(section["T"]), **common)
    return DecoherenceSpec(kappa=kappa, Nbar=np.zeros(decomp.N), **common)


def _det_sweep(sweep: dict, decomp, deco, outdir: Path) -> Path:
    _require_keys(sweep, {"t_min", "t_max", "steps"}, "protocol.det_sweep")
    ts = np.linspace(float(sweep["t_min"]), float(sweep["t_max"]), int(sweep["steps"]))
    kappa = None if deco is None else deco.kappa
    path = outdir / "det_sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "abs_det_M", "cond_M"])
        for t in ts:
            M = build_M(decomp, float(t), kappa=kappa)
            w.writerow([_fmt(t), _fmt(abs(M.det)), _fmt(M.cond)])
    return path


def _damping_sweep(sweep: dict, decomp, deco, t: float, outdir: Path) -> Path:
    _require_keys(sweep, {"re_min", "re_max", "steps", "eta_rest"}, "decoherence.damping_sweep")
    res = np.linspace(float(sweep["re_min"]), float(sweep["re_max"]), int(sweep["steps"]))
    rest = float(sweep.get("eta_rest", 2.0))
    path = outdir / "damping_sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re_eta_1", "f", "exp_minus_f"])
        for re1 in res:
            eta = np.full(decomp.N, rest, dtype=complex)
            eta[0] = re1
            profile = synthesize_profile(decomp, eta, t, kappa=deco.kappa)
            f = damping_factor(profile, decomp, deco)
            w.writerow([_fmt(re1), _fmt(f), _fmt(np.exp(-f))])
    return path


def _damping_time_sweep(sweep: dict, decomp, deco, outdir: Path) -> Path:
    _require_keys(sweep, {"t_min", "t_max", "steps", "eta"}, "decoherence.time_sweep")
    ts = np.linspace(float(sweep["t_min"]), float(sweep["t_max"]), int(sweep["steps"]))
    eta = np.full(decomp.N, float(sweep.get("eta", 2.0)), dtype=complex)
    path = outdir / "damping_time_sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "f", "exp_minus_f"])
        for t in ts:
            profile = synthesize_profile(decomp, eta, float(t), kappa=deco.kappa)
            f = damping_factor(profile, decomp, deco)
            w.writerow([_fmt(t), _fmt(f), _fmt(np.exp(-f))])
    return path


def _resolution_sweep(noise: dict, decomp, outdir: Path) -> Path:
    sweep = noise["resolution_sweep"]
    _require_keys(sweep, {"t_min", "t_max", "steps", "log"}, "noise.resolution_sweep")
    eps = float(noise["epsilon"])
    if sweep.get("log", False):
        ts = np.geomspace(float(sweep["t_min"]), float(sweep["t_max"]), int(sweep["steps"]))
    else:
        ts = np.linspace(float(sweep["t_min"]), float(sweep["t_max"]), int(sweep["steps"]))
    path = outdir / "resolution_sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"sqrt_lambda_{k + 1}" for k in range(decomp.N)])
        for t in ts:
            lam = resolution_spectrum(delta_beta_covariance(decomp, float(t), eps))
            w.writerow([_fmt(t)] + [_fmt(x) for x in lam])
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _fail(msg: str, code: str) -> int:
    print(f"ERROR code={code} msg={msg}", file=sys.stderr)
    return 2


def _cmd_diagonalize(args) -> int:
    if args.chain:
        cs = parse_chain_arg(args.chain)
        spec, decomp = cs.as_network_spec(), chain_decomposition(cs)
    else:
        cfg = ExperimentConfig.load(args.config)
        spec, decomp = network_from_config(cfg.network)
    rep = check_assumptions(decomp)
    res = verify_symplectic(decomp)
    print("k   nu                    G")
    for k in range(decomp.N):
        print(f"{k:<3d} {decomp.nu[k]:<21.12g} {decomp.G[k].real:.12g}")
    print(f"A1 (all G_k != 0): {'pass' if rep.coupled else 'FAIL ' + str(rep.weak_g_indices)}")
    print(f"A2 (non-degenerate): {'pass' if rep.nondegenerate else 'FAIL ' + str(rep.close_pairs)}")
    print(f"min |G| = {rep.min_coupling:.3e}, min gap = {rep.min_gap:.3e}")
    print(f"symplectic residuals: {res.commutation:.3e}, {res.pairing:.3e}")
    return 0 if rep.passed else 1


def _cmd_synthesize(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.out = args.out
    try:
        artifacts = run(_with_profiles(cfg, args.samples_per_period), workers=args.workers)
    except OscnetError as exc:
        return _fail(str(exc), type(exc).__name__)
    print(f"wrote {artifacts.records_csv}")
    for p in artifacts.extra:
        print(f"wrote {p}")
    if artifacts.n_failed:
        idx, code = artifacts.failures[0]
        return _fail(f"{artifacts.n_failed} point(s) failed, first at index {idx}", code)
    return 0


def _with_profiles(cfg: ExperimentConfig, density: Optional[int]) -> ExperimentConfig:
    cfg.protocol = dict(cfg.protocol)
    cfg.protocol["export_profiles"] = True
    if density:
        cfg.protocol["samples_per_period"] = density
    return cfg


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    if args.exact:
        cfg.shots = 0
    try:
        artifacts = run(cfg, workers=args.workers)
    except OscnetError as exc:
        return _fail(str(exc), type(exc).__name__)
    print(f"wrote {artifacts.records_csv}")
    print(f"wrote {artifacts.manifest}")
    for p in artifacts.extra:
        print(f"wrote {p}")
    if artifacts.n_failed:
        idx, code = artifacts.failures[0]
        return _fail(f"{artifacts.n_failed} point(s) failed, first at index {idx}", code)
    return 0


def _records_to_samples(path) -> list[ChiSample]:
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["status"] != "ok":
                continue
            n = sum(1 for k in row if k.startswith("point_re_"))
            pt = np.array(
                [complex(float(row[f"point_re_{j}"]), float(row[f"point_im_{j}"])) for j in range(n)]
            )
            samples.append(
                ChiSample(pt, complex(float(row["chi_re"]), float(row["chi_im"])), float(row["chi_err"]))
            )
    return samples


def _write_report_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


def _cmd_reconstruct(args) -> int:
    samples = _records_to_samples(args.records)
    if not samples:
        return _fail("no usable rows in records file", "ConfigError")
    try:
        if args.mode == "moments":
            fit = fit_moments(samples, order=args.order)
            print("first moments <a_j>:")
            for j, a in enumerate(fit.first):
                print(f"  {j}: {a.real:+.9g} {a.imag:+.9g}j")
            if args.order == 2:
                print("occupation matrix <a_j^+ a_k> (real part):")
                for row in fit.number.real:
                    print("  " + " ".join(f"{x:+.9g}" for x in row))
            print(f"residual: {fit.residual:.3e} over {fit.n_used} samples")
            if args.out:
                rows = [
                    ["a_mean", j, _fmt(a.real), _fmt(a.imag)] for j, a in enumerate(fit.first)
                ]
                if args.order == 2:
                    n = fit.first.size
                    rows += [
                        ["number", f"{j},{k}", _fmt(fit.number[j, k].real), _fmt(fit.number[j, k].imag)]
                        for j in range(n)
                        for k in range(n)
                    ]
                    rows += [
                        ["pair", f"{j},{k}", _fmt(fit.pair[j, k].real), _fmt(fit.pair[j, k].imag)]
                        for j in range(n)
                        for k in range(n)
                    ]
                _write_report_csv(args.out, ["quantity", "index", "re", "im"], rows)
        elif args.mode == "temperature":
            if not args.nu:
                return _fail("temperature fit needs --nu", "ConfigError")
            nu = [float(x) for x in args.nu.split(",")]
            fit = estimate_temperature(samples, nu)
            verdict = "NOT thermal" if fit.not_thermal else "consistent with thermal"
            print(f"T_hat = {fit.T:.9g}  residual = {fit.residual:.3e}  ({verdict})")
            if args.out:
                _write_report_csv(
                    args.out,
                    ["T_hat", "residual", "threshold", "not_thermal", "n_samples"],
                    [[_fmt(fit.T), _fmt(fit.residual), _fmt(fit.threshold),
                      int(fit.not_thermal), fit.n_samples]],
                )
            return 1 if fit.not_thermal else 0
        else:
            rep = bochner_check(samples)
            print(
                f"min kernel eigenvalue = {rep.min_eigenvalue:.3e} over {rep.n_anchors} anchors "
                f"(tol {rep.tol:.1e}); chi(0) deviation {rep.chi0_deviation:.3e}"
            )
            print("physical" if rep.passed else "NON-PHYSICAL")
            if args.out:
                _write_report_csv(
                    args.out,
                    ["min_eigenvalue", "tol", "n_anchors", "chi0_deviation", "passed"],
                    [[_fmt(rep.min_eigenvalue), _fmt(rep.tol), rep.n_anchors,
                      _fmt(rep.chi0_deviation), int(rep.passed)]],
                )
            return 0 if rep.passed else 1
    except OscnetError as exc:
        return _fail(str(exc), type(exc).__name__)
    return 0


def _cmd_noise_scan(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if cfg.noise is None or "resolution_sweep" not in cfg.noise:
        return _fail("config lacks noise.resolution_sweep", "ConfigError")
    if args.out:
        cfg.out = args.out
    _, decomp = network_from_config(cfg.network)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = _resolution_sweep(cfg.noise, decomp, outdir)
    print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    """Run the oracle suites and print a pass/fail table."""
    rng = np.random.default_rng(7)
    rows = []

    def record(name, ok, detail):
        rows.append((name, ok, detail))

    # chain closed forms vs numeric diagonalization
    worst = 0.0
    for N in range(2, 11):
        cs = ChainSpec(N, 1.0, 0.2)
        dn = diagonalize(cs.as_network_spec())
        da = chain_decomposition(cs)
        worst = max(
            worst,
            float(np.abs(dn.nu - da.nu).max()),
            float(np.abs(np.abs(dn.S1) - np.abs(da.S1)).max()),
            float(np.abs(np.abs(dn.S2) - np.abs(da.S2)).max()),
            max(verify_symplectic(da)),
        )
    record("chain vs numeric", worst < 1e-10, f"max dev {worst:.2e}")

    # Schroedinger oracle, N = 1
    spec = NetworkSpec([1.0])
    d1 = diagonalize(spec)
    worst = 0.0
    cases = 6 if args.full else 3
    for _ in range(cases):
        xi = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
        alpha = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
        prof = synthesize_profile(d1, [-xi / 2], 4 * np.pi)
        s1, s2 = brute_force_evolve(fock_coherent(alpha, 25), prof, d1)
        want = chi_gaussian(coherent_state([alpha]), [xi])
        worst = max(worst, abs(complex(s1, s2) - want))
    record("Schroedinger oracle", worst < 1e-6, f"max dev {worst:.2e}")

    # Lindblad oracle, N = 1
    deco = DecoherenceSpec(kappa=[0.01], Nbar=[0.5], Gamma2=0.002)
    prof = synthesize_profile(d1, [0.8 + 0j], 6 * np.pi, kappa=deco.kappa)
    eta = eta_from_profile(prof, d1, deco)
    closed = measured_signal(chi_gaussian(vacuum_state(1), eta), damping_factor(prof, d1, deco))
    s1, s2 = brute_force_lindblad(fock_coherent(0.0, 20), prof, d1, deco)
    dev = abs(closed - complex(s1, s2))
    record("Lindblad oracle", dev < 1e-5, f"dev {dev:.2e}")

    # Monte-Carlo noise covariance, N = 2
    spec2 = NetworkSpec([1.0, 1.3], [[0, 0.1], [0.1, 0]], [[0, 0.05], [0.05, 0]])
    d2 = diagonalize(spec2)
    reals = 10000 if args.full else 2000
    mc = monte_carlo_delta_beta(d2, t=20.0, eps=1e-4, realizations=reals, seed=11)
    V = delta_beta_covariance(d2, 20.0, 1e-4)
    z = float(np.max(np.abs(mc.cov - V) / mc.cov_stderr))
    record("Monte-Carlo noise", z < 5, f"max z {z:.2f} ({reals} realizations)")

    if args.full:
        _validate_reference_chain(record)

    width = max(len(r[0]) for r in rows) + 2
    ok_all = True
    for name, ok, detail in rows:
        ok_all &= ok
        print(f"{name:<{width}} {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if ok_all else 1


def _validate_reference_chain(record):
    """Quantitative bands of the N = 8 reference chain (full mode only)."""
    from .protocol import g_max as _g_max

    cs = ChainSpec(8, 1.0, 0.2)
    d = chain_decomposition(cs)
    kap = np.full(8, 1e-6)
    deco = DecoherenceSpec.from_temperature(kap, d.nu, 200.0)
    t_protocol = 100 * 2 * np.pi

    ts = np.arange(10.0, 702.0, 4.0)
    dets = np.array([abs(build_M(d, float(t), kappa=kap).det) for t in ts])
    first = float(ts[np.argmax(dets > 0.01)])
    floor = float(dets[(ts >= 60) & (ts <= 700)].min())
    record("det M onset", 30 <= first <= 70 and floor > 0.01,
           f"first crossing t = {first:.0f}, floor {floor:.3f}")

    prof = synthesize_profile(d, -np.ones(8), t_protocol)
    gm = _g_max(prof)
    record("pulse amplitude", 0.068 <= gm <= 0.092, f"g_max = {gm:.4f}")

    prof = synthesize_profile(d, np.full(8, 2.0 + 0j), t_protocol, kappa=deco.kappa)
    att = float(np.exp(-damping_factor(prof, d, deco)))
    record("damping at boundary", 0.18 <= att <= 0.26, f"e^-f = {att:.4f}")

    dev = 0.0
    for t in (400.0, 1000.0):
        lam = resolution_spectrum(delta_beta_covariance(d, t, 1e-5))
        asym = np.sort(np.abs(d.G)) * np.sqrt(1e-5 * t)
        dev = max(dev, float(np.max(np.abs(lam - asym) / asym)))
    record("noise asymptote", dev < 0.05, f"max deviation {dev:.4f}")

    horizon = validity_horizon(deco, cs.as_network_spec()) / (2 * np.pi)
    record("validity horizon", 1e3 <= horizon <= 4e3, f"t_max = {horizon:.0f} (2 pi)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oscnet",
        description="Oscillator-network state reconstruction via a single qubit probe.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("diagonalize", help="print normal modes and assumption report")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--chain", help="chain shorthand N,omega,J")
    p.set_defaults(fn=_cmd_diagonalize)

    p = sub.add_parser("synthesize", help="synthesize pulses and export (s, g) CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--samples-per-period", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=_cmd_synthesize)

    p = sub.add_parser("simulate", help="run the full measurement pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--exact", action="store_true", help="bypass sampling (shots = 0)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="analyze a records.csv")
    p.add_argument("--records", required=True)
    p.add_argument("--mode", choices=["moments", "temperature", "bochner"], default="moments")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--nu", help="comma-separated eigenfrequencies for the temperature fit")
    p.add_argument("--out", help="also write the fit report as CSV")
    p.set_defaults(fn=_cmd_reconstruct)

    p = sub.add_parser("noise-scan", help="write the resolution sweep CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_noise_scan)

    p = sub.add_parser("validate", help="run the oracle suites")
    p.add_argument("--full", action="store_true", help="larger case counts")
    p.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        return _fail(str(exc), "ConfigError")


if __name__ == "__main__":
    raise SystemExit(main())
