"""Command-line experiment runner.

Each subcommand reads a TOML configuration and writes ``<subcommand>.csv``
to the output directory.  Floats are written with ``repr`` (shortest
round-trip form), so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    correlation_matrices,
    fourier_dictionary,
    jakes_correlation,
    los_em,
    los_raytracing,
    mean_gram,
    write_complex_csv,
)
from .config import ExperimentConfig, load_config
from .geometry import ConfigError, sample_points, wavenumber_grid
from .greens import amplitude_db, greens_amplitudes
from .metrics import (
    THREADS_ENV,
    capacity_sweep,
    dbw_to_watts,
    dof_composite,
    dof_los,
    dof_nlos,
    dof_spectrum,
    eigen_spectrum_normalized,
    knee_index,
)
from .numerics import DomainError
from .scattering import (
    acf_closed_form_profile,
    acf_quadrature,
    psd_closed_form_profile,
    psd_from_psf,
    spectral_stats,
)
from .wdm import wdm_los

log = logging.getLogger("hololine")

DB_FLOOR = 1e-30  # -300 dB; keeps round-off negatives printable


def _db(x) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(np.asarray(x, dtype=float), DB_FLOOR))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _spectral_scenarios(cfg: ExperimentConfig):
    """Scenarios that carry a scattering profile, with their profiles."""
    for s in cfg.scenarios:
        if s.receive is not None:
            tx, rx = s.profiles()
            yield s.name, tx, rx


def cmd_los_spectrum(cfg: ExperimentConfig):
    geom = cfg.geometry
    spectra = {}
    for name, build in (("raytrace", los_raytracing), ("em", los_em)):
        spectra[name] = eigen_spectrum_normalized(build(geom).gram())
    w = wdm_los(geom, cfg.wdm)
    h = w.entries
    spectra["wdm"] = eigen_spectrum_normalized(h @ h.conj().T)
    log.info("analytic LoS DoF: %d", dof_los(geom))
    for name, e in spectra.items():
        log.info("%s: -3 dB knee at %d modes, DoF(eps=%g) = %d",
                 name, knee_index(e), cfg.metrics.epsilon,
                 dof_spectrum(np.clip(e, 0, None), cfg.metrics.epsilon))
    log.info("wdm quadrature: %d panels, relative change on doubling %.3g", w.panel_count, w.rel_change)
    header = ["index", "raytrace_db", "em_db", "wdm_db"]
    n = len(spectra["em"])
    rows = []
    for i in range(n):
        wv = _db(spectra["wdm"][i]) if i < len(spectra["wdm"]) else None
        rows.append([i + 1, _db(spectra["raytrace"][i]), _db(spectra["em"][i]), wv])
    return header, rows


def cmd_corr_spectrum(cfg: ExperimentConfig):
    geom = cfg.geometry
    grid = wavenumber_grid(geom)
    dic = fourier_dictionary(geom, grid)
    _, xr = sample_points(geom)
    cols = {"jakes": eigen_spectrum_normalized(jakes_correlation(xr, geom.k))}
    for name, tx, rx in _spectral_scenarios(cfg):
        stats = spectral_stats(grid, tx, rx)
        cols[name] = eigen_spectrum_normalized(correlation_matrices(geom, grid, stats, dic).R_r)
        rep = dof_nlos(stats, cfg.metrics.epsilon, isotropic=rx.is_isotropic)
        log.info("%s: NLoS DoF = %d (%s)", name, rep.value, rep.kind)
    header = ["index"] + [f"{c}_db" for c in cols]
    rows = [[i + 1] + [_db(v[i]) for v in cols.values()] for i in range(geom.N_r)]
    return header, rows


def cmd_variance_spectrum(cfg: ExperimentConfig):
    grid = wavenumber_grid(cfg.geometry)
    cols = {}
    for name, tx, rx in _spectral_scenarios(cfg):
        s2 = spectral_stats(grid, tx, rx).sigma2_r
        cols[name] = s2
        log.info("%s: peak at q_x = %d", name, int(grid.E_r[np.argmax(s2)]))
    header = ["q_x"]
    for c in cols:
        header += [f"{c}_sigma2", f"{c}_norm_db"]
    rows = []
    for i, q in enumerate(grid.E_r):
        row = [int(q)]
        for v in cols.values():
            row += [v[i], _db(v[i] / v.max())]
        rows.append(row)
    return header, rows


def cmd_acf(cfg: ExperimentConfig):
    k = cfg.geometry.k
    kr = np.linspace(0.0, cfg.acf.kr_max, cfg.acf.points)
    r = kr / k
    header = ["kr"]
    cols = []
    for name, _, rx in _spectral_scenarios(cfg):
        closed = np.asarray(acf_closed_form_profile(rx, k, r))
        quad = acf_quadrature(rx, k, r)
        if not quad.converged:
            log.warning("%s: ACF quadrature not converged (change %.3g)", name, quad.error)
        header += [f"{name}_closed_re", f"{name}_closed_im", f"{name}_quad_re", f"{name}_quad_im"]
        cols.append((closed, np.asarray(quad.value)))
    rows = []
    for i, x in enumerate(kr):
        row = [x]
        for closed, quad in cols:
            row += [closed[i].real, closed[i].imag, quad[i].real, quad[i].imag]
        rows.append(row)
    return header, rows


def cmd_psd(cfg: ExperimentConfig):
    k = cfg.geometry.k
    u = np.linspace(-cfg.psd.kx_max, cfg.psd.kx_max, cfg.psd.points)
    header = ["kx_over_k"]
    cols = []
    for name, _, rx in _spectral_scenarios(cfg):
        header += [f"{name}_closed", f"{name}_from_psf"]
        cols.append((psd_closed_form_profile(rx, k, u * k), psd_from_psf(rx, k, u * k)))
    rows = []
    for i, x in enumerate(u):
        row = [x]
        for a, b in cols:
            row += [a[i], b[i]]
        rows.append(row)
    return header, rows


_CAP_HEADER = ["scenario", "model", "spacing_wavelengths", "N", "power_dbw",
               "mean_bits", "std_error", "trials", "failures", "seed"]


def _capacity_rows(cfg: ExperimentConfig, spacing_major: bool):
    m = cfg.metrics
    noise = float(dbw_to_watts(m.noise_dbw))
    powers = dbw_to_watts(m.power_dbw)
    results = {}
    for s in cfg.scenarios:
        for sp in m.spacings:
            lam = cfg.geometry.wavelength
            geom = cfg.geometry.with_spacing(sp * lam)
            spec = s.ensemble(geom, cfg.los, cfg.nlos_gain)
            reps = capacity_sweep(spec, powers, noise, m.trials, m.master_seed)
            for pdb, rep in zip(m.power_dbw, reps):
                results[(s.name, sp, pdb)] = (s.model, geom.N_s, rep)
                log.info("%s spacing=%g lambda P=%g dBW: %.2f +- %.2f bits",
                         s.name, sp, pdb, rep.mean_bits, rep.std_error)
    rows = []
    for s in cfg.scenarios:
        if spacing_major:
            keys = [(s.name, sp, pdb) for pdb in m.power_dbw for sp in m.spacings]
        else:
            keys = [(s.name, sp, pdb) for sp in m.spacings for pdb in m.power_dbw]
        for key in keys:
            model, n, rep = results[key]
            name, sp, pdb = key
            rows.append([name, model, sp, n, pdb, rep.mean_bits, rep.std_error,
                         rep.trials, rep.failures, rep.seed])
    return _CAP_HEADER, rows


def cmd_capacity_vs_power(cfg):
    return _capacity_rows(cfg, spacing_major=False)


def cmd_capacity_vs_spacing(cfg):
    return _capacity_rows(cfg, spacing_major=True)


def cmd_composite_spectrum(cfg: ExperimentConfig):
    geom = cfg.geometry
    grid = wavenumber_grid(geom)
    dic = fourier_dictionary(geom, grid)
    h_los = (los_em if cfg.los == "em" else los_raytracing)(geom)
    los_gram = h_los.gram()
    cols = {"los": eigen_spectrum_normalized(0.5 * (los_gram + los_gram.conj().T))}
    log.info("los: DoF(eps=%g) = %d", cfg.metrics.epsilon, dof_composite(los_gram, cfg.metrics.epsilon))
    for name, tx, rx in _spectral_scenarios(cfg):
        corr = correlation_matrices(geom, grid, spectral_stats(grid, tx, rx), dic)
        G = mean_gram(h_los, corr, cfg.nlos_gain)
        cols[name] = eigen_spectrum_normalized(G)
        log.info("%s: composite DoF(eps=%g) = %d", name, cfg.metrics.epsilon,
                 dof_composite(G, cfg.metrics.epsilon))
    header = ["index"] + [f"{c}_db" for c in cols]
    rows = [[i + 1] + [_db(v[i]) for v in cols.values()] for i in range(geom.N_r)]
    return header, rows


def cmd_greens_compare(cfg: ExperimentConfig):
    lam = cfg.geometry.wavelength
    k = cfg.geometry.k
    s = np.linspace(-cfg.greens.s_max_wavelengths * lam, cfg.greens.s_max_wavelengths * lam,
                    cfg.greens.points)
    header = ["d", "s_x", "abs_vec", "abs_sca", "abs_par", "db_vec", "db_sca", "db_par"]
    rows = []
    for d in cfg.greens.distances:
        g = greens_amplitudes(s, d, k)
        mags = [np.abs(x) for x in g]
        dbs = [amplitude_db(x) for x in g]
        for i in range(len(s)):
            rows.append([d, s[i]] + [m[i] for m in mags] + [x[i] for x in dbs])
    return header, rows


COMMANDS = {
    "los-spectrum": (cmd_los_spectrum, "LoS Gram eigenvalues: ray tracing, EM and WDM"),
    "corr-spectrum": (cmd_corr_spectrum, "receive correlation eigenvalues per scenario and Jakes"),
    "variance-spectrum": (cmd_variance_spectrum, "per-index variance spectra"),
    "acf": (cmd_acf, "spatial autocorrelation, closed form and quadrature"),
    "psd": (cmd_psd, "wavenumber PSD, closed form and angular substitution"),
    "capacity-vs-power": (cmd_capacity_vs_power, "ergodic capacity over the power grid"),
    "capacity-vs-spacing": (cmd_capacity_vs_spacing, "ergodic capacity over element spacings"),
    "composite-spectrum": (cmd_composite_spectrum, "mean Gram eigenvalues, LoS and LoS+NLoS"),
    "wdm-los": (None, "WDM LoS matrix (complex CSV)"),
    "greens-compare": (cmd_greens_compare, "vector, scalar and paraxial Green's amplitudes"),
}


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def run(subcommand: str, cfg: ExperimentConfig) -> Path:
    """Run one subcommand and return the path of the CSV it wrote.

    The file is written to a temporary name and renamed on success, so a
    failed run leaves nothing behind.
    """
    if subcommand not in COMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{subcommand}.csv"
    tmp = out_dir / f".{subcommand}.csv.{os.getpid()}.tmp"
    try:
        if subcommand == "wdm-los":
            res = wdm_los(cfg.geometry, cfg.wdm)
            log.info("wdm: N=%d, %d panels, relative change on doubling %.3g%s",
                     cfg.wdm.N, res.panel_count, res.rel_change,
                     "" if res.converged else " (NOT converged)")
            write_complex_csv(tmp, res.entries)
        else:
            header, rows = COMMANDS[subcommand][0](cfg)
            _write_rows(tmp, header, rows)
        os.replace(tmp, target)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    return target


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hololine",
        description="Holographic-line MIMO channel experiments; writes CSV data.",
        epilog=f"Set {THREADS_ENV}=<n> to run Monte Carlo trials on n threads "
               "(results do not depend on it).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", "-c", type=Path, help="TOML configuration (defaults built in)")
        p.add_argument("--out", "-o", type=Path, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (overrides the config)")
        p.add_argument("--quiet", "-q", action="store_true", help="only report errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = cfg.with_overrides(seed=args.seed, trials=args.trials, output_dir=args.out)
        path = run(args.command, cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError, OSError) as exc:
        print(f"error: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
