"""Command-line interface: pattern, plan, fit and verify.

All inputs come from JSON config files and CSV observation files; outputs
are CSV/JSON documents plus an optional self-contained SVG bar chart.  For
a fixed config and seed every output is byte-identical across runs.  Exit
codes: 0 success, 1 invalid input, 2 one or more feasibility flags failed
or a fit did not converge (the report is still written), 3 internal
numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from .constants import EV
from . import diffraction, feasibility, fitting, verify as verify_mod
from .potentials import (
    AtomSpecies,
    CatalogError,
    LaserGrating,
    PotentialModel,
    _parse_species,
    build_potential,
    bundled_catalog,
    lightshift_depth,
    load_catalog,
    quadrupole_scales,
)

__all__ = ["main", "RunConfig"]


class ConfigError(ValueError):
    """Bad scenario config; the message names the offending key."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str                      # pattern | plan | fit | verify
    config_path: str | None = None
    out_path: str | None = None
    tolerance: float | None = None
    plot: bool = False
    seed: int = 0


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def _need(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing key '{key}'")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{where}: key '{key}' has wrong type")
    return value


def _resolve_atom(doc: dict, where: str) -> AtomSpecies:
    selector = _need(doc, "atom", (str, dict), where)
    if isinstance(selector, dict):
        try:
            return _parse_species({"name": "inline", **selector}, f"{where}: key 'atom'")
        except CatalogError as exc:
            raise ConfigError(str(exc)) from exc
    catalog_path = doc.get("catalog")
    try:
        catalog = load_catalog(catalog_path) if catalog_path else bundled_catalog()
    except (OSError, CatalogError) as exc:
        raise ConfigError(f"{where}: key 'catalog': {exc}") from exc
    if selector not in catalog:
        raise ConfigError(
            f"{where}: key 'atom': unknown species '{selector}' "
            f"(catalog has: {', '.join(sorted(catalog))})"
        )
    return catalog[selector]


def _pattern_model(doc: dict, where: str) -> tuple[PotentialModel, float]:
    tau = float(_need(doc, "tau_s", (int, float), where))
    if not tau > 0:
        raise ConfigError(f"{where}: key 'tau_s' must be > 0")
    wavelength = float(_need(doc, "wavelength_m", (int, float), where))
    if not wavelength > 0:
        raise ConfigError(f"{where}: key 'wavelength_m' must be > 0")
    k_l = 2.0 * math.pi / wavelength
    direct = "U0_eV" in doc
    physical = "atom" in doc
    if direct == physical:
        raise ConfigError(
            f"{where}: give exactly one of key 'U0_eV' (with optional "
            f"'UA_eV'/'UC_eV') or key 'atom' (with 'intensity_W_m2')"
        )
    if direct:
        u0 = float(_need(doc, "U0_eV", (int, float), where)) * EV
        ua = float(doc.get("UA_eV", 0.0)) * EV
        uc = float(doc.get("UC_eV", 0.0)) * EV
    else:
        atom = _resolve_atom(doc, where)
        laser = LaserGrating(
            wavelength=wavelength,
            intensity=float(_need(doc, "intensity_W_m2", (int, float), where)),
            pulse_duration=tau,
            spot_radius=float(doc.get("spot_radius_m", 1e-6)),
        )
        u0 = lightshift_depth(atom, laser)
        ua, uc = quadrupole_scales(atom, laser)
    return build_potential(u0, ua, uc, k_l), tau


def _pattern_svg(pattern: diffraction.DiffractionPattern) -> str:
    """Self-contained SVG bar chart of intensity against order."""
    orders = [int(q) for q in pattern.orders]
    intensities = [float(v) for v in pattern.intensities]
    width, height, margin = 640, 360, 46
    top = max(intensities) if intensities else 1.0
    top = top if top > 0 else 1.0
    n = len(orders)
    slot = (width - 2 * margin) / max(n, 1)
    bar = max(slot * 0.6, 1.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 10}" text-anchor="middle" '
        f'font-size="13">diffraction order (units of the grating wavevector)</text>',
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 14 {height // 2})">intensity</text>',
    ]
    for i, (q, v) in enumerate(zip(orders, intensities)):
        h = (height - 2 * margin) * v / top
        x = margin + slot * i + (slot - bar) / 2
        y = height - margin - h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar:.2f}" height="{h:.2f}" '
            f'fill="#33658a"/>'
        )
        if v >= 0.01 * top and n <= 40:
            parts.append(
                f'<text x="{x + bar / 2:.2f}" y="{height - margin + 14}" '
                f'text-anchor="middle" font-size="10">{q}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_pattern(run: RunConfig) -> int:
    doc = _load_config(run.config_path)
    model, tau = _pattern_model(doc, run.config_path)
    tolerance = run.tolerance if run.tolerance is not None else 1e-10
    phases = diffraction.phases_from_potential(model, tau)
    pattern = diffraction.quadrupole_pattern(phases, tolerance)
    if run.out_path.endswith(".json"):
        _write(
            run.out_path,
            json.dumps(diffraction.pattern_to_dict(pattern), indent=2, sort_keys=True)
            + "\n",
        )
    else:
        _write(run.out_path, diffraction.intensities_csv(pattern))
    if run.plot:
        _write(os.path.splitext(run.out_path)[0] + ".svg", _pattern_svg(pattern))
    print(
        f"pattern: {len(pattern.orders)} orders up to |q| = "
        f"{pattern.truncation_order}, truncation residual "
        f"{pattern.truncation_residual:.3e} (tolerance {tolerance:.0e})"
    )
    print(f"wrote {run.out_path}")
    return 0


def cmd_plan(run: RunConfig) -> int:
    doc = _load_config(run.config_path)
    where = run.config_path
    atom = _resolve_atom(doc, where)
    wavelength = float(_need(doc, "wavelength_m", (int, float), where))
    pulse = float(_need(doc, "pulse_duration_s", (int, float), where))
    spot = float(_need(doc, "spot_radius_m", (int, float), where))
    has_intensity = "intensity_W_m2" in doc
    has_target = "U_target_eV" in doc
    if has_intensity == has_target:
        raise ConfigError(
            f"{where}: give exactly one of key 'intensity_W_m2' or key 'U_target_eV'"
        )
    if has_target:
        u_target = float(doc["U_target_eV"]) * EV
        intensity = (
            feasibility.required_intensity(atom, u_target) if u_target > 0 else 0.0
        )
        laser = LaserGrating(wavelength, intensity, pulse, spot)
    else:
        laser = LaserGrating(wavelength, float(doc["intensity_W_m2"]), pulse, spot)
        u_target = atom.alpha * laser.E0_squared  # rule-of-thumb depth
    report = feasibility.plan_experiment(
        atom,
        laser,
        u_target,
        volume=float(doc.get("volume_m3", feasibility.DEFAULT_INTERACTION_VOLUME)),
        min_photons=float(doc.get("min_photons", feasibility.DEFAULT_MIN_PHOTONS)),
    )
    payload = dataclasses.asdict(report)
    payload["atom"] = atom.name
    payload["intensity_W_m2"] = laser.intensity
    payload["U_target_eV"] = u_target / EV
    if run.out_path:
        _write(run.out_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    rows = [
        ("recoil energy", f"{report.recoil_energy:.6e} eV"),
        ("depth/recoil ratio", f"{report.regime_ratio:.4f}"),
        ("required intensity", f"{report.required_intensity:.6e} W/m^2"),
        ("planned intensity", f"{laser.intensity:.6e} W/m^2"),
        ("interaction time", f"{report.interaction_time:.6e} s"),
        ("photon energy", f"{report.photon_energy:.6e} eV"),
        ("ionization rate", f"{report.ionization_rate:.6e} 1/s"),
        ("Gamma*tau", f"{report.gamma_tau:.6e}"),
        ("survival fraction", f"{report.survival_fraction:.6f}"),
        ("photon density", f"{report.photon_density:.6e} 1/m^3"),
        ("photons in volume", f"{report.photons_in_volume:.6e}"),
        ("atom velocity needed", f"{report.atom_velocity_needed:.6e} m/s"),
    ]
    for label, value in rows:
        print(f"{label:<22s} {value}")
    for name, ok in dataclasses.asdict(report.flags).items():
        print(f"flag {name:<28s} {'PASS' if ok else 'FAIL'}")
    for note in report.notes:
        print(f"note: {note}")
    if run.out_path:
        print(f"wrote {run.out_path}")
    return 0 if report.flags.all_pass() else 2


def cmd_fit(run: RunConfig) -> int:
    doc = _load_config(run.config_path)
    where = run.config_path
    csv_path = _need(doc, "observations_csv", str, where)
    if not os.path.exists(csv_path):
        raise ConfigError(f"{where}: key 'observations_csv': no such file {csv_path}")
    observed = fitting.ObservedPattern.from_csv(csv_path)
    model = _need(doc, "model", str, where)
    if model == "dipole":
        result = fitting.fit_dipole(observed, float(doc.get("theta0_init", 0.5)))
    elif model == "quadrupole":
        init = doc.get("init", {})
        if not isinstance(init, dict):
            raise ConfigError(f"{where}: key 'init' must be an object")
        theta_a2 = float(init.get("thetaA2", 0.0))
        result = fitting.fit_quadrupole(
            observed,
            diffraction.PhaseSet(
                theta0=float(init.get("theta0", 0.5)),
                thetaA2=theta_a2,
                thetaA4=0.5 * theta_a2,
                thetaC4=float(init.get("thetaC4", 0.0)),
            ),
        )
    else:
        raise ConfigError(f"{where}: key 'model' must be 'dipole' or 'quadrupole'")

    payload = dataclasses.asdict(result)
    if "laser" in doc:
        laser_doc = doc["laser"]
        if not isinstance(laser_doc, dict):
            raise ConfigError(f"{where}: key 'laser' must be an object")
        laser = LaserGrating(
            wavelength=float(_need(laser_doc, "wavelength_m", (int, float), f"{where}: key 'laser'")),
            intensity=float(_need(laser_doc, "intensity_W_m2", (int, float), f"{where}: key 'laser'")),
            pulse_duration=float(_need(laser_doc, "tau_s", (int, float), f"{where}: key 'laser'")),
            spot_radius=float(laser_doc.get("spot_radius_m", 1e-6)),
        )
        estimate = fitting.polarizability_estimates(result, laser, laser.pulse_duration)
        payload["polarizabilities"] = dataclasses.asdict(estimate)
    _write(run.out_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    print(
        f"fit ({model}): theta0 = {result.theta0_hat:.8f}, "
        f"thetaA2 = {result.thetaA2_hat:.8f}, thetaC4 = {result.thetaC4_hat:.8f}"
    )
    print(
        f"residual {result.residual:.6e} after {result.iterations} iterations; "
        f"converged: {result.converged}"
    )
    print(result.covariance_note)
    print(f"wrote {run.out_path}")
    return 0 if result.converged else 2


def cmd_verify(run: RunConfig) -> int:
    tolerance = run.tolerance if run.tolerance is not None else 1e-10
    checks = verify_mod.run_checks(seed=run.seed, tolerance=tolerance)
    text = verify_mod.format_report(checks, run.seed)
    sys.stdout.write(text)
    if run.out_path:
        _write(run.out_path, text)
    return 0 if all(c.passed for c in checks) else 3


class _Parser(argparse.ArgumentParser):
    # invalid command-line input exits 1 (2 is reserved for failed flags)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="xkd",
        description=(
            "Standing-wave atom diffraction: pattern computation, "
            "feasibility planning, intensity fitting and self-verification."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pattern = sub.add_parser(
        "pattern", help="compute per-order diffraction intensities"
    )
    p_pattern.add_argument("--config", required=True, help="scenario JSON")
    p_pattern.add_argument("--out", required=True, help="output CSV (or .json)")
    p_pattern.add_argument("--tolerance", type=float, default=None)
    p_pattern.add_argument("--plot", action="store_true", help="also write an SVG chart")

    p_plan = sub.add_parser("plan", help="evaluate the feasibility envelope")
    p_plan.add_argument("--config", required=True, help="scenario JSON")
    p_plan.add_argument("--out", default=None, help="report JSON")

    p_fit = sub.add_parser("fit", help="fit phases to observed intensities")
    p_fit.add_argument("--config", required=True, help="fit JSON")
    p_fit.add_argument("--out", required=True, help="fit report JSON")

    p_verify = sub.add_parser("verify", help="run the seeded self-check suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None, help="report text file")
    p_verify.add_argument("--tolerance", type=float, default=None)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    run = RunConfig(
        command=args.command,
        config_path=getattr(args, "config", None),
        out_path=getattr(args, "out", None),
        tolerance=getattr(args, "tolerance", None),
        plot=getattr(args, "plot", False),
        seed=getattr(args, "seed", 0),
    )
    if run.config_path is not None and not os.path.exists(run.config_path):
        print(f"xkd: no such config file: {run.config_path}", file=sys.stderr)
        return 1
    if run.tolerance is not None and not (0.0 < run.tolerance <= 1e-3):
        print("xkd: --tolerance must be in (0, 1e-3]", file=sys.stderr)
        return 1
    handler = {
        "pattern": cmd_pattern,
        "plan": cmd_plan,
        "fit": cmd_fit,
        "verify": cmd_verify,
    }[run.command]
    try:
        return handler(run)
    except (ConfigError, CatalogError, ValueError, OSError) as exc:
        print(f"xkd: {exc}", file=sys.stderr)
        return 1
    except (diffraction.TruncationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"xkd: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
