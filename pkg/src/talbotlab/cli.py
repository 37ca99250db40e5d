"""Command-line front end.

Subcommands: ``carpet | synth | entangle | bell | bell-scan | constraints``.
Each takes ``--config <json>`` plus ``--set key=value`` overrides; commands
that emit files require ``--out-dir``.  All computation is deterministic:
identical configurations produce byte-identical outputs.  Exit codes:
0 success, 2 configuration or validation error, 3 numerical guard trip.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import constraints as hw
from .bell import bell_analytic, bell_field, bell_scan
from .errors import (AliasingRisk, BinMisalignment, InvalidSpec, NonNormalized,
                     NotCoprime, TalbotLabError, UnderResolved)
from .fields import (PropagationSpec, SampledField, get_profile,
                     mode_propagate, periodic_comb, sample, talbot_length)
from .io import (bell_result_to_json, write_biphoton_csv, write_matrix_csv,
                 write_pgm, write_sampled_csv, write_scan_csv)
from .spdc import (BiphotonGaussian, SlitArray, SynthesizerGeometry,
                   apply_dslit, entangled_coeffs, initial_biphoton_field,
                   maximally_entangled, render_synthesized, synthesize_single,
                   two_photon_field)

_GUARDS = (AliasingRisk, UnderResolved, BinMisalignment)

DEFAULTS = {
    "carpet": {
        "period": 1.0,
        "wavelength": 0.01,
        "slit_width": 0.05,
        "dimension": 1,
        "state": "basis:0",
        "samples_per_period": 64,
        "periods": 4,
        "z_steps": 256,
        "seed": None,
    },
    "synth": {
        "dimension": 3,
        "spacing": 1.0,
        "slit_width": 0.05,
        "spike_width": 0.05,
        "profile": "gaussian",
        "amplitudes": "uniform",
        "samples_per_cell": 64,
        "cells": 24,
        "seed": None,
    },
    "entangle": {
        "dimension": 3,
        "spacing": 1.0,
        "kappa_plus": 9.0,
        "kappa_minus": 1.0,
        "slit_width": 0.05,
        "spike_width": 0.05,
        "initial_window_cells": 48,
        "initial_samples_per_cell": 8,
        "slit_window_cells": 8,
        "slit_samples_per_cell": 160,
        "carpet_window_cells": 48,
        "carpet_samples_per_cell": 64,
        "seed": None,
    },
    "bell": {
        "dimension": 3,
        "route": "analytic",
        "kappa_plus": 9.0,
        "kappa_minus": 0.0,
        "spacing": 1.0,
        "slit_width": 0.05,
        "samples_per_cell": 64,
        "cells": 64,
        "envelope": False,
        "convention": "correlated",
        "seed": None,
    },
    "bell-scan": {
        "dimensions": [2, 3, 4, 5, 6, 7, 8],
        "kappa_pairs": "fig",
        "spacing": 1.0,
        "route": "analytic",
        "workers": 1,
        "seed": None,
    },
    "constraints": {
        "pixel_pitch": 10e-6,
        "pixels": [1080, 1920],
        "wavelength": 800e-9,
        "threshold": 100,
        "dimension": None,
        "seed": None,
    },
}


def _load_config(command: str, args) -> dict:
    config = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidSpec(f"cannot read config {args.config}: {exc}")
        for key, value in loaded.items():
            if key not in config:
                raise InvalidSpec(f"unknown config key {key!r} for {command}")
            config[key] = value
    for item in args.set or []:
        if "=" not in item:
            raise InvalidSpec(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        if key not in config:
            raise InvalidSpec(f"unknown config key {key!r} for {command}")
        try:
            config[key] = json.loads(raw)
        except json.JSONDecodeError:
            config[key] = raw
    return config


def _out_dir(args) -> Path:
    if not args.out_dir:
        raise InvalidSpec("this command emits files; --out-dir is required")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_amplitudes(spec_value, dimension: int) -> np.ndarray:
    if isinstance(spec_value, str):
        if spec_value == "uniform":
            return np.full(dimension, 1.0 / math.sqrt(dimension), dtype=complex)
        if spec_value.startswith("basis:"):
            idx = int(spec_value.split(":", 1)[1])
            if not 0 <= idx < dimension:
                raise InvalidSpec(f"basis index {idx} outside 0..{dimension - 1}")
            amps = np.zeros(dimension, dtype=complex)
            amps[idx] = 1.0
            return amps
        raise InvalidSpec(f"amplitude spec {spec_value!r} not understood")
    pairs = np.asarray(spec_value, dtype=float)
    if pairs.shape != (dimension, 2):
        raise InvalidSpec(f"amplitudes must be {dimension} [re, im] pairs")
    amps = pairs[:, 0] + 1j * pairs[:, 1]
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise InvalidSpec("amplitudes must not vanish")
    return amps / norm


def cmd_carpet(args) -> int:
    cfg = _load_config("carpet", args)
    out = _out_dir(args)
    dim = int(cfg["dimension"])
    period = float(cfg["period"])
    amps = _parse_amplitudes(cfg["state"], dim)
    offs = period / dim * np.arange(dim)
    field = periodic_comb(period, float(cfg["slit_width"]) * period, offs, amps)
    spp = int(cfg["samples_per_period"])
    periods = int(cfg["periods"])
    z_t = talbot_length(period, float(cfg["wavelength"]))
    steps = int(cfg["z_steps"])
    if steps < 2:
        raise InvalidSpec("z_steps must be at least 2")
    density = np.empty((steps, spp * periods))
    for i, frac in enumerate(np.linspace(0.0, 2.0, steps)):
        spec = PropagationSpec(float(cfg["wavelength"]), frac * z_t)
        snap = sample(mode_propagate(field, spec), spp, periods)
        density[i] = np.abs(snap.values) ** 2
    write_matrix_csv(density, out / "carpet.csv", config=cfg)
    write_pgm(density, out / "carpet.pgm", config=cfg)
    print(f"carpet: {steps} x {spp * periods} density written to {out}")
    return 0


def cmd_synth(args) -> int:
    cfg = _load_config("synth", args)
    out = _out_dir(args)
    dim = int(cfg["dimension"])
    spacing = float(cfg["spacing"])
    profile = get_profile(cfg["profile"])
    amps = _parse_amplitudes(cfg["amplitudes"], dim)
    slits = SlitArray(dim, spacing, float(cfg["slit_width"]) * spacing,
                      profile=profile, amplitudes=amps)
    geom = SynthesizerGeometry.for_dimension(dim, spacing,
                                             spike_width=float(cfg["spike_width"]) * spacing)
    n = int(cfg["samples_per_cell"]) * int(cfg["cells"])
    dx = spacing / int(cfg["samples_per_cell"])
    x = -n * dx / 2.0 + dx * np.arange(n)
    aperture = slits.transmission(x)
    output = render_synthesized(slits, geom, x)
    ideal = sample(synthesize_single(slits, geom),
                   int(cfg["samples_per_cell"]) * dim, int(cfg["cells"]) // dim or 1)
    write_sampled_csv(SampledField(float(x[0]), dx, aperture), out / "synth_input.csv",
                      config=cfg)
    write_sampled_csv(SampledField(float(x[0]), dx, output), out / "synth_output.csv",
                      config=cfg)
    write_sampled_csv(ideal, out / "synth_ideal.csv", config=cfg)
    print(f"synth: aperture, synthesized and ideal profiles written to {out}")
    return 0


def cmd_entangle(args) -> int:
    cfg = _load_config("entangle", args)
    out = _out_dir(args)
    dim = int(cfg["dimension"])
    s = float(cfg["spacing"])
    model = BiphotonGaussian(float(cfg["kappa_plus"]) * s, float(cfg["kappa_minus"]) * s)
    slits = SlitArray(dim, s, float(cfg["slit_width"]) * s)
    geom = SynthesizerGeometry.for_dimension(dim, s,
                                             spike_width=float(cfg["spike_width"]) * s)

    def axis(cells, spc):
        n = int(cells) * int(spc)
        dx = s / int(spc)
        return -n * dx / 2.0 + dx * np.arange(n)

    x_a = axis(cfg["initial_window_cells"], cfg["initial_samples_per_cell"])
    initial = initial_biphoton_field(model, x_a, x_a)
    write_biphoton_csv(initial, out / "entangle_initial.csv", config=cfg)
    write_pgm(np.abs(initial.values) ** 2, out / "entangle_initial.pgm", config=cfg)

    x_c = axis(cfg["slit_window_cells"], cfg["slit_samples_per_cell"])
    after, transmitted = apply_dslit(initial_biphoton_field(model, x_c, x_c), slits)
    write_biphoton_csv(after, out / "entangle_slits.csv",
                       config={**cfg, "transmitted_fraction": transmitted})
    write_pgm(np.abs(after.values) ** 2, out / "entangle_slits.pgm", config=cfg)

    coeffs = entangled_coeffs(dim, s, model)
    carpet = two_photon_field(coeffs, slits, geom,
                              samples_per_cell=int(cfg["carpet_samples_per_cell"]),
                              cells=int(cfg["carpet_window_cells"]))
    write_biphoton_csv(carpet, out / "entangle_carpet.csv", config=cfg)
    write_pgm(np.abs(carpet.values) ** 2, out / "entangle_carpet.pgm", config=cfg)
    print(f"entangle: initial, post-slit and carpet densities written to {out}"
          f" (transmitted fraction {transmitted:.4g})")
    return 0


def cmd_bell(args) -> int:
    cfg = _load_config("bell", args)
    out = _out_dir(args)
    dim = int(cfg["dimension"])
    s = float(cfg["spacing"])
    km = float(cfg["kappa_minus"])
    if km == 0.0:
        coeffs = maximally_entangled(dim)
    else:
        coeffs = entangled_coeffs(dim, s, BiphotonGaussian(float(cfg["kappa_plus"]) * s,
                                                           km * s))
    prov = {"config": cfg}
    if cfg["route"] == "analytic":
        result = bell_analytic(coeffs, provenance=prov)
    elif cfg["route"] == "field":
        slits = SlitArray(dim, s, float(cfg["slit_width"]) * s)
        geom = SynthesizerGeometry.for_dimension(dim, s)
        result = bell_field(coeffs, slits, geom,
                            samples_per_cell=int(cfg["samples_per_cell"]),
                            cells=int(cfg["cells"]),
                            envelope=bool(cfg["envelope"]),
                            provenance=prov)
    else:
        raise InvalidSpec("route must be 'analytic' or 'field'")
    (out / "bell.json").write_text(bell_result_to_json(result) + "\n")
    print(f"bell: D={dim} route={cfg['route']} I={result.value:.6f} -> {out / 'bell.json'}")
    return 0


def cmd_bell_scan(args) -> int:
    cfg = _load_config("bell-scan", args)
    out = _out_dir(args)
    dims = [int(d) for d in cfg["dimensions"]]
    pairs = cfg["kappa_pairs"]
    if pairs == "fig":
        kp = 9.0
        pairs = [[kp, 0.0]] + [
            [kp, kp * math.sqrt((1.0 - r) / (1.0 + r))]
            for r in (0.99998, 0.9998, 0.998)
        ]
    kappa_pairs = [(float(p[0]), float(p[1])) for p in pairs]
    rows = bell_scan(dims, kappa_pairs, spacing=float(cfg["spacing"]),
                     route=cfg["route"], workers=int(cfg["workers"]))
    write_scan_csv(rows, out / "bell_scan.csv", config=cfg)
    print(f"bell-scan: {len(rows)} rows written to {out / 'bell_scan.csv'}")
    return 0


def cmd_constraints(args) -> int:
    cfg = _load_config("constraints", args)
    spec = hw.HardwareSpec(float(cfg["pixel_pitch"]),
                           tuple(int(n) for n in cfg["pixels"]),
                           float(cfg["wavelength"]))
    d_max = hw.max_dimension(spec, int(cfg["threshold"]))
    dim = int(cfg["dimension"]) if cfg["dimension"] else max(d_max, 1)
    dists = hw.gate_distances(spec.pixel_pitch, dim, spec.wavelength)
    info = hw.mutual_information(dim)
    report = {
        "max_dimension": d_max,
        "dimension": dim,
        "talbot_length": dists["talbot_length"],
        "gate_distance": dists["gate_distance"],
        "gate_distance_alt": dists["gate_distance_alt"],
        "mutual_information_bits": info,
    }
    print(f"max encodable dimension (threshold {cfg['threshold']} slits): {d_max}")
    print(f"at D={dim}:")
    print(f"  talbot length        : {dists['talbot_length'] * 1e3:.4f} mm")
    print(f"  gate distance        : {dists['gate_distance'] * 1e3:.4f} mm")
    print(f"  gate distance (alt)  : {dists['gate_distance_alt'] * 1e3:.4f} mm")
    print(f"  mutual information   : {info:.4f} bits")
    if args.out_dir:
        out = _out_dir(args)
        (out / "constraints.json").write_text(
            json.dumps({"config": cfg, "report": report}, sort_keys=True, indent=1) + "\n")
    return 0


_COMMANDS = {
    "carpet": cmd_carpet,
    "synth": cmd_synth,
    "entangle": cmd_entangle,
    "bell": cmd_bell,
    "bell-scan": cmd_bell_scan,
    "constraints": cmd_constraints,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="talbotlab",
        description="Talbot-effect qudit laboratory: carpets, synthesis, Bell tests",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key")
        p.add_argument("--out-dir", help="directory for emitted files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _GUARDS as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    except (InvalidSpec, NotCoprime, NonNormalized, TalbotLabError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
