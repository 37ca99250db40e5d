"""CGLMP Bell-inequality evaluation over entangled comb states.

Two independent routes produce the four joint-probability tables:

* the matrix route applies the closed-form measurement unitaries to the
  coefficient matrix;
* the field route masks each photon axis with the pixelated measurement
  phases, propagates both axes by the gate distance and integrates the
  intensity over detector bins.

Both routes label outcomes in the measurement-operator convention, so their
tables are comparable entry by entry.  The inequality combines the tables
into correlators; the pairing that yields the canonical quantum violation
for the maximally correlated state is the default, and the anti-correlated
pairing (appropriate for raw detector-bin labels) is available behind a
flag.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InvalidSpec, NonNormalized
from .fields import BiphotonField, PropagationSpec, biphoton_propagate
from .qudits import (TalbotGeometry, bin_outcome_map, bin_weights,
                     gate_distance_fraction, measurement_basis,
                     measurement_phases, measurement_unitary)
from .spdc import (BiphotonGaussian, CoeffMatrix, SlitArray,
                   SynthesizerGeometry, entangled_coeffs, maximally_entangled,
                   two_photon_field)

__all__ = [
    "MeasurementSettings",
    "BellResult",
    "SETTING_PAIRS",
    "joint_prob_analytic",
    "joint_prob_field",
    "cglmp_value",
    "bell_analytic",
    "bell_field",
    "bell_scan",
    "ScanRow",
]

SETTING_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class MeasurementSettings:
    """The two measurement offsets per side; canonical CGLMP defaults."""

    alpha1: float = 0.0
    alpha2: float = 0.5
    beta1: float = 0.25
    beta2: float = -0.25

    def pair(self, a: int, b: int) -> tuple:
        alpha = self.alpha1 if a == 1 else self.alpha2
        beta = self.beta1 if b == 1 else self.beta2
        return alpha, beta


@dataclass(frozen=True)
class BellResult:
    """Joint tables, correlator combination values and the Bell parameter."""

    dimension: int
    tables: tuple  # four D x D arrays ordered as SETTING_PAIRS
    j_values: tuple
    value: float
    settings: MeasurementSettings
    convention: str
    provenance: dict = dc_field(default_factory=dict)


def _validate_table(table: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InvalidSpec("joint table must be square")
    if t.min() < -1e-12:
        raise NonNormalized(f"negative probability {t.min():.2e}")
    if abs(t.sum() - 1.0) > atol:
        raise NonNormalized(f"table sums to {t.sum():.8f}, expected 1")
    return t


def joint_prob_analytic(coeffs: CoeffMatrix, alpha: float, beta: float) -> np.ndarray:
    """Joint outcome table of the two measurement unitaries on the pair state.

    Entry (i, j) is the probability that side A reports outcome i at offset
    alpha while side B reports j at offset beta.  Sums to one at machine
    precision.
    """
    d = coeffs.dimension
    u_a = measurement_unitary(d, alpha, "A").matrix
    u_b = measurement_unitary(d, beta, "B").matrix
    amps = u_a @ coeffs.values @ u_b.T
    return np.abs(amps) ** 2


def joint_prob_field(
    psi: BiphotonField,
    gamma_a: float,
    gamma_b: float,
    geom: TalbotGeometry,
    wavelength: float | None = None,
) -> tuple:
    """Field-simulated joint table: mask, propagate, bin, relabel.

    Each axis is multiplied by the pixelated measurement phase mask
    (constant over each period/D cell), propagated by the gate distance
    ``2 z_T / (c D)`` and the intensity integrated over the detector bins.
    Bin indices are relabeled to the measurement-operator outcome
    convention, so the table is directly comparable with
    :func:`joint_prob_analytic`.

    Returns ``(table, diagnostics)``; diagnostics carry the captured power
    and the per-axis fraction of power in bin-straddling sample cells
    (binning cross-talk).
    """
    d = geom.dimension
    lam = wavelength if wavelength is not None else geom.period / 100.0
    z = gate_distance_fraction(d) * geom.period ** 2 / lam
    spec = PropagationSpec(lam, z)

    step = geom.offset_step
    th_a = measurement_phases(d, gamma_a)
    th_b = measurement_phases(d, gamma_b)

    def mask(x: np.ndarray, th: np.ndarray) -> np.ndarray:
        cell = np.floor((x - geom.origin + step / 2.0) / step).astype(int) % d
        return np.exp(1j * th[cell])

    x1, x2 = psi.x1(), psi.x2()
    masked = psi.values * mask(x1, th_a)[:, None] * mask(x2, th_b)[None, :]
    work = BiphotonField(psi.x0_1, psi.dx1, psi.x0_2, psi.dx2, masked)
    work = biphoton_propagate(work, spec)

    w1 = bin_weights(x1, psi.dx1, geom.origin, step, d)
    w2 = bin_weights(x2, psi.dx2, geom.origin, step, d)
    intensity = np.abs(work.values) ** 2 * psi.dx1 * psi.dx2
    binned = w1.T @ intensity @ w2

    map_a = bin_outcome_map(d, "A")
    map_b = bin_outcome_map(d, "B")
    table = np.zeros_like(binned)
    table[np.ix_(map_a, map_b)] = binned

    captured = float(table.sum())
    if captured <= 0:
        raise InvalidSpec("detector bins captured no power")
    split1 = intensity.sum(axis=1)[w1.max(axis=1) < 1.0 - 1e-12].sum()
    split2 = intensity.sum(axis=0)[w2.max(axis=1) < 1.0 - 1e-12].sum()
    diagnostics = {
        "captured": captured,
        "crosstalk_axis1": float(split1 / captured),
        "crosstalk_axis2": float(split2 / captured),
        "gate_distance_fraction": gate_distance_fraction(d),
    }
    return table / captured, diagnostics


def _corr_a_equals_b_plus(table: np.ndarray, k: int, anticorrelated: bool) -> float:
    d = table.shape[0]
    j = np.arange(d)
    if anticorrelated:
        return float(table[(-j) % d, (j + k) % d].sum())
    return float(table[(j + k) % d, j].sum())


def _corr_b_equals_a_plus(table: np.ndarray, k: int, anticorrelated: bool) -> float:
    d = table.shape[0]
    j = np.arange(d)
    if anticorrelated:
        return float(table[(j + k) % d, (-j) % d].sum())
    return float(table[j, (j + k) % d].sum())


def cglmp_value(
    tables,
    settings: MeasurementSettings = MeasurementSettings(),
    convention: str = "correlated",
    provenance: dict | None = None,
) -> BellResult:
    """Bell parameter of the four joint tables.

    ``tables`` are ordered as ``SETTING_PAIRS``.  For each
    ``k < floor(D/2)`` the combination

    ``J_k = P(A1=B1+k) - P(A1=B1-k-1) + P(B2=A1+k) - P(B2=A1-k-1)
          + P(B1=A2+k+1) - P(B1=A2-k) + P(A2=B2+k) - P(A2=B2-k-1)``

    is weighted by ``1 - 2k/(D-1)`` and summed.  Local realistic
    distributions obey ``value <= 2``.  The ``convention`` selects how the
    correlators pair outcomes: ``"correlated"`` sums ``P(A=j+k, B=j)`` and
    is the default for measurement-convention tables; ``"anticorrelated"``
    sums ``P(A=-j, B=j+k)`` and applies to raw detector-bin tables, which
    are anti-correlated for a correlated pair state.
    """
    if convention not in ("correlated", "anticorrelated"):
        raise InvalidSpec("convention must be 'correlated' or 'anticorrelated'")
    anti = convention == "anticorrelated"
    tabs = tuple(_validate_table(t) for t in tables)
    if len(tabs) != 4:
        raise InvalidSpec("need the four setting tables")
    d = tabs[0].shape[0]
    if any(t.shape != (d, d) for t in tabs):
        raise InvalidSpec("all tables must share one dimension")
    p11, p12, p21, p22 = tabs
    j_values = []
    value = 0.0
    for k in range(d // 2):
        j_k = (
            _corr_a_equals_b_plus(p11, k, anti)
            - _corr_a_equals_b_plus(p11, -k - 1, anti)
            + _corr_b_equals_a_plus(p12, k, anti)
            - _corr_b_equals_a_plus(p12, -k - 1, anti)
            + _corr_b_equals_a_plus(p21, k + 1, anti)
            - _corr_b_equals_a_plus(p21, -k, anti)
            + _corr_a_equals_b_plus(p22, k, anti)
            - _corr_a_equals_b_plus(p22, -k - 1, anti)
        )
        j_values.append(j_k)
        value += (1.0 - 2.0 * k / (d - 1)) * j_k
    return BellResult(
        dimension=d,
        tables=tabs,
        j_values=tuple(j_values),
        value=float(value),
        settings=settings,
        convention=convention,
        provenance=dict(provenance or {}),
    )


def bell_analytic(
    coeffs: CoeffMatrix,
    settings: MeasurementSettings = MeasurementSettings(),
    provenance: dict | None = None,
) -> BellResult:
    """Matrix-route Bell evaluation of a coefficient matrix."""
    tables = [joint_prob_analytic(coeffs, *settings.pair(a, b))
              for a, b in SETTING_PAIRS]
    prov = {"route": "analytic", "dimension": coeffs.dimension}
    prov.update(provenance or {})
    return cglmp_value(tables, settings, provenance=prov)


def bell_field(
    coeffs: CoeffMatrix,
    slits: SlitArray,
    geom: SynthesizerGeometry,
    samples_per_cell: int = 64,
    cells: int = 64,
    envelope: bool = False,
    settings: MeasurementSettings = MeasurementSettings(),
    provenance: dict | None = None,
) -> BellResult:
    """Field-route Bell evaluation: synthesize the pair state, then measure.

    The two-photon comb state is built on the grid once and re-measured for
    the four setting pairs.  With ``envelope=False`` (default) the combs
    are ideal periodic ones on a window commensurate with the effective
    period, the regime in which the two routes agree most closely.
    """
    d = coeffs.dimension
    if cells % d != 0:
        cells += d - cells % d  # keep the window commensurate with the period
    psi = two_photon_field(coeffs, slits, geom, samples_per_cell=samples_per_cell,
                           cells=cells, envelope=envelope)
    tgeom = geom.talbot_geometry(d, slits.width, profile=slits.profile)
    tables = []
    diags = []
    for a, b in SETTING_PAIRS:
        alpha, beta = settings.pair(a, b)
        table, diag = joint_prob_field(psi, alpha, beta, tgeom)
        tables.append(table)
        diags.append(diag)
    prov = {
        "route": "field",
        "dimension": d,
        "samples_per_cell": samples_per_cell,
        "cells": cells,
        "envelope": envelope,
        "diagnostics": diags,
    }
    prov.update(provenance or {})
    return cglmp_value(tables, settings, provenance=prov)


@dataclass(frozen=True)
class ScanRow:
    dimension: int
    kappa_plus: float
    kappa_minus: float
    correlation: float
    route: str
    value: float


def _scan_point(dim: int, kappa_plus: float, kappa_minus: float, spacing: float,
                route: str, settings: MeasurementSettings,
                field_kwargs: dict) -> ScanRow:
    if kappa_minus == 0.0:
        coeffs = maximally_entangled(dim)
        correlation = 1.0
    else:
        model = BiphotonGaussian(kappa_plus, kappa_minus)
        coeffs = entangled_coeffs(dim, spacing, model)
        correlation = model.correlation
    if route == "analytic":
        res = bell_analytic(coeffs, settings)
    elif route == "field":
        slit_width = field_kwargs.get("slit_width", 0.05 * spacing)
        slits = SlitArray(dim, spacing, slit_width)
        geom = SynthesizerGeometry.for_dimension(dim, spacing)
        res = bell_field(coeffs, slits, geom,
                         samples_per_cell=field_kwargs.get("samples_per_cell", 64),
                         cells=field_kwargs.get("cells", 64),
                         envelope=field_kwargs.get("envelope", False),
                         settings=settings)
    else:
        raise InvalidSpec("route must be 'analytic' or 'field'")
    return ScanRow(dim, kappa_plus, kappa_minus, correlation, route, res.value)


def bell_scan(
    dimensions,
    kappa_pairs,
    spacing: float = 1.0,
    route: str = "analytic",
    settings: MeasurementSettings = MeasurementSettings(),
    workers: int = 1,
    **field_kwargs,
) -> list:
    """Bell parameter over a grid of dimensions and source widths.

    ``kappa_pairs`` is a sequence of ``(kappa_plus, kappa_minus)``;
    ``kappa_minus = 0`` marks the ideal maximally entangled reference row.
    Rows are returned ordered by the input grid regardless of the worker
    count (deterministic output ordering).
    """
    points = [(dim, kp, km) for kp, km in kappa_pairs for dim in dimensions]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_scan_point, dim, kp, km, spacing, route, settings,
                            field_kwargs)
                for dim, kp, km in points
            ]
            return [f.result() for f in futures]
    return [_scan_point(dim, kp, km, spacing, route, settings, field_kwargs)
            for dim, kp, km in points]
