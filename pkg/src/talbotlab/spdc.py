"""Two-photon state engineering with the double-Gaussian source model.

The source emits photon pairs whose transverse amplitude factorizes into
Gaussians of the sum and difference coordinates, with widths kappa_plus and
kappa_minus.  A pair of D-slit apertures followed by lens--grating--lens
synthesizers turns the pair into an entangled two-qudit state over comb
wavefunctions; the coefficient matrix follows from evaluating the source
amplitude on the slit lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, UnderResolved
from .fields import (GAUSSIAN, BiphotonField, ModeField, SlitProfile,
                     periodic_comb)
from .qudits import TalbotGeometry

__all__ = [
    "BiphotonGaussian",
    "SlitArray",
    "SynthesizerGeometry",
    "CoeffMatrix",
    "correlation_coefficient",
    "biphoton_amplitude",
    "initial_biphoton_field",
    "apply_dslit",
    "synthesize_single",
    "grating_envelope",
    "render_synthesized",
    "entangled_coeffs",
    "maximally_entangled",
    "two_photon_field",
    "schmidt_spectrum",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BiphotonGaussian:
    """Double-Gaussian pair source: widths of the sum and difference envelopes."""

    kappa_plus: float
    kappa_minus: float

    def __post_init__(self):
        if not (self.kappa_plus > 0 and self.kappa_minus > 0):
            raise InvalidSpec("kappa_plus and kappa_minus must be positive")

    @property
    def correlation(self) -> float:
        kp2, km2 = self.kappa_plus ** 2, self.kappa_minus ** 2
        return (kp2 - km2) / (kp2 + km2)


def correlation_coefficient(model: BiphotonGaussian) -> float:
    """Spatial correlation R = (k+^2 - k-^2) / (k+^2 + k-^2), in (-1, 1)."""
    return model.correlation


def biphoton_amplitude(model: BiphotonGaussian, x1, x2):
    """Normalized source amplitude at transverse positions (x1, x2).

    ``psi(x1, x2) = N exp(-(x1+x2)^2 / (4 k+^2)) exp(-(x1-x2)^2 / (4 k-^2))``
    with N fixed by unit probability over the plane.  Symmetric under
    exchange of the photons.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    norm = 1.0 / math.sqrt(math.pi * model.kappa_plus * model.kappa_minus)
    return norm * np.exp(
        -((x1 + x2) ** 2) / (4.0 * model.kappa_plus ** 2)
        - ((x1 - x2) ** 2) / (4.0 * model.kappa_minus ** 2)
    )


@dataclass(frozen=True)
class SlitArray:
    """D identical slits of width ``width`` spaced by ``spacing``.

    ``amplitudes`` are the complex illumination weights of the slits
    (uniform when omitted); they are stored normalized.  The array is
    centered on the optical axis: slit d sits at ``(d - (D-1)/2) * spacing``.
    """

    count: int
    spacing: float
    width: float
    profile: SlitProfile = GAUSSIAN
    amplitudes: np.ndarray | None = None

    def __post_init__(self):
        if self.count < 1:
            raise InvalidSpec("need at least one slit")
        if not self.spacing > self.width:
            raise InvalidSpec("slit spacing must exceed the slit width")
        if self.amplitudes is None:
            amps = np.full(self.count, 1.0 / math.sqrt(self.count), dtype=complex)
        else:
            amps = np.asarray(self.amplitudes, dtype=complex)
            if amps.shape != (self.count,):
                raise InvalidSpec("amplitudes must have one entry per slit")
            nrm = math.sqrt(float((np.abs(amps) ** 2).sum()))
            if nrm == 0:
                raise InvalidSpec("amplitudes must not all vanish")
            amps = amps / nrm
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def positions(self) -> np.ndarray:
        return (np.arange(self.count) - (self.count - 1) / 2.0) * self.spacing

    def transmission(self, x: np.ndarray) -> np.ndarray:
        """Aperture amplitude sum_d c_d S(x - x_d) on the given coordinates."""
        out = np.zeros(x.shape, dtype=complex)
        for pos, amp in zip(self.positions(), self.amplitudes):
            out += amp * self.profile.amplitude(x - pos, self.width)
        return out


@dataclass(frozen=True)
class SynthesizerGeometry:
    """Lens--grating--lens synthesizer: two Fourier lenses around a comb grating.

    The grating has period ``grating_period`` and Gaussian spikes of width
    ``spike_width``; its Fourier orders reproduce the input aperture on a
    lattice of period ``effective_period = focal_length * wavelength /
    grating_period``.
    """

    focal_length: float
    wavelength: float
    grating_period: float
    spike_width: float

    def __post_init__(self):
        if min(self.focal_length, self.wavelength, self.grating_period,
               self.spike_width) <= 0:
            raise InvalidSpec("all synthesizer lengths must be positive")

    @property
    def effective_period(self) -> float:
        return self.focal_length * self.wavelength / self.grating_period

    @classmethod
    def for_dimension(cls, dimension: int, spacing: float,
                      spike_width: float | None = None,
                      wavelength: float | None = None) -> "SynthesizerGeometry":
        """Geometry whose effective period is ``dimension * spacing``.

        That choice makes the slit lattice coincide with the Talbot-basis
        offsets, so the synthesizer output encodes a qudit.  The grating
        period is set to the slit spacing; the focal length follows.
        """
        if dimension < 1 or spacing <= 0:
            raise InvalidSpec("dimension must be >= 1 and spacing positive")
        lam = wavelength if wavelength is not None else spacing / 100.0
        spike = spike_width if spike_width is not None else 0.05 * spacing
        focal = dimension * spacing * spacing / lam
        return cls(focal, lam, spacing, spike)

    def talbot_geometry(self, dimension: int, slit_width: float,
                        profile: SlitProfile = GAUSSIAN) -> TalbotGeometry:
        origin = -(dimension - 1) / 2.0 * self.effective_period / dimension
        return TalbotGeometry(self.effective_period, slit_width, dimension,
                              profile=profile, origin=origin)


@dataclass(frozen=True)
class CoeffMatrix:
    """Coefficient matrix of the entangled two-qudit comb state."""

    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.values, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InvalidSpec("coefficient matrix must be square")
        if abs((np.abs(c) ** 2).sum() - 1.0) > 1e-12:
            raise InvalidSpec("coefficient matrix must have unit Frobenius norm")
        object.__setattr__(self, "values", _frozen(c))

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


# ---------------------------------------------------------------------------
# operations


def initial_biphoton_field(model: BiphotonGaussian, x1: np.ndarray,
                           x2: np.ndarray) -> BiphotonField:
    """Source amplitude sampled on the tensor grid of two coordinate axes."""
    vals = biphoton_amplitude(model, x1[:, None], x2[None, :])
    return BiphotonField(float(x1[0]), float(x1[1] - x1[0]),
                         float(x2[0]), float(x2[1] - x2[0]), vals).normalized()


def apply_dslit(field: BiphotonField, slits: SlitArray,
                min_samples_per_width: int = 8) -> tuple:
    """Send each photon through the slit array.

    Returns ``(masked field renormalized, transmitted power fraction)``.
    Raises ``UnderResolved`` when the grid does not carry at least
    ``min_samples_per_width`` samples per slit width.
    """
    for dx in (field.dx1, field.dx2):
        if slits.width / dx < min_samples_per_width * (1.0 - 1e-9):
            raise UnderResolved(
                f"slit width {slits.width:g} sampled with fewer than "
                f"{min_samples_per_width} points (dx = {dx:g})"
            )
    t1 = slits.transmission(field.x1())
    t2 = slits.transmission(field.x2())
    masked = field.values * t1[:, None] * t2[None, :]
    power_in = field.power()
    out = BiphotonField(field.x0_1, field.dx1, field.x0_2, field.dx2, masked)
    transmitted = out.power() / power_in
    if transmitted <= 0:
        raise InvalidSpec("aperture blocked the entire field")
    return out.normalized(), float(transmitted)


def grating_envelope(geom: SynthesizerGeometry, mass_tol: float = 1e-8,
                     max_orders: int = 4096) -> tuple:
    """Fourier orders (m, A_m) of the comb grating, truncated by mass.

    ``A_m = exp(-(2 pi m sigma)^2 / (2 lg^2))`` for Gaussian spikes of width
    sigma on a lattice of period lg.
    """
    m = 8
    while True:
        mm = np.arange(-m, m + 1)
        env = np.exp(-((2 * np.pi * mm * geom.spike_width) ** 2)
                     / (2.0 * geom.grating_period ** 2))
        mass = env ** 2
        if mass[0] + mass[-1] < mass_tol * mass.sum() / (2 * m):
            break
        if m >= max_orders:
            raise InvalidSpec("grating envelope truncation did not converge")
        m *= 2
    keep = mass > mass_tol * mass.sum() / mass.size
    idx = np.nonzero(keep)[0]
    lo, hi = idx.min(), idx.max()
    half = max(m - lo, hi - m)
    return np.arange(-half, half + 1), env[m - half: m + half + 1]


def synthesize_single(slits: SlitArray, geom: SynthesizerGeometry,
                      mass_tol: float = 1e-8) -> ModeField:
    """Synthesizer output as an ideal periodic comb state.

    The grating's Fourier orders replicate the aperture on the effective
    lattice; the periodic part of the output is the effective-period
    periodization of the aperture, returned as a normalized ModeField.  Use
    :func:`render_synthesized` for the finite, envelope-weighted profile.
    """
    return periodic_comb(geom.effective_period, slits.width, slits.positions(),
                         slits.amplitudes, profile=slits.profile, mass_tol=mass_tol)


def render_synthesized(slits: SlitArray, geom: SynthesizerGeometry,
                       x: np.ndarray, mass_tol: float = 1e-8) -> np.ndarray:
    """Finite synthesizer output on coordinates x, envelope-weighted comb.

    Each grating order m contributes a copy of the aperture displaced by
    ``m * effective_period`` and weighted by the order amplitude A_m.
    """
    mm, env = grating_envelope(geom, mass_tol=mass_tol)
    period = geom.effective_period
    out = np.zeros(x.shape, dtype=complex)
    lo, hi = x.min(), x.max()
    margin = 6.0 * slits.width + slits.count * slits.spacing
    for m, a in zip(mm, env):
        shift = m * period
        if shift < lo - margin or shift > hi + margin:
            continue
        out += a * slits.transmission(x - shift)
    return out


def entangled_coeffs(dimension: int, spacing: float,
                     model: BiphotonGaussian) -> CoeffMatrix:
    """Coefficient matrix of the two-qudit comb state behind twin synthesizers.

    With slit indices centered on the beam axis the matrix is the source
    amplitude on the slit lattice,

    ``C[d1, d2] ~ exp(-(spacing^2 / (4 Dp^2)) (d1^2 - 2 R d1 d2 + d2^2))``

    with ``1/Dp^2 = 1/k+^2 + 1/k-^2`` and R the correlation coefficient.
    Evaluating through R keeps the cross term real for any width ordering.
    Exact (no narrow-slit approximation) and symmetric in (d1, d2).
    """
    if dimension < 1:
        raise InvalidSpec("dimension must be >= 1")
    dc = np.arange(dimension) - (dimension - 1) / 2.0
    d1 = dc[:, None]
    d2 = dc[None, :]
    inv_dp2 = 1.0 / model.kappa_plus ** 2 + 1.0 / model.kappa_minus ** 2
    r = model.correlation
    expo = -(spacing ** 2 / 4.0) * inv_dp2 * (d1 * d1 - 2.0 * r * d1 * d2 + d2 * d2)
    c = np.exp(expo)
    return CoeffMatrix(c / np.linalg.norm(c))


def maximally_entangled(dimension: int) -> CoeffMatrix:
    """Ideal coefficient matrix: identity over sqrt(D)."""
    return CoeffMatrix(np.eye(dimension) / math.sqrt(dimension))


def two_photon_field(
    coeffs: CoeffMatrix,
    slits: SlitArray,
    geom: SynthesizerGeometry,
    samples_per_cell: int = 64,
    cells: int = 64,
    envelope: bool = True,
    min_samples_per_width: int = 3,
) -> BiphotonField:
    """Two-photon comb state on a square grid.

    ``Psi(x1, x2) = sum C[d1, d2] T_{d1}(x1) T_{d2}(x2)`` with T_d the comb
    wavefunction anchored at slit d.  The grid spans ``cells`` cells of one
    slit spacing sampled ``samples_per_cell`` times each, centered on the
    axis.  With ``envelope=False`` the combs are ideal (uniform teeth),
    which is the periodic idealization used for route comparisons.
    """
    dim = coeffs.dimension
    if slits.count != dim:
        raise InvalidSpec("slit count must match the coefficient dimension")
    s = slits.spacing
    dx = s / samples_per_cell
    if slits.width / dx < min_samples_per_width * (1.0 - 1e-9):
        raise UnderResolved(
            f"slit width {slits.width:g} needs at least {min_samples_per_width} "
            f"samples (dx = {dx:g})"
        )
    n = samples_per_cell * cells
    x0 = -n * dx / 2.0
    x = x0 + dx * np.arange(n)
    period = geom.effective_period
    if envelope:
        mm, env = grating_envelope(geom)
    else:
        half = int(math.ceil((n * dx / 2.0) / period)) + 2
        mm = np.arange(-half, half + 1)
        env = np.ones(mm.size)
    positions = slits.positions()
    basis = np.zeros((n, dim), dtype=complex)
    margin = 6.0 * slits.width
    for d in range(dim):
        centers = positions[d] + mm * period
        keep = (centers > x[0] - margin) & (centers < x[-1] + margin)
        for ctr, a in zip(centers[keep], env[keep]):
            basis[:, d] += a * slits.profile.amplitude(x - ctr, slits.width)
        nrm = math.sqrt(float((np.abs(basis[:, d]) ** 2).sum() * dx))
        if nrm == 0:
            raise InvalidSpec("empty comb on the grid; enlarge the window")
        basis[:, d] /= nrm
    vals = basis @ coeffs.values @ basis.T
    return BiphotonField(x0, dx, x0, dx, vals).normalized()


def schmidt_spectrum(coeffs: CoeffMatrix) -> tuple:
    """Singular values of the coefficient matrix and the entanglement entropy.

    Returns ``(values, entropy_bits)`` with values non-increasing, their
    squares summing to one, and ``entropy = -sum v^2 log2 v^2``.
    """
    vals = np.linalg.svd(coeffs.values, compute_uv=False)
    p = vals ** 2
    p = p / p.sum()
    nz = p[p > 1e-300]
    entropy = float(-(nz * np.log2(nz)).sum())
    return vals, entropy
