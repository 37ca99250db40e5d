"""Complex scalar fields and unitary paraxial propagation.

Two representations are used throughout the package:

* ``SampledField`` -- complex amplitude on a uniform transverse grid,
  propagated with the band-limited spectral (Fresnel transfer function)
  method.
* ``ModeField`` -- a periodic wavefunction stored as truncated Fourier
  coefficients, propagated exactly by multiplying each mode with its
  quadratic phase.

Both propagators conserve total probability.  The spectral transfer
function is ``exp(i k z) * exp(-i pi lambda z f^2)``; the mode propagator
multiplies coefficient ``n`` by ``exp(-i pi n^2 z / z_T)`` with
``z_T = period^2 / wavelength`` the Talbot length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AliasingRisk, GridMismatch, InvalidSpec, UnderResolved

__all__ = [
    "SampledField",
    "BiphotonField",
    "ModeField",
    "PropagationSpec",
    "SlitProfile",
    "GAUSSIAN",
    "TOPHAT",
    "get_profile",
    "talbot_length",
    "fresnel_propagate",
    "biphoton_propagate",
    "mode_propagate",
    "periodic_comb",
    "sample",
    "overlap",
    "fidelity",
]


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values)
    out.setflags(write=False)
    return out


def talbot_length(period: float, wavelength: float) -> float:
    """Talbot length of a periodic field: period squared over wavelength."""
    if period <= 0 or wavelength <= 0:
        raise InvalidSpec("period and wavelength must be positive")
    return period * period / wavelength


@dataclass(frozen=True)
class SampledField:
    """Complex amplitude on a uniform 1-D grid.

    Attributes
    ----------
    x0 : float
        Coordinate of the first sample.
    dx : float
        Sample pitch (> 0).
    values : ndarray
        Complex amplitude per sample, at least two samples.
    """

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size < 2:
            raise InvalidSpec("values must be a 1-D array with at least 2 samples")
        if not self.dx > 0:
            raise InvalidSpec("dx must be positive")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n(self) -> int:
        return self.values.size

    def x(self) -> np.ndarray:
        """Sample coordinates."""
        return self.x0 + self.dx * np.arange(self.n)

    def power(self) -> float:
        """Total probability sum(|values|^2) * dx."""
        return float((np.abs(self.values) ** 2).sum() * self.dx)

    def normalized(self) -> "SampledField":
        p = self.power()
        if not math.isfinite(p) or p <= 0:
            raise InvalidSpec("cannot normalize a zero or non-finite field")
        return SampledField(self.x0, self.dx, self.values / math.sqrt(p))

    def restricted(self, lo: float, hi: float) -> "SampledField":
        """Sub-field on [lo, hi], re-normalized (detection on a finite window)."""
        xs = self.x()
        sel = (xs >= lo) & (xs <= hi)
        if sel.sum() < 2:
            raise InvalidSpec("restriction window contains fewer than 2 samples")
        return SampledField(float(xs[sel][0]), self.dx, self.values[sel]).normalized()

    def same_grid(self, other: "SampledField", rtol: float = 1e-9) -> bool:
        return (
            self.n == other.n
            and math.isclose(self.dx, other.dx, rel_tol=rtol, abs_tol=0.0)
            and math.isclose(self.x0, other.x0, rel_tol=rtol, abs_tol=rtol * self.dx)
        )


@dataclass(frozen=True)
class BiphotonField:
    """Two-photon complex amplitude on the tensor grid of two 1-D grids."""

    x0_1: float
    dx1: float
    x0_2: float
    dx2: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 2 or min(vals.shape) < 2:
            raise InvalidSpec("values must be a 2-D array, at least 2x2")
        if not (self.dx1 > 0 and self.dx2 > 0):
            raise InvalidSpec("dx1 and dx2 must be positive")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def x1(self) -> np.ndarray:
        return self.x0_1 + self.dx1 * np.arange(self.values.shape[0])

    def x2(self) -> np.ndarray:
        return self.x0_2 + self.dx2 * np.arange(self.values.shape[1])

    def power(self) -> float:
        return float((np.abs(self.values) ** 2).sum() * self.dx1 * self.dx2)

    def normalized(self) -> "BiphotonField":
        p = self.power()
        if not math.isfinite(p) or p <= 0:
            raise InvalidSpec("cannot normalize a zero or non-finite field")
        return BiphotonField(self.x0_1, self.dx1, self.x0_2, self.dx2,
                             self.values / math.sqrt(p))


@dataclass(frozen=True)
class ModeField:
    """Periodic wavefunction as truncated Fourier coefficients.

    The field is ``sum_n coeffs[n] * exp(i n k (x - offset))`` with
    ``k = 2 pi / period`` and symmetric mode indices ``-M..M``.  One period
    carries unit probability when ``sum |coeffs|^2 == 1``.
    """

    period: float
    offset: float
    coeffs: np.ndarray  # length 2M+1, index 0 is mode -M

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidSpec("period must be positive")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise InvalidSpec("coeffs must be a 1-D array of odd length (symmetric truncation)")
        object.__setattr__(self, "coeffs", _freeze(c))

    @property
    def max_mode(self) -> int:
        return (self.coeffs.size - 1) // 2

    def modes(self) -> np.ndarray:
        m = self.max_mode
        return np.arange(-m, m + 1)

    def power(self) -> float:
        return float((np.abs(self.coeffs) ** 2).sum())

    def normalized(self) -> "ModeField":
        p = self.power()
        if not math.isfinite(p) or p <= 0:
            raise InvalidSpec("cannot normalize a zero or non-finite field")
        return ModeField(self.period, self.offset, self.coeffs / math.sqrt(p))

    def shifted(self, dx: float) -> "ModeField":
        return ModeField(self.period, self.offset + dx, self.coeffs)


@dataclass(frozen=True)
class PropagationSpec:
    """Wavelength and propagation distance; both validated on construction."""

    wavelength: float
    distance: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvalidSpec("wavelength must be positive")
        if self.distance < 0:
            raise InvalidSpec("backward propagation (z < 0) is not supported")

    def talbot_length(self, period: float) -> float:
        return talbot_length(period, self.wavelength)


# ---------------------------------------------------------------------------
# slit profiles


@dataclass(frozen=True)
class SlitProfile:
    """Transmission profile of a single slit, pluggable by name.

    ``amplitude(x, width)`` evaluates the profile, ``transform(k, width)``
    its continuous Fourier transform at wavenumber ``k``.
    """

    name: str
    amplitude: Callable[[np.ndarray, float], np.ndarray]
    transform: Callable[[np.ndarray, float], np.ndarray]


GAUSSIAN = SlitProfile(
    "gaussian",
    lambda x, w: np.exp(-np.square(x) / (2.0 * w * w)),
    lambda k, w: w * math.sqrt(2.0 * math.pi) * np.exp(-np.square(k) * w * w / 2.0),
)

TOPHAT = SlitProfile(
    "tophat",
    lambda x, w: (np.abs(x) <= w / 2.0).astype(float),
    lambda k, w: w * np.sinc(np.asarray(k) * w / (2.0 * math.pi)),
)

_PROFILES = {p.name: p for p in (GAUSSIAN, TOPHAT)}


def get_profile(name: str) -> SlitProfile:
    try:
        return _PROFILES[name]
    except KeyError:
        raise InvalidSpec(f"unknown slit profile {name!r}; expected one of {sorted(_PROFILES)}")


# ---------------------------------------------------------------------------
# propagation


def _transfer_function(n: int, dx: float, spec: PropagationSpec) -> np.ndarray:
    f = np.fft.fftfreq(n, dx)
    carrier = np.exp(2j * np.pi * spec.distance / spec.wavelength)
    return carrier * np.exp(-1j * np.pi * spec.wavelength * spec.distance * f * f)


def _occupied_bandwidth(power: np.ndarray, f: np.ndarray, rel: float = 1e-9) -> float:
    """Largest |frequency| carrying more than ``rel`` of the total power."""
    total = power.sum()
    if total <= 0:
        return float(np.abs(f).max())
    occupied = power > rel * total
    return float(np.abs(f[occupied]).max()) if occupied.any() else 0.0


def _check_aliasing(n: int, dx: float, spec: PropagationSpec,
                    power_f: np.ndarray, power_x: np.ndarray):
    """Guard the spectral propagator against the two real failure modes.

    The discrete transfer-function method evolves the periodized window
    exactly, so for window-filling periodic content any distance is safe.
    What does go wrong: (1) the field's own bandwidth rides the grid
    Nyquist frequency, i.e. the field is under-sampled; (2) a localized
    field is propagated so far that the band-limited Fresnel kernel
    (transverse reach ``lambda z f`` per frequency f, i.e. a quadratic
    spectral phase wrapping faster than pi per sample at the window edge)
    outruns the window and wraps into the far side.
    """
    f = np.fft.fftfreq(n, dx)
    f_nyq = float(np.abs(f).max())
    if _occupied_bandwidth(power_f, f) >= 0.95 * f_nyq:
        raise AliasingRisk(
            "field bandwidth rides the grid Nyquist frequency; refine the grid"
        )
    reach = spec.wavelength * spec.distance
    if reach == 0.0:
        return
    window = n * dx
    f_wrap = window / (2.0 * reach)
    total = power_f.sum()
    wrap_power = power_f[np.abs(f) > f_wrap].sum() / total if total > 0 else 0.0
    if wrap_power <= 1e-6:
        return
    edge = max(2, n // 20)
    edge_power = (power_x[:edge].sum() + power_x[-edge:].sum()) / power_x.sum()
    if edge_power < 1e-3:
        raise AliasingRisk(
            f"band-limited Fresnel kernel outreaches the window for a localized "
            f"field (wrapping power fraction {wrap_power:.2e}); enlarge the "
            f"window or reduce z"
        )


def fresnel_propagate(field: SampledField, spec: PropagationSpec) -> SampledField:
    """Propagate a sampled field by the spectral Fresnel method.

    Parameters
    ----------
    field : SampledField
        Input field; expected normalized.
    spec : PropagationSpec
        Wavelength and non-negative distance.

    Returns
    -------
    SampledField
        The propagated field on the same grid.  ``z = 0`` returns the input
        unchanged.  Total probability is conserved (unitary transfer
        function).

    Raises
    ------
    AliasingRisk
        If the transfer-function phase would wrap faster than pi per
        frequency sample at the grid edge, or the field spectrum rides the
        Nyquist edge.
    """
    if spec.distance == 0.0:
        return field
    spectrum = np.fft.fft(field.values)
    _check_aliasing(field.n, field.dx, spec, np.abs(spectrum) ** 2,
                    np.abs(field.values) ** 2)
    out = np.fft.ifft(spectrum * _transfer_function(field.n, field.dx, spec))
    return SampledField(field.x0, field.dx, out)


def biphoton_propagate(field: BiphotonField, spec1: PropagationSpec,
                       spec2: PropagationSpec | None = None) -> BiphotonField:
    """Propagate each photon axis of a biphoton field independently."""
    if spec2 is None:
        spec2 = spec1
    n1, n2 = field.values.shape
    vals = field.values
    if spec1.distance != 0.0:
        profile_x = (np.abs(vals) ** 2).sum(axis=1)
        spectrum = np.fft.fft(vals, axis=0)
        _check_aliasing(n1, field.dx1, spec1,
                        (np.abs(spectrum) ** 2).sum(axis=1), profile_x)
        h1 = _transfer_function(n1, field.dx1, spec1)
        vals = np.fft.ifft(spectrum * h1[:, None], axis=0)
        del spectrum
    if spec2.distance != 0.0:
        profile_x = (np.abs(vals) ** 2).sum(axis=0)
        spectrum = np.fft.fft(vals, axis=1)
        _check_aliasing(n2, field.dx2, spec2,
                        (np.abs(spectrum) ** 2).sum(axis=0), profile_x)
        h2 = _transfer_function(n2, field.dx2, spec2)
        vals = np.fft.ifft(spectrum * h2[None, :], axis=1)
        del spectrum
    if vals is field.values:
        return field
    return BiphotonField(field.x0_1, field.dx1, field.x0_2, field.dx2, vals)


def mode_propagate(field: ModeField, spec: PropagationSpec) -> ModeField:
    """Propagate a periodic field exactly: mode ``n`` gains ``exp(-i pi n^2 z/z_T)``.

    The quadratic phase is reduced modulo 2 before exponentiation so that a
    full revival distance (``z = 2 z_T``) reproduces the coefficients
    bit-exactly.  Moduli ``|coeffs|`` are unchanged for any distance.
    """
    if spec.distance == 0.0:
        return field
    z_t = spec.talbot_length(field.period)
    n = field.modes().astype(float)
    phase = np.exp(-1j * np.pi * np.mod(n * n * (spec.distance / z_t), 2.0))
    return ModeField(field.period, field.offset, field.coeffs * phase)


# ---------------------------------------------------------------------------
# periodic combs, sampling, overlaps


def periodic_comb(
    period: float,
    width: float,
    offsets: Sequence[float],
    amplitudes: Sequence[complex],
    profile: SlitProfile = GAUSSIAN,
    mass_tol: float = 1e-8,
    max_modes: int = 4096,
) -> ModeField:
    """Periodic superposition of slit combs as a normalized ModeField.

    The one-period restriction is ``sum_d amplitudes[d] * S(x - offsets[d])``
    with ``S`` the slit profile of the given width.  The mode truncation M is
    the smallest for which the discarded coefficient mass is below
    ``mass_tol`` of the total.
    """
    if width <= 0 or period <= 0:
        raise InvalidSpec("period and width must be positive")
    offsets = np.asarray(offsets, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if offsets.shape != amplitudes.shape:
        raise InvalidSpec("offsets and amplitudes must have matching lengths")
    k = 2.0 * np.pi / period

    m = 16
    while True:
        n = np.arange(-m, m + 1)
        shape = profile.transform(n * k, width).astype(complex)
        structure = (amplitudes[None, :] * np.exp(-1j * np.outer(n * k, offsets))).sum(axis=1)
        coeffs = shape * structure
        p = np.abs(coeffs) ** 2
        total = p.sum()
        if total == 0:
            raise InvalidSpec("comb has zero power")
        edge = p[: m // 8].sum() + p[-(m // 8):].sum()
        if edge < mass_tol * total:
            break
        if m >= max_modes:
            raise InvalidSpec(
                f"mode truncation did not converge below mass {mass_tol:g} "
                f"within {max_modes} modes (profile {profile.name!r})"
            )
        m *= 2
    # trim to the smallest symmetric truncation honoring the mass rule
    half = p.size // 2  # index of mode 0
    prefix = np.cumsum(p)

    def discarded(j: int) -> float:
        low = prefix[half - j - 1] if j < half else 0.0
        return float(low + total - prefix[half + j])

    keep = half
    while keep > 1 and discarded(keep - 1) < mass_tol * total:
        keep -= 1
    coeffs = coeffs[half - keep: half + keep + 1]
    return ModeField(period, 0.0, coeffs).normalized()


def sample(
    field: ModeField,
    samples_per_period: int = 64,
    periods: int = 128,
    center: float = 0.0,
    taper_periods: int = 0,
) -> SampledField:
    """Evaluate a ModeField on a uniform grid spanning ``periods`` periods.

    The grid must resolve the largest retained mode: ``samples_per_period``
    has to exceed twice the truncation order, else ``UnderResolved`` is
    raised.  With ``taper_periods > 0`` a raised-cosine ramp over that many
    periods is applied at each window edge, modelling finite illumination.
    The result is normalized over the window.
    """
    if samples_per_period < 2 or periods < 1:
        raise InvalidSpec("need at least 2 samples per period and 1 period")
    if samples_per_period <= 2 * field.max_mode:
        raise UnderResolved(
            f"{samples_per_period} samples/period cannot resolve modes up to "
            f"{field.max_mode}; need more than {2 * field.max_mode}"
        )
    n_samp = samples_per_period * periods
    dx = field.period / samples_per_period
    x0 = center - n_samp * dx / 2.0
    x = x0 + dx * np.arange(n_samp)
    k = 2.0 * np.pi / field.period
    vals = np.exp(1j * np.outer(x - field.offset, field.modes()) * k) @ field.coeffs
    if taper_periods:
        if 2 * taper_periods > periods:
            raise InvalidSpec("taper longer than the window")
        edge = taper_periods * samples_per_period
        w = np.ones(n_samp)
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(edge) / edge))
        w[:edge] = ramp
        w[-edge:] = ramp[::-1]
        vals = vals * w
    return SampledField(x0, dx, vals).normalized()


def overlap(a: SampledField, b: SampledField) -> complex:
    """Inner product ``sum conj(a) * b * dx`` of two fields on one grid."""
    if not a.same_grid(b):
        raise GridMismatch("overlap requires identical grids")
    return complex((a.values.conj() * b.values).sum() * a.dx)


def fidelity(a: SampledField, b: SampledField) -> float:
    """|<a|b>|^2 normalized by both powers."""
    return abs(overlap(a, b)) ** 2 / (a.power() * b.power())
