"""Exact line-spectrum arithmetic for multi-tone real signals.

A real periodic signal made of finitely many commensurate tones,

    f(t) = A0 + sum_k Re{ A_k exp(j w_k t) },        w_k = n_k * omega0,

is stored as its spectral lines (w_k, A_k) with complex peak amplitudes.
Every positive frequency must lie on the integer lattice of a common base
frequency ``omega0`` (within 1e-9 relative), which turns products, periodic
means, time derivatives and the analytic continuation of the signal into
exact line-level operations instead of discretized ones.

The analytic signal of ``f`` is ``A0 + sum_k A_k exp(j w_k t)``; a constant
keeps its full weight, so the analytic signal of a DC value ``c`` is ``c``
(zero quadrature part).  Extending time to ``t + j s`` with ``s >= 0``
multiplies each line by the low-pass factor ``exp(-w_k s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

VOLT = "volt"
AMPERE = "ampere"
WATT = "watt"
VAR = "var"
JOULE = "joule"

# Relative tolerance for accepting a frequency as an integer lattice multiple.
COMMENSURATE_RTOL = 1e-9
# Relative threshold below which product lines are discarded.
PRUNE_RTOL = 1e-14

_MAX_LATTICE_STEPS = 10**8
# Denominator cap for the rational-ratio search.  Must stay well below
# sqrt(1/COMMENSURATE_RTOL) ~ 3e4: a generic irrational ratio has best
# rational approximations with error ~1/q^2, so capping q at 1e4 keeps that
# error above the 1e-9 gate and irrational inputs get rejected instead of
# silently approximated.
_MAX_LATTICE_DENOMINATOR = 10**4
_PRODUCT_UNITS = {(VOLT, AMPERE): WATT, (AMPERE, VOLT): WATT}
_DERIVATIVE_UNITS = {JOULE: WATT}


class IncommensurateError(ValueError):
    """A set of frequencies shares no common base frequency."""


def _find_lattice(omegas):
    """Base frequency and integer indices for strictly positive frequencies.

    Returns ``(None, [])`` for an empty input.  Raises IncommensurateError when
    no base exists such that every ``omega`` is an integer multiple within
    COMMENSURATE_RTOL.
    """
    if len(omegas) == 0:
        return None, []
    w_ref = min(omegas)
    steps = 1
    for w in omegas:
        ratio = Fraction(w / w_ref).limit_denominator(_MAX_LATTICE_DENOMINATOR)
        steps = math.lcm(steps, ratio.denominator)
        if steps > _MAX_LATTICE_STEPS:
            raise IncommensurateError(
                f"no common base frequency found for {sorted(set(omegas))}"
            )
    base = w_ref / steps
    indices = [round(w / base) for w in omegas]
    shrink = math.gcd(*indices)
    if shrink > 1:
        base *= shrink
        indices = [n // shrink for n in indices]
    for w, n in zip(omegas, indices):
        if n <= 0 or abs(w - n * base) > COMMENSURATE_RTOL * w:
            raise IncommensurateError(
                f"frequency {w} is not a lattice multiple of base {base}"
            )
    return base, indices


def _combine_units(a, b):
    if a == b:
        return a
    if not a:
        return b
    if not b:
        return a
    raise ValueError(f"incompatible units: {a!r} and {b!r}")


@dataclass(frozen=True)
class SpectralLine:
    """One spectral line: angular frequency (rad/s) and complex peak amplitude."""

    omega: float
    amplitude: complex

    def __post_init__(self):
        omega = float(self.omega)
        amplitude = complex(self.amplitude)
        if not math.isfinite(omega) or omega < 0.0:
            raise ValueError(f"omega must be finite and >= 0, got {self.omega!r}")
        if not (math.isfinite(amplitude.real) and math.isfinite(amplitude.imag)):
            raise ValueError("amplitude must be finite")
        if omega == 0.0 and amplitude.imag != 0.0:
            raise ValueError("the DC amplitude must be purely real")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "amplitude", amplitude)


@dataclass(frozen=True)
class ComplexTimePoint:
    """A complex time value t + j*s; the part ``s >= 0`` is the smoothing scale."""

    t: float
    s: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")
        if not math.isfinite(self.s) or self.s < 0.0:
            raise ValueError(f"s must be finite and >= 0, got {self.s!r}")


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """A uniformly sampled real signal: values at ``t0 + k*dt``."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt!r}")
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("samples must be a non-empty 1-d array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.samples.size)


@dataclass(frozen=True)
class LineSpectrum:
    """A real multi-tone signal as an immutable, lattice-aligned line spectrum.

    ``lines`` are strictly ascending in frequency with no duplicates; any DC
    line comes first and is purely real.  ``unit`` is a free-form tag; the
    pipeline uses ``volt``, ``ampere``, ``watt`` and ``joule``.  Use
    :meth:`from_lines` to build a spectrum from arbitrary (omega, amplitude)
    pairs; the raw constructor expects already well-formed lines.

    Instances are immutable after construction and safe to share between
    threads.
    """

    lines: tuple[SpectralLine, ...]
    unit: str = ""
    omega0: float | None = field(init=False, default=None, compare=False, repr=False)
    _indices: tuple[int, ...] = field(init=False, default=(), compare=False, repr=False)

    def __post_init__(self):
        lines = tuple(
            ln if isinstance(ln, SpectralLine) else SpectralLine(*ln)
            for ln in self.lines
        )
        omegas = [ln.omega for ln in lines]
        for lo, hi in zip(omegas, omegas[1:]):
            if not lo < hi:
                raise ValueError("line frequencies must be strictly ascending")
        positive = [w for w in omegas if w > 0.0]
        base, pos_idx = _find_lattice(positive)
        indices = ([0] if len(positive) < len(omegas) else []) + pos_idx
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "omega0", base)
        object.__setattr__(self, "_indices", tuple(indices))

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def from_lines(cls, pairs, unit="", prune=False):
        """Build a spectrum from (omega, amplitude) pairs or SpectralLine objects.

        Frequencies within 1e-9 relative of the same lattice multiple are
        merged by summing amplitudes (the first-seen frequency is kept, which
        makes repeated reconstruction bit-stable); with ``prune=True`` lines
        below PRUNE_RTOL of the largest amplitude are dropped.  Exact zeros
        are always dropped.
        """
        raw = []
        for entry in pairs:
            if isinstance(entry, SpectralLine):
                raw.append((entry.omega, entry.amplitude))
            else:
                omega, amplitude = entry
                raw.append((float(omega), complex(amplitude)))
        for omega, amplitude in raw:
            if not math.isfinite(omega) or omega < 0.0:
                raise ValueError(f"omega must be finite and >= 0, got {omega!r}")
            if not (math.isfinite(amplitude.real) and math.isfinite(amplitude.imag)):
                raise ValueError("amplitude must be finite")
        base, indices = _find_lattice([w for w, _ in raw if w > 0.0])
        amps: dict[int, complex] = {}
        omegas: dict[int, float] = {}
        pos = iter(indices)
        for omega, amplitude in raw:
            n = 0 if omega == 0.0 else next(pos)
            amps[n] = amps.get(n, 0.0) + amplitude
            omegas.setdefault(n, omega)
        if 0 in amps:
            dc = amps[0]
            limit = max((abs(a) for a in amps.values()), default=0.0)
            if abs(dc.imag) > COMMENSURATE_RTOL * max(limit, abs(dc)):
                raise ValueError("the DC amplitude must be purely real")
            amps[0] = complex(dc.real, 0.0)
        cutoff = 0.0
        if prune and amps:
            cutoff = PRUNE_RTOL * max(abs(a) for a in amps.values())
        lines = [
            SpectralLine(omegas[n], a)
            for n, a in sorted(amps.items())
            if abs(a) > cutoff
        ]
        return cls(tuple(lines), unit)

    @classmethod
    def zero(cls, unit=""):
        return cls((), unit)

    @classmethod
    def dc(cls, value, unit=""):
        return cls.from_lines([(0.0, float(value))], unit)

    @classmethod
    def tone(cls, omega, amplitude=1.0, unit=""):
        """Single line Re{amplitude * e^{j omega t}}; use -1j for a sine."""
        return cls.from_lines([(omega, amplitude)], unit)

    @classmethod
    def am_modulated(cls, carrier_amplitude, omega, depth, mod_omega, unit=""):
        """Amplitude-modulated tone A(1 + depth*cos(mod_omega*t))cos(omega*t).

        Expands to the carrier plus two sidebands at ``omega +- mod_omega``
        with amplitude ``A*depth/2``.
        """
        if not 0.0 < mod_omega < omega:
            raise ValueError("need 0 < mod_omega < omega for real sidebands")
        a = complex(carrier_amplitude)
        half = 0.5 * float(depth) * a
        return cls.from_lines(
            [(omega - mod_omega, half), (omega, a), (omega + mod_omega, half)],
            unit,
        )

    @classmethod
    def from_records(cls, records, unit=""):
        """Rebuild a spectrum from ``to_records`` output."""
        pairs = []
        for i, rec in enumerate(records):
            try:
                pairs.append(
                    (float(rec["omega"]), complex(float(rec["re"]), float(rec["im"])))
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"records[{i}]: expected omega/re/im keys: {exc}") from None
        return cls.from_lines(pairs, unit)

    def to_records(self) -> list[dict]:
        """JSON-friendly form: one {omega, re, im} record per line."""
        return [
            {"omega": ln.omega, "re": ln.amplitude.real, "im": ln.amplitude.imag}
            for ln in self.lines
        ]

    # ------------------------------------------------------------------
    # structure

    @cached_property
    def _dc(self) -> float:
        if self.lines and self.lines[0].omega == 0.0:
            return self.lines[0].amplitude.real
        return 0.0

    @cached_property
    def _pos_omegas(self) -> np.ndarray:
        return np.array([ln.omega for ln in self.lines if ln.omega > 0.0])

    @cached_property
    def _pos_amplitudes(self) -> np.ndarray:
        return np.array(
            [ln.amplitude for ln in self.lines if ln.omega > 0.0], dtype=complex
        )

    @property
    def omegas(self) -> np.ndarray:
        return np.array([ln.omega for ln in self.lines])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([ln.amplitude for ln in self.lines], dtype=complex)

    @property
    def is_zero(self) -> bool:
        return not self.lines

    @property
    def period(self) -> float | None:
        """Common period 2*pi/omega0, or None without positive lines."""
        return None if self.omega0 is None else 2.0 * math.pi / self.omega0

    @property
    def omega_min(self) -> float | None:
        w = self._pos_omegas
        return float(w[0]) if w.size else None

    @property
    def omega_max(self) -> float | None:
        w = self._pos_omegas
        return float(w[-1]) if w.size else None

    def line_at(self, omega) -> complex:
        """Amplitude of the line at ``omega`` (0 when absent)."""
        for ln in self.lines:
            if ln.omega == omega or (
                omega > 0 and abs(ln.omega - omega) <= COMMENSURATE_RTOL * omega
            ):
                return ln.amplitude
        return 0.0 + 0.0j

    # ------------------------------------------------------------------
    # evaluation

    def evaluate(self, t):
        """Signal value(s) at time ``t`` (scalar or array), always real."""
        t_arr = np.asarray(t, dtype=float)
        if self._pos_omegas.size == 0:
            out = np.full(t_arr.shape, self._dc)
        else:
            rotate = np.exp(1j * np.multiply.outer(t_arr, self._pos_omegas))
            out = self._dc + (rotate @ self._pos_amplitudes).real
        return float(out) if t_arr.ndim == 0 else out

    def analytic_at(self, t, s=0.0):
        """Analytic signal at complex time t + j*s (``s >= 0``).

        Equals ``A0 + sum_k A_k e^{j w_k t} e^{-w_k s}``; at s=0 the real part
        recovers the signal and the imaginary part its quadrature component.
        """
        if s < 0.0:
            raise ValueError(f"s must be >= 0, got {s!r}")
        t_arr = np.asarray(t, dtype=float)
        if self._pos_omegas.size == 0:
            out = np.full(t_arr.shape, self._dc, dtype=complex)
        else:
            damped = self._pos_amplitudes * np.exp(-self._pos_omegas * s)
            rotate = np.exp(1j * np.multiply.outer(t_arr, self._pos_omegas))
            out = self._dc + rotate @ damped
        return complex(out) if t_arr.ndim == 0 else out

    def analytic_grid(self, t_grid, s_grid) -> np.ndarray:
        """Analytic signal on the outer grid; result shape (len(t), len(s))."""
        t_arr = np.asarray(t_grid, dtype=float)
        s_arr = np.asarray(s_grid, dtype=float)
        if np.any(s_arr < 0.0):
            raise ValueError("all scale values must be >= 0")
        if self._pos_omegas.size == 0:
            return np.full((t_arr.size, s_arr.size), self._dc, dtype=complex)
        rotate = np.exp(1j * np.outer(t_arr, self._pos_omegas))
        damp = np.exp(-np.outer(self._pos_omegas, s_arr))
        return self._dc + rotate @ (self._pos_amplitudes[:, None] * damp)

    def sample(self, t0, dt, n) -> SampledSignal:
        """Uniform samples at ``t0 + k*dt`` for ``k = 0 .. n-1``."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n!r}")
        t = float(t0) + float(dt) * np.arange(int(n))
        return SampledSignal(float(t0), float(dt), self.evaluate(t))

    def mean(self) -> float:
        """Exact periodic mean: the DC amplitude."""
        return self._dc

    def rms(self) -> float:
        """Root-mean-square value over the common period."""
        return math.sqrt(self._dc**2 + 0.5 * float(np.sum(np.abs(self._pos_amplitudes) ** 2)))

    # ------------------------------------------------------------------
    # line-level operators

    def hilbert(self) -> "LineSpectrum":
        """Quadrature signal: each positive line gains -j, the DC line vanishes."""
        return LineSpectrum.from_lines(
            [(ln.omega, -1j * ln.amplitude) for ln in self.lines if ln.omega > 0.0],
            self.unit,
        )

    def derivative(self) -> "LineSpectrum":
        """Exact time derivative: each line gains j*omega, DC vanishes."""
        return LineSpectrum.from_lines(
            [(ln.omega, 1j * ln.omega * ln.amplitude) for ln in self.lines if ln.omega > 0.0],
            _DERIVATIVE_UNITS.get(self.unit, ""),
        )

    def scale(self, factor, unit=None) -> "LineSpectrum":
        """Multiply by a real constant, optionally retagging the unit."""
        factor = float(factor)
        return LineSpectrum.from_lines(
            [(ln.omega, factor * ln.amplitude) for ln in self.lines],
            self.unit if unit is None else unit,
        )

    def multiply(self, other, unit=None) -> "LineSpectrum":
        """Exact pointwise product via sum and difference frequencies.

        Both spectra must live on a common frequency lattice.  The result
        satisfies evaluate(f*g, t) == evaluate(f, t)*evaluate(g, t) to machine
        precision; lines below PRUNE_RTOL of the largest product amplitude are
        dropped.
        """
        if not isinstance(other, LineSpectrum):
            raise TypeError("multiply expects another LineSpectrum")
        if unit is None:
            unit = _PRODUCT_UNITS.get((self.unit, other.unit), "")
        if self.is_zero or other.is_zero:
            return LineSpectrum.zero(unit)
        merged = [ln.omega for ln in self.lines if ln.omega > 0.0]
        merged += [ln.omega for ln in other.lines if ln.omega > 0.0]
        base, _ = _find_lattice(merged)
        coeffs_a = self._symmetric_coefficients(base)
        coeffs_b = other._symmetric_coefficients(base)
        conv: dict[int, complex] = {}
        for na, ca in coeffs_a.items():
            for nb, cb in coeffs_b.items():
                n = na + nb
                if n >= 0:
                    conv[n] = conv.get(n, 0.0) + ca * cb
        pairs = []
        for n, c in conv.items():
            if n == 0:
                pairs.append((0.0, complex(c.real, 0.0)))
            else:
                pairs.append((n * base, 2.0 * c))
        return LineSpectrum.from_lines(pairs, unit, prune=True)

    def _symmetric_coefficients(self, base) -> dict[int, complex]:
        """Two-sided Fourier coefficients c_n on the lattice of ``base``."""
        coeffs: dict[int, complex] = {}
        for ln in self.lines:
            if ln.omega == 0.0:
                coeffs[0] = complex(ln.amplitude.real, 0.0)
            else:
                n = round(ln.omega / base)
                coeffs[n] = 0.5 * ln.amplitude
                coeffs[-n] = 0.5 * ln.amplitude.conjugate()
        return coeffs

    # ------------------------------------------------------------------
    # operators

    def __add__(self, other):
        if not isinstance(other, LineSpectrum):
            return NotImplemented
        return LineSpectrum.from_lines(
            self.lines + other.lines, _combine_units(self.unit, other.unit)
        )

    def __sub__(self, other):
        if not isinstance(other, LineSpectrum):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, other):
        if isinstance(other, LineSpectrum):
            return self.multiply(other)
        if isinstance(other, (int, float)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__
