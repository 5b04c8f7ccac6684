"""Energies, powers, and the three balance laws of a solved network.

Three layers of description are computed from one frequency-domain
solution:

* instantaneous (real time): port power, dissipation, and stored
  energies as exact line spectra;
* classical per-line phasors: active/reactive power per frequency with
  Budeanu totals and apparent power;
* time-scale quantities on a (t, s) grid, where the scale s >= 0 damps
  each line by ``e^{-omega*s}``, suppressing the fastest content first.

The balances verified numerically are the instantaneous one,
``dw/dt = p - p_d``, the active one, ``dW/dt = P - P_d`` at every scale,
and the reactive one, ``-dX/ds = Q``, which runs along the scale axis
rather than the time axis.  All derivatives are taken term by term on
the two-frequency (beat) expansion of each quantity, so residuals
measure rounding error, not discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import CAPACITOR, INDUCTOR, RESISTOR, NetworkSolution
from .spectrum import (
    JOULE,
    VAR,
    WATT,
    COMMENSURATE_RTOL,
    LineSpectrum,
    _find_lattice,
)

# Two independent routes to the same number must agree this tightly.
CROSS_CHECK_RTOL = 1e-8
# Fraction of apparent power below which a reactive total counts as zero.
_REACTIVE_FLOOR = 1e-4


class ConsistencyError(RuntimeError):
    """Two supposedly equivalent computations disagreed beyond tolerance."""


# ----------------------------------------------------------------------
# beat expansion: the workhorse behind every scaled quantity
#
# A product of two analytic signals on a common lattice is a sum of
# terms  c * e^{j*(n_a - n_b)*base*t} * e^{-(n_a + n_b)*base*s}.  Keying
# the terms by the integer pair (n_a - n_b, n_a + n_b) keeps every
# derivative in t or s exact.


@dataclass
class _BeatForm:
    """Complex-valued finite sum over integer beat keys (dn, sn)."""

    base: float
    terms: dict[tuple[int, int], complex]

    @classmethod
    def zero(cls, base) -> "_BeatForm":
        return cls(base, {})

    def copy(self) -> "_BeatForm":
        return _BeatForm(self.base, dict(self.terms))

    def add_inplace(self, other, factor=1.0):
        if other.terms and self.terms and other.base != self.base:
            raise ValueError("beat expansions live on different lattices")
        if other.terms and not self.terms:
            self.base = other.base
        for key, c in other.terms.items():
            self.terms[key] = self.terms.get(key, 0.0 + 0.0j) + factor * c
        return self

    def scaled(self, factor) -> "_BeatForm":
        return _BeatForm(self.base, {k: factor * c for k, c in self.terms.items()})

    def real_part(self) -> "_BeatForm":
        out: dict[tuple[int, int], complex] = {}
        for (dn, sn), c in self.terms.items():
            half = 0.5 * c
            out[(dn, sn)] = out.get((dn, sn), 0.0 + 0.0j) + half
            out[(-dn, sn)] = out.get((-dn, sn), 0.0 + 0.0j) + half.conjugate()
        return _BeatForm(self.base, out)

    def imag_part(self) -> "_BeatForm":
        out: dict[tuple[int, int], complex] = {}
        for (dn, sn), c in self.terms.items():
            half = -0.5j * c
            out[(dn, sn)] = out.get((dn, sn), 0.0 + 0.0j) + half
            out[(-dn, sn)] = out.get((-dn, sn), 0.0 + 0.0j) + half.conjugate()
        return _BeatForm(self.base, out)

    def partial_t(self) -> "_BeatForm":
        return _BeatForm(
            self.base,
            {k: c * (1j * k[0] * self.base) for k, c in self.terms.items()},
        )

    def partial_s(self) -> "_BeatForm":
        return _BeatForm(
            self.base,
            {k: c * (-k[1] * self.base) for k, c in self.terms.items()},
        )

    def evaluate(self, t_grid, s_grid) -> np.ndarray:
        """Complex values on the outer grid, shape (len(t), len(s))."""
        t_arr = np.atleast_1d(np.asarray(t_grid, dtype=float))
        s_arr = np.atleast_1d(np.asarray(s_grid, dtype=float))
        if not self.terms:
            return np.zeros((t_arr.size, s_arr.size), dtype=complex)
        dns = sorted({k[0] for k in self.terms})
        sns = sorted({k[1] for k in self.terms})
        dn_pos = {d: i for i, d in enumerate(dns)}
        sn_pos = {s: i for i, s in enumerate(sns)}
        coeff = np.zeros((len(dns), len(sns)), dtype=complex)
        for (dn, sn), c in self.terms.items():
            coeff[dn_pos[dn], sn_pos[sn]] = c
        rot = np.exp(1j * self.base * np.multiply.outer(t_arr, np.array(dns, dtype=float)))
        damp = np.exp(-self.base * np.multiply.outer(np.array(sns, dtype=float), s_arr))
        return rot @ coeff @ damp

    def mean_terms(self) -> dict[int, complex]:
        """Coefficients of the time average, keyed by the decay index sn."""
        out: dict[int, complex] = {}
        for (dn, sn), c in self.terms.items():
            if dn == 0:
                out[sn] = out.get(sn, 0.0 + 0.0j) + c
        return out

    def mean_at(self, s_grid) -> np.ndarray:
        """Time average as a function of s."""
        s_arr = np.atleast_1d(np.asarray(s_grid, dtype=float))
        out = np.zeros(s_arr.size, dtype=complex)
        for sn, c in self.mean_terms().items():
            out += c * np.exp(-sn * self.base * s_arr)
        return out


def _line_terms(spectrum: LineSpectrum, base) -> list[tuple[int, complex]]:
    """(lattice index, analytic amplitude) pairs; DC enters at index 0."""
    out: list[tuple[int, complex]] = []
    for ln in spectrum.lines:
        if ln.omega == 0.0:
            out.append((0, complex(ln.amplitude)))
        else:
            n = int(round(ln.omega / base))
            if n <= 0 or abs(ln.omega - n * base) > COMMENSURATE_RTOL * ln.omega:
                raise ValueError(
                    f"frequency {ln.omega!r} is off the common beat lattice"
                )
            out.append((n, complex(ln.amplitude)))
    return out


def _analytic_product(f: LineSpectrum, g: LineSpectrum, base) -> _BeatForm:
    """Beat expansion of ``f_analytic(t+js) * conj(g_analytic(t+js))``."""
    form = _BeatForm.zero(base)
    if base == 0.0:
        dc = f.mean() * g.mean()
        if dc != 0.0:
            form.terms[(0, 0)] = complex(dc)
        return form
    for na, a in _line_terms(f, base):
        for nb, b in _line_terms(g, base):
            key = (na - nb, na + nb)
            form.terms[key] = form.terms.get(key, 0.0 + 0.0j) + a * b.conjugate()
    return form


def _beat_base(sol: NetworkSolution) -> float:
    base, _ = _find_lattice([w for w in sol.source.omegas if w > 0.0])
    return 0.0 if base is None else base


def _stored_energy_forms(sol: NetworkSolution, base):
    """Beat expansions of magnetic energy, electric energy, dissipation."""
    w_m = _BeatForm.zero(base)
    w_e = _BeatForm.zero(base)
    p_d = _BeatForm.zero(base)
    for b in sol.netlist.branches:
        if b.kind == INDUCTOR:
            i_b = sol.branch_current[b.id]
            w_m.add_inplace(_analytic_product(i_b, i_b, base), 0.25 * b.value)
        elif b.kind == CAPACITOR:
            u_b = sol.branch_voltage[b.id]
            w_e.add_inplace(_analytic_product(u_b, u_b, base), 0.25 * b.value)
        else:
            i_b = sol.branch_current[b.id]
            p_d.add_inplace(_analytic_product(i_b, i_b, base), 0.5 * b.value)
    return w_m, w_e, p_d


# ----------------------------------------------------------------------
# instantaneous layer (s = 0, exact line spectra)


@dataclass(frozen=True)
class InstantaneousSet:
    """Real-time energy and power waveforms of one solution.

    All fields are exact line spectra: ``p`` the port power, ``p_dissipated``
    the total resistive loss, ``w_magnetic``/``w_electric`` the stored
    energies, ``w_stored`` their sum, and ``x_reactive`` their difference.
    """

    p: LineSpectrum
    p_dissipated: LineSpectrum
    w_magnetic: LineSpectrum
    w_electric: LineSpectrum
    w_stored: LineSpectrum
    x_reactive: LineSpectrum


def instantaneous(sol: NetworkSolution) -> InstantaneousSet:
    """Assemble p = u*i, p_d = sum R i^2, w_m = sum L i^2 / 2, w_e = sum C u^2 / 2."""
    p = sol.source.multiply(sol.port_current)
    p_d = LineSpectrum.zero(WATT)
    w_m = LineSpectrum.zero(JOULE)
    w_e = LineSpectrum.zero(JOULE)
    for b in sol.netlist.branches:
        if b.kind == RESISTOR:
            i_b = sol.branch_current[b.id]
            p_d = p_d + i_b.multiply(i_b, unit=WATT).scale(b.value)
        elif b.kind == INDUCTOR:
            i_b = sol.branch_current[b.id]
            w_m = w_m + i_b.multiply(i_b, unit=JOULE).scale(0.5 * b.value)
        else:
            u_b = sol.branch_voltage[b.id]
            w_e = w_e + u_b.multiply(u_b, unit=JOULE).scale(0.5 * b.value)
    return InstantaneousSet(
        p=p,
        p_dissipated=p_d,
        w_magnetic=w_m,
        w_electric=w_e,
        w_stored=w_m + w_e,
        x_reactive=w_m - w_e,
    )


def instantaneous_balance(iset: InstantaneousSet, t_grid) -> float:
    """Max over the grid of |dw/dt - (p - p_d)|, with dw/dt taken line-wise."""
    t_arr = np.asarray(t_grid, dtype=float)
    gap = (
        iset.w_stored.derivative().evaluate(t_arr)
        - iset.p.evaluate(t_arr)
        + iset.p_dissipated.evaluate(t_arr)
    )
    return float(np.max(np.abs(gap))) if t_arr.size else 0.0


def real_imaginary_power(u: LineSpectrum, i: LineSpectrum):
    """Real and imaginary power waveforms as exact line spectra.

    The real power is ``(u i + u_h i_h)/2`` and the imaginary power is
    ``(u_h i - u i_h)/2``, with the subscript h denoting the quadrature
    (Hilbert) companion.  Their means give active power and the Budeanu
    reactive total respectively.
    """
    u_h = u.hilbert()
    i_h = i.hilbert()
    p_real = (u.multiply(i, unit=WATT) + u_h.multiply(i_h, unit=WATT)).scale(0.5)
    q_imag = (u_h.multiply(i, unit=WATT) - u.multiply(i_h, unit=WATT)).scale(0.5, unit=VAR)
    return p_real, q_imag


# ----------------------------------------------------------------------
# time-scale layer


@dataclass(frozen=True)
class ScaledQuantities:
    """Energies and powers on a (t, s) grid; arrays have shape (len(t), len(s)).

    ``w_magnetic``, ``w_electric`` and ``p_dissipated`` are sums of squared
    analytic branch waveforms, so they are nonnegative everywhere.  ``p``
    and ``q`` are the real and imaginary parts of half the port voltage
    times the conjugate port current.  The attached beat expansions make
    the t- and s-derivatives of ``w_stored`` and ``x_reactive`` exact.
    """

    t: np.ndarray
    s: np.ndarray
    w_magnetic: np.ndarray
    w_electric: np.ndarray
    w_stored: np.ndarray
    x_reactive: np.ndarray
    p: np.ndarray
    q: np.ndarray
    p_dissipated: np.ndarray
    _forms: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        for name in ("t", "s"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def default_t_grid(source: LineSpectrum, n=256) -> np.ndarray:
    """n equispaced samples over one common period (endpoint excluded)."""
    period = source.period
    span = 2.0 * math.pi if period is None else period
    return np.linspace(0.0, span, n, endpoint=False)


def default_s_grid(source: LineSpectrum, n=32) -> np.ndarray:
    """s = 0 plus a geometric ladder spanning the damping range of all lines."""
    omegas = [w for w in source.omegas if w > 0.0]
    if omegas:
        lo, hi = 1e-3 / max(omegas), 10.0 / min(omegas)
    else:
        lo, hi = 1e-3, 10.0
    return np.concatenate(([0.0], np.geomspace(lo, hi, n)))


def scaled(sol: NetworkSolution, t_grid, s_grid) -> ScaledQuantities:
    """Evaluate every scaled quantity on the outer product of the two grids."""
    t_arr = np.asarray(t_grid, dtype=float)
    s_arr = np.asarray(s_grid, dtype=float)
    if np.any(s_arr < 0.0):
        raise ValueError("scale grid must be >= 0")
    shape = (t_arr.size, s_arr.size)
    w_m = np.zeros(shape)
    w_e = np.zeros(shape)
    p_d = np.zeros(shape)
    for b in sol.netlist.branches:
        if b.kind == INDUCTOR:
            mag2 = np.abs(sol.branch_current[b.id].analytic_grid(t_arr, s_arr)) ** 2
            w_m += 0.25 * b.value * mag2
        elif b.kind == CAPACITOR:
            mag2 = np.abs(sol.branch_voltage[b.id].analytic_grid(t_arr, s_arr)) ** 2
            w_e += 0.25 * b.value * mag2
        else:
            mag2 = np.abs(sol.branch_current[b.id].analytic_grid(t_arr, s_arr)) ** 2
            p_d += 0.5 * b.value * mag2
    u_a = sol.source.analytic_grid(t_arr, s_arr)
    i_a = sol.port_current.analytic_grid(t_arr, s_arr)
    s_complex = 0.5 * u_a * np.conj(i_a)

    base = _beat_base(sol)
    form_wm, form_we, form_pd = _stored_energy_forms(sol, base)
    form_w = form_wm.copy().add_inplace(form_we)
    form_x = form_wm.copy().add_inplace(form_we, -1.0)
    form_power = _analytic_product(sol.source, sol.port_current, base).scaled(0.5)
    return ScaledQuantities(
        t=t_arr,
        s=s_arr,
        w_magnetic=w_m,
        w_electric=w_e,
        w_stored=w_m + w_e,
        x_reactive=w_m - w_e,
        p=s_complex.real,
        q=s_complex.imag,
        p_dissipated=p_d,
        _forms={"w": form_w, "x": form_x, "power": form_power, "p_d": form_pd},
    )


def active_balance(sq: ScaledQuantities) -> float:
    """Max over the grid of |dW/dt - (P - P_d)|, with dW/dt exact per beat term."""
    dw_dt = sq._forms["w"].partial_t().evaluate(sq.t, sq.s).real
    gap = dw_dt - sq.p + sq.p_dissipated
    return float(np.max(np.abs(gap))) if gap.size else 0.0


def reactive_balance(sq: ScaledQuantities) -> float:
    """Max over the grid of |-dX/ds - Q|, with dX/ds exact per beat term."""
    dx_ds = sq._forms["x"].partial_s().evaluate(sq.t, sq.s).real
    gap = -dx_ds - sq.q
    return float(np.max(np.abs(gap))) if gap.size else 0.0


def d_dt_fd_gap(sq: ScaledQuantities, h) -> float:
    """Max gap between the exact t-derivative of W and a central difference."""
    form = sq._forms["w"]
    exact = form.partial_t().evaluate(sq.t, sq.s).real
    fd = (
        form.evaluate(sq.t + h, sq.s).real - form.evaluate(sq.t - h, sq.s).real
    ) / (2.0 * h)
    return float(np.max(np.abs(fd - exact))) if exact.size else 0.0


def d_ds_fd_gap(sq: ScaledQuantities, h) -> float:
    """Max gap between the exact s-derivative of X and a central difference.

    Only scale points with s >= h enter, so the difference stays inside
    the s >= 0 domain.
    """
    keep = sq.s >= h
    if not np.any(keep):
        return 0.0
    s_arr = sq.s[keep]
    form = sq._forms["x"]
    exact = form.partial_s().evaluate(sq.t, s_arr).real
    fd = (
        form.evaluate(sq.t, s_arr + h).real - form.evaluate(sq.t, s_arr - h).real
    ) / (2.0 * h)
    return float(np.max(np.abs(fd - exact)))


# ----------------------------------------------------------------------
# classical per-line summary


@dataclass(frozen=True)
class LinePower:
    """Active/reactive power carried by one frequency line."""

    omega: float
    u_rms: float
    i_rms: float
    p: float
    q: float


@dataclass(frozen=True)
class ClassicalSummary:
    """Per-line powers with Budeanu totals and rms-based apparent power."""

    lines: tuple[LinePower, ...]
    p_mean: float
    q_budeanu: float
    s_apparent: float
    u_rms: float
    i_rms: float

    def to_dict(self) -> dict:
        return {
            "lines": [
                {"omega": ln.omega, "u_rms": ln.u_rms, "i_rms": ln.i_rms,
                 "p": ln.p, "q": ln.q}
                for ln in self.lines
            ],
            "p_mean": self.p_mean,
            "q_budeanu": self.q_budeanu,
            "s_apparent": self.s_apparent,
            "u_rms": self.u_rms,
            "i_rms": self.i_rms,
        }


def classical_summary(sol: NetworkSolution) -> ClassicalSummary:
    """Per-line complex power and totals.

    Positive-frequency lines use half the product of peak phasors,
    so p + jq = U_rms I_rms e^{j(phase gap)}.  A DC line enters at full
    weight (p = U0*I0, q = 0), which keeps p_mean equal to the time
    average of the instantaneous port power.
    """
    entries = []
    p_total = 0.0
    q_total = 0.0
    for ph in sol.per_line:
        if ph.omega == 0.0:
            p_k = ph.port_voltage.real * ph.port_current.real
            q_k = 0.0
            u_rms = abs(ph.port_voltage)
            i_rms = abs(ph.port_current)
        else:
            s_k = 0.5 * ph.port_voltage * ph.port_current.conjugate()
            p_k, q_k = s_k.real, s_k.imag
            u_rms = abs(ph.port_voltage) / math.sqrt(2.0)
            i_rms = abs(ph.port_current) / math.sqrt(2.0)
        entries.append(LinePower(ph.omega, u_rms, i_rms, p_k, q_k))
        p_total += p_k
        q_total += q_k
    u_norm = sol.source.rms()
    i_norm = sol.port_current.rms()
    s_app = u_norm * i_norm
    # Cauchy-Schwarz guarantees S^2 >= P^2 + Q_B^2; a breach means a bug
    if p_total**2 + q_total**2 > s_app**2 * (1.0 + 1e-9):
        raise ConsistencyError(
            "apparent power fell below the per-line power totals"
        )
    return ClassicalSummary(
        lines=tuple(entries),
        p_mean=p_total,
        q_budeanu=q_total,
        s_apparent=s_app,
        u_rms=u_norm,
        i_rms=i_norm,
    )


def budeanu(sol: NetworkSolution) -> float:
    """Budeanu reactive total, computed twice and cross-checked.

    Route one takes the mean of the imaginary-power waveform at the port.
    Route two differentiates the time-averaged reactive stored energy
    against the scale at s = 0, which turns into 2*omega_k per line
    applied to the magnetic-minus-electric energy of that line.  The two
    routes probe different data (port waveforms versus branch interiors)
    and must agree to CROSS_CHECK_RTOL.
    """
    _, q_wave = real_imaginary_power(sol.source, sol.port_current)
    q_port = q_wave.mean()

    q_interior = 0.0
    for ph in sol.per_line:
        if ph.omega == 0.0:
            continue
        x_line = 0.0
        for b in sol.netlist.branches:
            if b.kind == INDUCTOR:
                x_line += 0.25 * b.value * abs(ph.current[b.id]) ** 2
            elif b.kind == CAPACITOR:
                x_line -= 0.25 * b.value * abs(ph.voltage[b.id]) ** 2
        q_interior += 2.0 * ph.omega * x_line

    s_app = sol.source.rms() * sol.port_current.rms()
    tol = CROSS_CHECK_RTOL * max(abs(q_port), abs(q_interior), _REACTIVE_FLOOR * s_app)
    if abs(q_port - q_interior) > tol:
        raise ConsistencyError(
            f"Budeanu routes disagree: port mean {q_port!r} vs "
            f"stored-energy route {q_interior!r}"
        )
    return q_port


def q_from_stored_energy(sol: NetworkSolution, omega) -> float:
    """Reactive power of a single-sinusoid solution from its stored energies.

    Computes 2*omega*(mean magnetic energy - mean electric energy) and
    cross-checks it against the per-line phasor value.  Only defined for
    a source with exactly one line, at the given frequency.
    """
    lines = sol.source.lines
    if len(lines) != 1 or lines[0].omega == 0.0:
        raise ValueError("stored-energy route requires a single sinusoidal source")
    if not math.isclose(lines[0].omega, omega, rel_tol=COMMENSURATE_RTOL):
        raise ValueError(
            f"source line at {lines[0].omega!r} rad/s, not at {omega!r} rad/s"
        )
    ph = sol.per_line[0]
    w_m = 0.0
    w_e = 0.0
    for b in sol.netlist.branches:
        if b.kind == INDUCTOR:
            w_m += 0.25 * b.value * abs(ph.current[b.id]) ** 2
        elif b.kind == CAPACITOR:
            w_e += 0.25 * b.value * abs(ph.voltage[b.id]) ** 2
    q_energy = 2.0 * ph.omega * (w_m - w_e)
    q_phasor = (0.5 * ph.port_voltage * ph.port_current.conjugate()).imag
    scale = max(abs(q_phasor), abs(ph.port_voltage) * abs(ph.port_current) * 0.5)
    if abs(q_energy - q_phasor) > 1e-10 * max(scale, 1e-300):
        raise ConsistencyError(
            f"stored-energy route {q_energy!r} disagrees with phasor route {q_phasor!r}"
        )
    return q_energy


def scaled_time_means(sol: NetworkSolution, s_grid):
    """Time-averaged reactive energy and reactive power as functions of s.

    Both come from the beat expansions, so each is an exact finite sum of
    decaying exponentials in s.  The averages obey the scale-domain
    balance: the reactive power equals minus the s-derivative of the
    reactive energy.
    """
    s_arr = np.asarray(s_grid, dtype=float)
    if np.any(s_arr < 0.0):
        raise ValueError("scale grid must be >= 0")
    base = _beat_base(sol)
    form_wm, form_we, _ = _stored_energy_forms(sol, base)
    form_x = form_wm.copy().add_inplace(form_we, -1.0)
    form_power = _analytic_product(sol.source, sol.port_current, base).scaled(0.5)
    mean_x = form_x.mean_at(s_arr).real
    mean_q = form_power.mean_at(s_arr).imag
    return mean_x, mean_q


# ----------------------------------------------------------------------
# balance report


@dataclass(frozen=True)
class BalanceReport:
    """Residuals of the three balance laws on declared grids.

    Each residual is an absolute maximum; the matching scale is the
    largest magnitude among the balance terms (for the two power laws
    including the full complex-power magnitude, of which P and Q are the
    components), so residual/scale is the relative figure of merit.  The
    fd gaps compare the exact derivatives with central differences as an
    independent sanity check.
    """

    instantaneous_residual: float
    instantaneous_scale: float
    active_residual: float
    active_scale: float
    reactive_residual: float
    reactive_scale: float
    worst_instantaneous_t: float
    worst_active_t: float
    worst_active_s: float
    worst_reactive_t: float
    worst_reactive_s: float
    d_dt_fd_gap: float
    d_ds_fd_gap: float
    n_t: int
    n_s: int
    t_span: tuple[float, float]
    s_span: tuple[float, float]

    @property
    def instantaneous_relative(self) -> float:
        return self.instantaneous_residual / max(self.instantaneous_scale, 1e-300)

    @property
    def active_relative(self) -> float:
        return self.active_residual / max(self.active_scale, 1e-300)

    @property
    def reactive_relative(self) -> float:
        return self.reactive_residual / max(self.reactive_scale, 1e-300)

    def to_dict(self) -> dict:
        return {
            "instantaneous": {
                "residual": self.instantaneous_residual,
                "scale": self.instantaneous_scale,
                "relative": self.instantaneous_relative,
                "worst_t": self.worst_instantaneous_t,
            },
            "active": {
                "residual": self.active_residual,
                "scale": self.active_scale,
                "relative": self.active_relative,
                "worst_t": self.worst_active_t,
                "worst_s": self.worst_active_s,
                "fd_gap": self.d_dt_fd_gap,
            },
            "reactive": {
                "residual": self.reactive_residual,
                "scale": self.reactive_scale,
                "relative": self.reactive_relative,
                "worst_t": self.worst_reactive_t,
                "worst_s": self.worst_reactive_s,
                "fd_gap": self.d_ds_fd_gap,
            },
            "grid": {
                "n_t": self.n_t,
                "n_s": self.n_s,
                "t_span": list(self.t_span),
                "s_span": list(self.s_span),
            },
        }


def verify_balances(sol: NetworkSolution, t_grid=None, s_grid=None) -> BalanceReport:
    """Evaluate all three balance laws and package residuals with context."""
    t_arr = default_t_grid(sol.source) if t_grid is None else np.asarray(t_grid, float)
    s_arr = default_s_grid(sol.source) if s_grid is None else np.asarray(s_grid, float)

    iset = instantaneous(sol)
    dw_dt = iset.w_stored.derivative().evaluate(t_arr)
    p_t = iset.p.evaluate(t_arr)
    pd_t = iset.p_dissipated.evaluate(t_arr)
    inst_gap = np.abs(dw_dt - p_t + pd_t)
    inst_idx = int(np.argmax(inst_gap)) if inst_gap.size else 0
    inst_scale = max(
        float(np.max(np.abs(p_t), initial=0.0)),
        float(np.max(np.abs(pd_t), initial=0.0)),
        float(np.max(np.abs(dw_dt), initial=0.0)),
    )

    sq = scaled(sol, t_arr, s_arr)
    dw_dt_grid = sq._forms["w"].partial_t().evaluate(t_arr, s_arr).real
    act_gap = np.abs(dw_dt_grid - sq.p + sq.p_dissipated)
    act_flat = int(np.argmax(act_gap)) if act_gap.size else 0
    act_it, act_is = np.unravel_index(act_flat, act_gap.shape) if act_gap.size else (0, 0)
    # P and Q are the real and imaginary parts of the half voltage-current
    # product, so the natural magnitude of either is that whole product.
    # Degenerate loads zero one law's terms exactly (a lossless load makes
    # the active law 0 = 0 - 0, a storage-free load does the same to the
    # reactive law); judged only against themselves those residuals are
    # noise over noise, judged against the power magnitude they stay
    # clean identities.
    pq_mag = float(np.max(np.hypot(sq.p, sq.q), initial=0.0))
    act_scale = max(
        pq_mag,
        float(np.max(np.abs(sq.p_dissipated), initial=0.0)),
        float(np.max(np.abs(dw_dt_grid), initial=0.0)),
    )

    dx_ds_grid = sq._forms["x"].partial_s().evaluate(t_arr, s_arr).real
    rea_gap = np.abs(-dx_ds_grid - sq.q)
    rea_flat = int(np.argmax(rea_gap)) if rea_gap.size else 0
    rea_it, rea_is = np.unravel_index(rea_flat, rea_gap.shape) if rea_gap.size else (0, 0)
    rea_scale = max(pq_mag, float(np.max(np.abs(dx_ds_grid), initial=0.0)))

    period = sol.source.period
    h_t = 1e-4 * (period if period is not None else 1.0)
    s_top = float(s_arr.max()) if s_arr.size else 1.0
    h_s = 1e-4 * max(s_top, 1e-6)
    return BalanceReport(
        instantaneous_residual=float(inst_gap.max()) if inst_gap.size else 0.0,
        instantaneous_scale=inst_scale,
        active_residual=float(act_gap.max()) if act_gap.size else 0.0,
        active_scale=act_scale,
        reactive_residual=float(rea_gap.max()) if rea_gap.size else 0.0,
        reactive_scale=rea_scale,
        worst_instantaneous_t=float(t_arr[inst_idx]) if t_arr.size else 0.0,
        worst_active_t=float(t_arr[act_it]) if act_gap.size else 0.0,
        worst_active_s=float(s_arr[act_is]) if act_gap.size else 0.0,
        worst_reactive_t=float(t_arr[rea_it]) if rea_gap.size else 0.0,
        worst_reactive_s=float(s_arr[rea_is]) if rea_gap.size else 0.0,
        d_dt_fd_gap=d_dt_fd_gap(sq, h_t),
        d_ds_fd_gap=d_ds_fd_gap(sq, h_s),
        n_t=int(t_arr.size),
        n_s=int(s_arr.size),
        t_span=(float(t_arr.min()), float(t_arr.max())) if t_arr.size else (0.0, 0.0),
        s_span=(float(s_arr.min()), float(s_arr.max())) if s_arr.size else (0.0, 0.0),
    )
