"""Steady-state (frequency-domain) solution and the homodyne figures of merit.

Everything is evaluated at zero frequency unless an ``omega`` argument says
otherwise. Reported quantities are relative: the divergent ``2 pi beta
delta[0]`` factor and the measurement window ``T`` live in the unit labels.

======================  ==========================================
quantity                unit
======================  ==========================================
``lambda_reduced``      ``2 pi beta delta[0]``
``rel_signal``          ``2 eps^2 / T``
noise terms             ``kappa / 2T`` (shot noise is exactly 1)
``n_tot_reduced``       ``|2 pi delta[0] beta|^2``
======================  ==========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveNoise, SingularSystem
from .model import (
    DEFAULT_CONVENTION,
    TWO_PI,
    SensorParams,
    Topology,
    TransferConvention,
    build_params,
    dissipation_matrix,
    gain_matrix,
    phase_factor,
)

SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class NoiseBreakdown:
    shot: float
    reflective_gain: float
    dissipative: complex
    total_complex: complex
    total_measured: float
    xi: float


@dataclass(frozen=True, eq=False)
class MetricsReport:
    chi: np.ndarray
    lambda_reduced: complex
    homodyne_angle: float
    rel_signal_per_photon: float
    noise: NoiseBreakdown
    rel_snr_per_photon: float
    n_tot_reduced: float


def _readout_projector(kappa: float) -> np.ndarray:
    return np.array([[kappa, 0.0], [0.0, 0.0]], dtype=complex)


def system_matrix(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    convention: TransferConvention = DEFAULT_CONVENTION,
    omega: float = 0.0,
    epsilon: float = 0.0,
) -> np.ndarray:
    """The matrix ``K`` whose inverse gives ``chi = i kappa K^-1``.

    ``GENERAL``::

        K = (omega_L + omega) I - H[eps] - i pi G_Y + 2 pi i D_Z + i kappa~/2

    ``EXPLICIT`` is assembled from ``delta``, ``delta12`` and ``J`` with the
    dissipative block added without the factor ``i``; at ``omega = 0`` and
    ``eps = 0`` it is literally the printed parameterised matrix.
    """
    topology = Topology(topology)
    convention = TransferConvention(convention)
    if convention is TransferConvention.GENERAL:
        h = p.h_free + epsilon * p.v_matrix
        k = (p.omega_drive + omega) * np.eye(2) - h
        k = k - 1j * math.pi * gain_matrix(p)
        k = k + 2j * math.pi * dissipation_matrix(p, topology, omega)
        return k + 0.5j * _readout_projector(p.kappa)

    half_gain = 0.5j * p.gamma_gain
    d = p.delta + omega
    base = np.array(
        [
            [d - half_gain + 0.5j * p.kappa, -p.j_coupling - half_gain],
            [-p.j_coupling - half_gain, d + p.delta12 - half_gain],
        ],
        dtype=complex,
    )
    g = p.gamma_loss
    if topology is Topology.GIANT:
        e1 = phase_factor(p, 1, omega)
        e2 = phase_factor(p, 2, omega)
        block = g * (1.0 + e1) * np.array([[1.0, 0.0], [e1 + e2, 1.0]], dtype=complex)
    else:
        block = 0.5 * g * np.ones((2, 2), dtype=complex)
    return base + block - epsilon * p.v_matrix


def _describe(p: SensorParams, topology, convention) -> str:
    return (
        f"topology={Topology(topology).value} convention={TransferConvention(convention).value} "
        f"delta={p.delta:g} delta12={p.delta12:g} J={p.j_coupling:g} Gamma={p.gamma_gain:g} "
        f"gamma={p.gamma_loss:g} kappa={p.kappa:g} phi={p.phi:g} tau={p.tau:g}"
    )


def transfer_matrix(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    convention: TransferConvention = DEFAULT_CONVENTION,
    omega: float = 0.0,
    epsilon: float = 0.0,
) -> np.ndarray:
    """State-transfer matrix ``chi[omega; eps] = i kappa K^-1``.

    Raises :class:`SingularSystem` when ``|det K| <= 1e-14 ||K||_F^2``.
    """
    k = system_matrix(p, topology, convention, omega, epsilon)
    det = k[0, 0] * k[1, 1] - k[0, 1] * k[1, 0]
    scale = float(np.sum(np.abs(k) ** 2))
    if not abs(det) > SINGULAR_RTOL * scale:
        raise SingularSystem(
            f"singular system matrix (|det K| = {abs(det):.3g}) at {_describe(p, topology, convention)}",
            params=p,
        )
    adj = np.array([[k[1, 1], -k[0, 1]], [-k[1, 0], k[0, 0]]], dtype=complex)
    return (1j * p.kappa / det) * adj


def _chi0(p, topology, convention):
    return transfer_matrix(p, topology, convention, 0.0, 0.0)


def _lambda_from_chi(p: SensorParams, chi: np.ndarray) -> complex:
    return complex(1j / p.kappa * (chi @ p.v_matrix @ chi)[0, 0])


def response_coefficient(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> complex:
    """Linear response of the mean output to ``eps``, in units of ``2 pi beta delta[0]``:
    ``(i/kappa) (chi V chi)_11``."""
    return _lambda_from_chi(p, _chi0(p, topology, convention))


def response_coefficient_fd(
    p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION, step: float = 1e-6
) -> complex:
    """Central finite difference ``-(chi_11[+h] - chi_11[-h]) / 2h``.

    Independent of the closed-form derivative; used to cross-check
    :func:`response_coefficient`.
    """
    plus = transfer_matrix(p, topology, convention, 0.0, step)[0, 0]
    minus = transfer_matrix(p, topology, convention, 0.0, -step)[0, 0]
    return complex(-(plus - minus) / (2.0 * step))


def homodyne_angle(lam: complex) -> float:
    """Local-oscillator angle that puts the whole response in the measured quadrature."""
    return -math.atan2(lam.imag, lam.real)


def _signal_from_chi(p, chi) -> float:
    num = abs((chi @ p.v_matrix @ chi)[0, 0]) ** 2
    den = float((chi.conj().T @ chi)[0, 0].real)
    return num / den


def relative_signal_per_photon(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> float:
    """``|(chi V chi)_11|^2 / (chi^dagger chi)_11`` in units of ``2 eps^2 / T``."""
    return _signal_from_chi(p, _chi0(p, topology, convention))


def _noise_from_chi(p: SensorParams, topology, chi: np.ndarray) -> NoiseBreakdown:
    xi = abs(chi[0, 0] - 1.0) ** 2 - 1.0
    # theta[0] := 0
    gain = 2.0 * xi if xi > 0.0 else 0.0
    z = p.z_coupling
    if Topology(topology) is Topology.GIANT:
        theta = p.delay_phase
        e1 = phase_factor(p, 1)
        e2 = phase_factor(p, 2)
        amp = abs(z * chi[0, 0] + z * chi[0, 1] * e2) ** 2
        dissipative = 2.0 * TWO_PI / p.kappa * (1.0 + math.cos(theta)) * (1.0 + e1) * amp
    else:
        dissipative = complex(2.0 * TWO_PI / p.kappa * abs(z * chi[0, 0] + z * chi[0, 1]) ** 2)
    total = 1.0 + gain + dissipative
    return NoiseBreakdown(
        shot=1.0,
        reflective_gain=gain,
        dissipative=complex(dissipative),
        total_complex=complex(total),
        total_measured=float(total.real),
        xi=float(xi),
    )


def output_noise(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> NoiseBreakdown:
    """Output noise in units of ``kappa / 2T``.

    Shot noise plus the Heaviside-gated reflective gain ``2 Xi theta[Xi]`` plus
    the dissipative term. For giant cavities the dissipative term is complex;
    the measured noise is its real part.
    """
    return _noise_from_chi(p, topology, _chi0(p, topology, convention))


def _noise_matrix_form_from_chi(p, topology, chi) -> complex:
    chi_h = chi.conj().T
    readout = 1.0 + abs(chi[0, 0]) ** 2 - 2.0 * chi[0, 0].real
    gain = TWO_PI / p.kappa * (chi @ gain_matrix(p) @ chi_h)[0, 0]
    z = p.z_coupling
    if Topology(topology) is Topology.GIANT:
        e1 = phase_factor(p, 1)
        zt = np.array([z, z * phase_factor(p, 2)], dtype=complex)
        diss = TWO_PI / p.kappa * (1.0 + e1) ** 2 * (chi @ np.outer(zt, zt.conj()) @ chi_h)[0, 0]
    else:
        zs = np.array([z, z], dtype=complex)
        diss = 2.0 * TWO_PI / p.kappa * (chi @ np.outer(zs, zs) @ chi_h)[0, 0]
    return complex(readout + gain + diss)


def output_noise_matrix_form(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> complex:
    """Noise from the unreduced matrix expression (no Heaviside step).

    The gain contribution is ``(2 pi / kappa)(chi G_Y chi^dagger)_11`` and the
    giant dissipative factor is ``(1 + e^{i theta})^2``. Kept to test the
    reduction to the Heaviside form; it does not feed the figures.
    """
    return _noise_matrix_form_from_chi(p, topology, _chi0(p, topology, convention))


def compare_noise_forms(p, phis, topology=Topology.GIANT, convention=DEFAULT_CONVENTION, atol=1e-9):
    """Scan ``phi`` and report where the reduced and matrix noise forms agree.

    Returns a dict of arrays ``phi``, ``reduced``, ``matrix`` (complex) and the
    boolean mask ``agree`` (``|reduced - matrix| <= atol``).
    """
    phis = np.asarray(phis, dtype=float)
    reduced = np.empty(phis.size, dtype=complex)
    matrix = np.empty(phis.size, dtype=complex)
    for i, phi in enumerate(phis):
        q = p.replace(phi=phi)
        chi = _chi0(q, topology, convention)
        reduced[i] = _noise_from_chi(q, topology, chi).total_complex
        matrix[i] = _noise_matrix_form_from_chi(q, topology, chi)
    return {
        "phi": phis,
        "reduced": reduced,
        "matrix": matrix,
        "agree": np.abs(reduced - matrix) <= atol,
    }


def relative_snr_per_photon(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> float:
    """Signal per photon over measured noise (units ``4 eps^2 / kappa``)."""
    return metrics(p, topology, convention).rel_snr_per_photon


def reflection_coefficient(p, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> complex:
    """Coherent reflection amplitude ``1 - chi_11`` of the readout drive."""
    return complex(1.0 - _chi0(p, topology, convention)[0, 0])


def metrics(p: SensorParams, topology=Topology.GIANT, convention=DEFAULT_CONVENTION) -> MetricsReport:
    """All zero-frequency figures of merit from a single evaluation of ``chi``."""
    chi = _chi0(p, topology, convention)
    chi.setflags(write=False)
    lam = _lambda_from_chi(p, chi)
    signal = _signal_from_chi(p, chi)
    noise = _noise_from_chi(p, topology, chi)
    if not noise.total_measured > 0.0:
        raise NonpositiveNoise(
            f"measured noise {noise.total_measured:.6g} <= 0 at {_describe(p, topology, convention)}"
        )
    return MetricsReport(
        chi=chi,
        lambda_reduced=lam,
        homodyne_angle=homodyne_angle(lam),
        rel_signal_per_photon=signal,
        noise=noise,
        rel_snr_per_photon=signal / noise.total_measured,
        n_tot_reduced=float((chi.conj().T @ chi)[0, 0].real) / p.kappa,
    )


# Reference noise minima: (gamma / Gamma, phi / pi, measured noise).
NOISE_ANCHORS = ((0.5, 0.76, 1.18), (1.0, 0.84, 1.04), (2.0, 0.89, 1.01))
NOISE_ANCHOR_TOL = 0.05


@dataclass(frozen=True)
class CalibrationReport:
    values: dict
    passes: dict
    selected: TransferConvention | None

    def lines(self) -> list[str]:
        out = []
        for conv, vals in self.values.items():
            shown = ", ".join(
                f"gamma={g:g}Gamma phi={ph:g}pi: N={v:.4f} (target {t:g})"
                for (g, ph, t), v in zip(NOISE_ANCHORS, vals)
            )
            status = "PASS" if self.passes[conv] else "FAIL"
            out.append(f"{conv}: {status} [{shown}]")
        sel = self.selected.value if self.selected is not None else "none"
        out.append(f"selected convention: {sel}")
        return out

    def as_dict(self) -> dict:
        return {
            "anchors": [list(a) for a in NOISE_ANCHORS],
            "tolerance": NOISE_ANCHOR_TOL,
            "values": self.values,
            "passes": self.passes,
            "selected": self.selected.value if self.selected is not None else None,
        }


def calibration_report(gamma_gain: float = 0.1) -> CalibrationReport:
    """Evaluate the measured-noise anchors under both conventions.

    The first convention that matches all anchors within ``0.05`` is
    selected, with ``GENERAL`` tried first.
    """
    values = {}
    passes = {}
    for conv in (TransferConvention.GENERAL, TransferConvention.EXPLICIT):
        vals = []
        for g_ratio, phi_pi, _ in NOISE_ANCHORS:
            p = build_params(gamma_gain=gamma_gain, j_coupling=gamma_gain,
                             gamma_loss=g_ratio * gamma_gain, phi=phi_pi * math.pi)
            try:
                vals.append(output_noise(p, Topology.GIANT, conv).total_measured)
            except SingularSystem:
                vals.append(float("nan"))
        values[conv.value] = vals
        passes[conv.value] = all(
            abs(v - target) <= NOISE_ANCHOR_TOL for v, (_, _, target) in zip(vals, NOISE_ANCHORS)
        )
    selected = next((TransferConvention(c) for c, ok in passes.items() if ok), None)
    return CalibrationReport(values=values, passes=passes, selected=selected)
