"""Sensor parameters and the structural 2x2 matrices of the two-cavity model.

All rates, detunings and frequencies are in units of the readout coupling
``kappa`` (``kappa = 1`` by default), delays in units of ``1/kappa``.
Frequencies are measured from the first cavity: ``H^f[0, 0] = omega_1`` is
zero for the default Hamiltonian and the drive sits at
``omega_L = omega_1 + delta``.

2x2 matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeRate, NonHermitianInput, ValidationError, ZeroKappa

TWO_PI = 2.0 * math.pi
HERMITIAN_ATOL = 1e-12

#: Alias documenting the role of a ``(2, 2)`` complex array.
ComplexMatrix2 = np.ndarray


class Topology(str, enum.Enum):
    """Coupling layout of the cavities to the dissipative reservoir."""

    GIANT = "giant"
    SMALL = "small"


class TransferConvention(str, enum.Enum):
    """How the dissipative block enters the system matrix.

    ``GENERAL`` adds ``2*pi*i*D_Z`` as in the frequency-domain solution of
    the Langevin equations. ``EXPLICIT`` adds the real block
    ``gamma*(1 + e^{i theta})(...)`` (or ``gamma/2`` for small cavities)
    without the factor ``i``. Only ``GENERAL`` reproduces the reference
    noise anchors, so it is the default.
    """

    GENERAL = "general"
    EXPLICIT = "explicit"


DEFAULT_CONVENTION = TransferConvention.GENERAL


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex).reshape(2, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SensorParams:
    """Validated physical parameters. Build with :func:`build_params`."""

    delta: float
    delta12: float
    j_coupling: float
    gamma_gain: float
    gamma_loss: float
    kappa: float
    phi: float
    tau: float
    beta: float
    v_matrix: np.ndarray
    h_free: np.ndarray

    @property
    def y_coupling(self) -> float:
        """Real gain coupling ``Y_1 = Y_2`` with ``Gamma = 2 pi Y^2``."""
        return math.sqrt(self.gamma_gain / TWO_PI)

    @property
    def z_coupling(self) -> float:
        """Real dissipative coupling ``Z_1 = Z_2`` with ``gamma = 2 pi Z^2``."""
        return math.sqrt(self.gamma_loss / TWO_PI)

    @property
    def omega_drive(self) -> float:
        """Drive frequency ``omega_L`` in the frame where frequencies are quoted."""
        return float(self.h_free[0, 0].real) + self.delta

    @property
    def delay_phase(self) -> float:
        """``omega_L * tau`` reduced to ``[0, 2 pi)``: ``delta*tau + phi``."""
        return (self.delta * self.tau + self.phi) % TWO_PI

    def replace(self, **changes) -> "SensorParams":
        """Return a re-validated copy with ``changes`` applied.

        Changing ``delta12`` or ``j_coupling`` rebuilds ``h_free`` unless a
        new ``h_free`` is passed as well.
        """
        fields = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        if ("delta12" in changes or "j_coupling" in changes) and "h_free" not in changes:
            fields["h_free"] = None
        fields.update(changes)
        return build_params(**fields)

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["v_matrix"] = [[complex(x) for x in row] for row in self.v_matrix]
        out["h_free"] = [[complex(x) for x in row] for row in self.h_free]
        return out


def _check_hermitian(name: str, m: np.ndarray) -> None:
    asym = np.max(np.abs(m - m.conj().T))
    if asym > HERMITIAN_ATOL:
        raise NonHermitianInput(f"{name} is not Hermitian (max asymmetry {asym:.3g})", key=name)


def build_params(
    delta: float = 0.0,
    delta12: float = 0.0,
    j_coupling: float = 0.1,
    gamma_gain: float = 0.1,
    gamma_loss: float = 0.1,
    kappa: float = 1.0,
    phi: float = 0.0,
    tau: float = 0.0,
    beta: float = 1.0,
    v_matrix=None,
    h_free=None,
) -> SensorParams:
    """Validate raw inputs and return a :class:`SensorParams`.

    Defaults are the baseline operating point of the numerical study:
    ``delta = delta12 = 0``, ``J = Gamma = gamma = 0.1 kappa``, ``V`` all ones.

    When ``h_free`` is omitted it is built as ``[[0, J], [J, -delta12]]``
    (frequencies relative to the first cavity). When it is given it takes
    precedence and ``delta12``/``j_coupling`` are re-derived from it.

    Raises
    ------
    ZeroKappa
        ``kappa`` is not strictly positive.
    NegativeRate
        A rate, the delay or the drive amplitude is negative.
    NonHermitianInput
        ``v_matrix`` or ``h_free`` is not Hermitian to ``1e-12``.
    """
    values = {
        "delta": delta,
        "delta12": delta12,
        "j_coupling": j_coupling,
        "gamma_gain": gamma_gain,
        "gamma_loss": gamma_loss,
        "kappa": kappa,
        "phi": phi,
        "tau": tau,
        "beta": beta,
    }
    for key, value in values.items():
        try:
            values[key] = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{key} must be a real number, got {value!r}", key=key) from None
        if not math.isfinite(values[key]):
            raise ValidationError(f"{key} must be finite", key=key)

    if values["kappa"] <= 0.0:
        raise ZeroKappa("kappa must be > 0", key="kappa")
    for key in ("gamma_gain", "gamma_loss", "tau", "beta"):
        if values[key] < 0.0:
            raise NegativeRate(f"{key} must be >= 0, got {values[key]}", key=key)

    v = _frozen(np.ones((2, 2)) if v_matrix is None else v_matrix)
    _check_hermitian("v_matrix", v)

    if h_free is None:
        h = _frozen([[0.0, values["j_coupling"]], [values["j_coupling"], -values["delta12"]]])
    else:
        h = _frozen(h_free)
        _check_hermitian("h_free", h)
        values["delta12"] = float((h[0, 0] - h[1, 1]).real)
        values["j_coupling"] = float(h[0, 1].real)

    values["phi"] = values["phi"] % TWO_PI
    return SensorParams(v_matrix=v, h_free=h, **values)


def phase_factor(p: SensorParams, n: int, omega: float = 0.0) -> complex:
    """``exp(i (n omega_L - omega) tau)`` with ``omega_L tau -> delta tau + phi``.

    The phase is reduced modulo ``2 pi`` before exponentiation.
    """
    theta = (n * (p.delta * p.tau + p.phi) - omega * p.tau) % TWO_PI
    return complex(math.cos(theta), math.sin(theta))


def gain_matrix(p: SensorParams) -> np.ndarray:
    """``G_Y = Y Y^dagger`` for equal real couplings: every entry ``Gamma/(2 pi)``."""
    return np.full((2, 2), p.gamma_gain / TWO_PI, dtype=complex)


def dissipation_matrix_giant(p: SensorParams, omega: float = 0.0) -> np.ndarray:
    """Delay-phased dissipation matrix of the two giant cavities.

    Entry ``(1, 2)`` is identically zero while ``(2, 1)`` is generically not:
    the second cavity is driven by the delayed emission of the first one,
    never the reverse.
    """
    z2 = p.gamma_loss / TWO_PI
    e1 = phase_factor(p, 1, omega)
    e2 = phase_factor(p, 2, omega)
    e3 = phase_factor(p, 3, omega)
    diag = z2 * (1.0 + e1)
    return np.array([[diag, 0.0], [z2 * (e1 + 2.0 * e2 + e3), diag]], dtype=complex)


def dissipation_matrix_small(p: SensorParams) -> np.ndarray:
    """``D_Z^S = Z Z^dagger / 2``: every entry ``gamma/(4 pi)``."""
    return np.full((2, 2), p.gamma_loss / (2.0 * TWO_PI), dtype=complex)


def dissipation_matrix(p: SensorParams, topology: Topology, omega: float = 0.0) -> np.ndarray:
    if Topology(topology) is Topology.GIANT:
        return dissipation_matrix_giant(p, omega)
    return dissipation_matrix_small(p)


def drive_vector(p: SensorParams) -> np.ndarray:
    """Deterministic (coherent-drive) part of the input vector, per unit ``2 pi delta[omega]``."""
    return np.array([math.sqrt(p.kappa) * p.beta, 0.0], dtype=complex)


def dissipative_input_vector(p: SensorParams, topology: Topology, omega: float = 0.0) -> np.ndarray:
    """Coefficients multiplying the dissipative-reservoir input ``D_in[omega]``."""
    z = p.z_coupling
    root = math.sqrt(TWO_PI)
    if Topology(topology) is Topology.SMALL:
        return np.array([root * z, root * z], dtype=complex)
    e1, e2, e3 = (phase_factor(p, n, omega) for n in (1, 2, 3))
    return np.array([root * z * (1.0 + e1), root * z * (e2 + e3)], dtype=complex)
