"""Time-domain integration of the mean-field delay equations.

The slowly varying amplitudes obey

    da1/dt = F11 a1 - gamma e^{i theta} a1(t - tau) + F12 a2 - i sqrt(kappa) beta
    da2/dt = F22 a2 - gamma e^{i theta} a2(t - tau) + F21 a1
             - gamma e^{i theta} (a1(t - tau) + 2 e^{i theta} a1(t - 2 tau)
                                  + e^{2 i theta} a1(t - 3 tau))

with ``theta = omega_L tau`` and the reservoir noise dropped (vacuum inputs
have zero mean). The small-cavity layout has no delays and an instantaneous
``-(gamma/2)(a1 + a2)`` damping on both cavities instead.

Integration is classical RK4 on a uniform grid with ``tau`` an integer
number of steps; half-step history values are linear interpolations of the
stored samples. Because the stepping is built directly from the equations
above (not from the frequency-domain system matrix), its steady state is an
independent check of :mod:`giantsensor.transfer`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidHorizon, NotConverged, StepTooLarge
from .model import SensorParams, Topology, TransferConvention
from .transfer import response_coefficient, transfer_matrix

MAX_DT = 0.01  # in units of 1/kappa
MIN_HORIZON = 50.0
RESIDUAL_WINDOW = 5.0
BLOWUP_FACTOR = 1e6


@numba.njit(cache=True)
def _delayed(hist, n, lag, half, stage_value):
    # value of the stored series at t_n + half*dt/2 - lag*dt (lag >= 1)
    if lag == 0:
        return stage_value
    if half == 0:
        i = n - lag
        return hist[i] if i >= 0 else 0j
    if half == 2:
        i = n - lag + 1
        return hist[i] if i >= 0 else 0j
    i = n - lag
    lo = hist[i] if i >= 0 else 0j
    hi = hist[i + 1] if i + 1 >= 0 else 0j
    return 0.5 * (lo + hi)


@numba.njit(cache=True)
def _rhs(a1, a2, n, half, h1, h2, m, coef, e):
    f11 = coef[0]
    f12 = coef[1]
    f21 = coef[2]
    f22 = coef[3]
    self_delay = coef[4]
    cross = coef[5]
    drive = coef[6]
    d1 = _delayed(h1, n, m, half, a1)
    d2 = _delayed(h2, n, m, half, a2)
    da1 = f11 * a1 + self_delay * d1 + f12 * a2 - drive
    da2 = f22 * a2 + self_delay * d2 + f21 * a1
    if cross != 0:
        d1b = _delayed(h1, n, 2 * m, half, a1)
        d1c = _delayed(h1, n, 3 * m, half, a1)
        da2 -= cross * (d1 + 2.0 * e * d1b + e * e * d1c)
    return da1, da2


@numba.njit(cache=True)
def _integrate(coef, e, m, dt, n_steps, limit):
    h1 = np.zeros(n_steps + 1, dtype=np.complex128)
    h2 = np.zeros(n_steps + 1, dtype=np.complex128)
    for n in range(n_steps):
        a1 = h1[n]
        a2 = h2[n]
        k1a, k1b = _rhs(a1, a2, n, 0, h1, h2, m, coef, e)
        k2a, k2b = _rhs(a1 + 0.5 * dt * k1a, a2 + 0.5 * dt * k1b, n, 1, h1, h2, m, coef, e)
        k3a, k3b = _rhs(a1 + 0.5 * dt * k2a, a2 + 0.5 * dt * k2b, n, 1, h1, h2, m, coef, e)
        k4a, k4b = _rhs(a1 + dt * k3a, a2 + dt * k3b, n, 2, h1, h2, m, coef, e)
        h1[n + 1] = a1 + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        h2[n + 1] = a2 + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        if abs(h1[n + 1]) + abs(h2[n + 1]) > limit:
            return h1, h2, n + 1
    return h1, h2, n_steps


@dataclass(frozen=True)
class DelayState:
    """Amplitudes at time ``t`` plus the stored history reaching back ``3 tau``."""

    t: float
    a1: complex
    a2: complex
    history: np.ndarray  # rows (t, a1, a2), oldest first


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    dt: float
    params: SensorParams
    topology: Topology
    epsilon: float

    def state(self, index: int = -1) -> DelayState:
        index = index % self.t.size
        lag = 3 * int(round(self.params.tau / self.dt)) + 1
        lo = max(0, index - lag)
        hist = np.column_stack([self.t[lo:index + 1], self.a1[lo:index + 1], self.a2[lo:index + 1]])
        return DelayState(float(self.t[index]), complex(self.a1[index]), complex(self.a2[index]), hist)

    def to_csv(self, path, stride: int = 1) -> None:
        """Write columns ``t, re_a1, im_a1, re_a2, im_a2``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_a1", "im_a1", "re_a2", "im_a2"])
            for i in range(0, self.t.size, stride):
                a1, a2 = self.a1[i], self.a2[i]
                w.writerow([repr(float(v)) for v in (self.t[i], a1.real, a1.imag, a2.real, a2.imag)])


@dataclass(frozen=True)
class SteadyState:
    a1: complex
    a2: complex
    residual: float
    b_out: complex


def default_dt(p: SensorParams) -> float:
    """Largest admissible step: ``min(tau/20, 0.01/kappa)``, dividing ``tau`` evenly."""
    limit = MAX_DT / p.kappa
    if p.tau > 0.0:
        limit = min(limit, p.tau / 20.0)
        return p.tau / math.ceil(p.tau / limit - 1e-9)
    return limit


def _coefficients(p: SensorParams, topology: Topology, epsilon: float):
    h = p.h_free + epsilon * p.v_matrix
    w = p.omega_drive
    half_gain = 0.5 * p.gamma_gain
    g = p.gamma_loss
    f11 = 1j * (w - h[0, 0]) + half_gain - 0.5 * p.kappa
    f22 = 1j * (w - h[1, 1]) + half_gain
    f12 = -1j * h[0, 1] + half_gain
    f21 = -1j * h[1, 0] + half_gain
    drive = 1j * math.sqrt(p.kappa) * p.beta
    theta = p.delay_phase
    e = complex(math.cos(theta), math.sin(theta))
    if Topology(topology) is Topology.GIANT:
        f11 -= g
        f22 -= g
        self_delay = -g * e
        cross = g * e
    else:
        f11 -= 0.5 * g
        f22 -= 0.5 * g
        f12 -= 0.5 * g
        f21 -= 0.5 * g
        self_delay = 0j
        cross = 0j
    coef = np.array([f11, f12, f21, f22, self_delay, cross, drive], dtype=np.complex128)
    return coef, e


def integrate_mean_field(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    epsilon: float = 0.0,
    dt: float | None = None,
    horizon: float = MIN_HORIZON,
) -> Trajectory:
    """Integrate from an empty system with the drive switched on at ``t = 0``.

    ``dt`` defaults to :func:`default_dt`; an explicit ``dt`` is shrunk so that
    ``tau`` is an integer number of steps.

    Raises
    ------
    InvalidHorizon
        ``horizon < 50 / kappa``.
    StepTooLarge
        ``dt`` exceeds ``min(tau/20, 0.01/kappa)`` or the amplitudes grow past
        ``1e6 |beta|`` (numerical or physical instability).
    """
    topology = Topology(topology)
    if not horizon >= MIN_HORIZON / p.kappa:
        raise InvalidHorizon(f"horizon must be >= {MIN_HORIZON}/kappa, got {horizon}", key="horizon")
    limit_dt = default_dt(p)
    if dt is None:
        dt = limit_dt
    elif dt > limit_dt * (1.0 + 1e-12) or dt <= 0.0:
        raise StepTooLarge(f"dt={dt} exceeds the admissible step {limit_dt:.6g}")
    m = 0
    if topology is Topology.GIANT and p.tau > 0.0:
        m = int(math.ceil(p.tau / dt - 1e-9))
        dt = p.tau / m
    n_steps = int(math.ceil(horizon / dt - 1e-9))
    coef, e = _coefficients(p, topology, epsilon)
    limit = BLOWUP_FACTOR * abs(p.beta)
    h1, h2, done = _integrate(coef, e, m, dt, n_steps, limit if limit > 0 else np.inf)
    if done < n_steps:
        raise StepTooLarge(
            f"amplitude exceeded {BLOWUP_FACTOR:g}*|beta| at t={done * dt:.4g}; "
            "the parameter set is unstable or dt is too large"
        )
    t = np.arange(n_steps + 1) * dt
    return Trajectory(t, h1, h2, dt, p, topology, epsilon)


def steady_state(trajectory: Trajectory, tol: float = 1e-10) -> SteadyState:
    """Final amplitudes, provided ``max |da/dt|`` over the last ``5/kappa`` is ``<= tol``."""
    p = trajectory.params
    window = int(math.ceil(RESIDUAL_WINDOW / p.kappa / trajectory.dt))
    if window + 1 > trajectory.t.size:
        raise InvalidHorizon("trajectory shorter than the residual window", key="horizon")
    tail1 = trajectory.a1[-window - 1:]
    tail2 = trajectory.a2[-window - 1:]
    residual = max(np.max(np.abs(np.diff(tail1))), np.max(np.abs(np.diff(tail2)))) / trajectory.dt
    residual = float(residual)
    if not residual <= tol:
        raise NotConverged(f"residual {residual:.3g} > tol {tol:.3g}", residual=residual)
    a1 = complex(trajectory.a1[-1])
    a2 = complex(trajectory.a2[-1])
    return SteadyState(a1, a2, residual, p.beta - 1j * math.sqrt(p.kappa) * a1)


def run_to_steady_state(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    epsilon: float = 0.0,
    tol: float = 1e-10,
    dt: float | None = None,
    max_horizon: float = 2.0e4,
) -> tuple[SteadyState, float]:
    """Integrate with a doubling horizon until :func:`steady_state` converges.

    ``tol`` is relative to ``|beta| / sqrt(kappa)``. Returns the steady state
    and the horizon that achieved it.
    """
    abs_tol = tol * max(abs(p.beta) / math.sqrt(p.kappa), 1e-300)
    horizon = MIN_HORIZON / p.kappa
    last = None
    while horizon <= max_horizon:
        try:
            traj = integrate_mean_field(p, topology, epsilon, dt, horizon)
        except StepTooLarge as exc:
            if dt is not None and dt > default_dt(p) * (1.0 + 1e-12):
                raise
            raise NotConverged(f"diverging trajectory (unstable parameters): {exc}") from exc
        try:
            return steady_state(traj, abs_tol), horizon
        except NotConverged as exc:
            last = exc
        horizon *= 2.0
    raise NotConverged(
        f"no steady state within horizon {max_horizon:g}: {last}",
        residual=last.residual if last else float("nan"),
    )


def fixed_point(p: SensorParams, topology: Topology = Topology.GIANT, epsilon: float = 0.0) -> np.ndarray:
    """Stationary point of the delay equations (all delayed values equal to the present).

    Solves the 2x2 linear system assembled from the equation coefficients.
    It exists whether or not the dynamics are stable, which makes it the
    reference where :func:`run_to_steady_state` cannot converge.
    """
    coef, e = _coefficients(p, topology, epsilon)
    f11, f12, f21, f22, self_delay, cross, drive = coef
    a = np.array(
        [[f11 + self_delay, f12], [f21 - cross * (1.0 + 2.0 * e + e * e), f22 + self_delay]],
        dtype=complex,
    )
    return np.linalg.solve(a, np.array([drive, 0.0], dtype=complex))


def is_stable(p: SensorParams, topology: Topology = Topology.GIANT, epsilon: float = 0.0) -> bool:
    """Linear stability in the short-delay limit (all delays set to zero).

    Only a heuristic for ``tau > 0``; the delay equations themselves decide
    through :func:`run_to_steady_state`.
    """
    coef, e = _coefficients(p, topology, epsilon)
    f11, f12, f21, f22, self_delay, cross, _ = coef
    a = np.array(
        [[f11 + self_delay, f12], [f21 - cross * (1.0 + 2.0 * e + e * e), f22 + self_delay]],
        dtype=complex,
    )
    return bool(np.max(np.linalg.eigvals(a).real) < 0.0)


@dataclass(frozen=True)
class OracleReport:
    steady: SteadyState
    expected_a1: complex
    expected_a2: complex
    deviation: float
    b_out_deviation: float
    horizon: float


def oracle_check(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    epsilon: float = 0.0,
    tol: float = 1e-10,
    dt: float | None = None,
    max_horizon: float = 2.0e4,
) -> OracleReport:
    """Compare the integrated steady state with ``chi/(i kappa)`` times the drive.

    ``deviation`` is ``max_i |a_i - abar_i| / max_i |abar_i|``;
    ``b_out_deviation`` compares ``<B_out>`` with ``(1 - chi_11) beta``.
    The frequency-domain side always uses the general convention, which is
    the one the delay equations reduce to.
    """
    chi = transfer_matrix(p, topology, TransferConvention.GENERAL, 0.0, epsilon)
    drive = math.sqrt(p.kappa) * p.beta
    expected = chi[:, 0] * drive / (1j * p.kappa)
    ss, horizon = run_to_steady_state(p, topology, epsilon, tol, dt, max_horizon)
    got = np.array([ss.a1, ss.a2])
    scale = float(np.max(np.abs(expected)))
    deviation = float(np.max(np.abs(got - expected)) / scale) if scale > 0 else float(np.max(np.abs(got)))
    b_expected = (1.0 - chi[0, 0]) * p.beta
    b_scale = abs(b_expected)
    b_dev = abs(ss.b_out - b_expected)
    b_dev = float(b_dev / b_scale) if b_scale > 0 else float(b_dev)
    return OracleReport(ss, complex(expected[0]), complex(expected[1]), deviation, b_dev, horizon)


@dataclass(frozen=True)
class ResponseCheck:
    oracle_lambda: complex
    analytic_lambda: complex
    fd_lambda: complex
    rel_error_analytic: float
    rel_error_fd: float


def oracle_response(
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    epsilon: float = 1e-4,
    tol: float = 1e-12,
    max_horizon: float = 2.0e4,
) -> ResponseCheck:
    """Linear response from two integrations at ``+-epsilon``.

    ``(b_out(+eps) - b_out(-eps)) / (2 eps beta)`` is compared against the
    closed-form response and against the frequency-domain central difference
    taken at the same ``epsilon``.
    """
    plus, _ = run_to_steady_state(p, topology, epsilon, tol, None, max_horizon)
    minus, _ = run_to_steady_state(p, topology, -epsilon, tol, None, max_horizon)
    lam = (plus.b_out - minus.b_out) / (2.0 * epsilon * p.beta)
    analytic = response_coefficient(p, topology, TransferConvention.GENERAL)
    fd = -(
        transfer_matrix(p, topology, TransferConvention.GENERAL, 0.0, epsilon)[0, 0]
        - transfer_matrix(p, topology, TransferConvention.GENERAL, 0.0, -epsilon)[0, 0]
    ) / (2.0 * epsilon)
    return ResponseCheck(
        oracle_lambda=complex(lam),
        analytic_lambda=analytic,
        fd_lambda=complex(fd),
        rel_error_analytic=abs(lam - analytic) / abs(analytic),
        rel_error_fd=abs(lam - fd) / abs(fd),
    )


@dataclass(frozen=True)
class DrawSummary:
    reports: list  # (params, OracleReport) for every accepted draw
    rejected: int  # draws without a steady state (unstable)

    @property
    def worst(self) -> float:
        return max(r.deviation for _, r in self.reports)


def random_draws(
    n: int = 100,
    seed: int = 1,
    rate_max: float = 0.2,
    tau_range: tuple = (0.1, 1.0),
    topology: Topology = Topology.GIANT,
    max_draws: int = 10_000,
) -> DrawSummary:
    """Oracle checks on ``n`` random stable parameter sets.

    ``Gamma, gamma, J`` are uniform on ``[0, rate_max]`` (units of kappa),
    ``phi`` on ``[0, 2 pi)``, ``tau`` on ``tau_range``; the remaining fields
    keep their defaults (resonance, Delta12 = 0, kappa = beta = 1). Draws whose
    delay equations do not settle are rejected and counted.
    """
    from .model import build_params

    rng = np.random.default_rng(seed)
    accepted = []
    rejected = 0
    while len(accepted) < n:
        if len(accepted) + rejected >= max_draws:
            raise NotConverged(f"only {len(accepted)} stable draws out of {max_draws}")
        gain, loss, j = rng.uniform(0.0, rate_max, 3)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        tau = rng.uniform(*tau_range)
        p = build_params(gamma_gain=gain, gamma_loss=loss, j_coupling=j, phi=phi, tau=tau)
        try:
            accepted.append((p, oracle_check(p, topology)))
        except NotConverged:
            rejected += 1
    return DrawSummary(accepted, rejected)
