"""Parameter sweeps, extremum searches and giant/small comparisons."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NotUnimodal, NumericalError, ValidationError
from .model import DEFAULT_CONVENTION, SensorParams, Topology, TransferConvention
from .transfer import MetricsReport, metrics

AXES = ("delta", "gamma_loss", "phi")
METRICS = ("signal", "noise", "snr", "gain_term", "dissipative_term")
MAX_POINTS = 10**7
PRESCAN_POINTS = 101

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def metric_value(report: MetricsReport, metric: str) -> float:
    if metric == "signal":
        return report.rel_signal_per_photon
    if metric == "noise":
        return report.noise.total_measured
    if metric == "snr":
        return report.rel_snr_per_photon
    if metric == "gain_term":
        return report.noise.reflective_gain
    if metric == "dissipative_term":
        return report.noise.dissipative.real
    raise ValidationError(f"unknown metric {metric!r}", key="metric")


@dataclass(frozen=True, eq=False)
class SweepSpec:
    axis: str
    lo: float
    hi: float
    n_points: int
    fixed: SensorParams
    topology: Topology = Topology.GIANT
    convention: TransferConvention = DEFAULT_CONVENTION
    metrics: tuple = METRICS
    endpoint: bool = True

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"axis must be one of {AXES}, got {self.axis!r}", key="axis")
        if not self.lo < self.hi:
            raise ValidationError(f"need lo < hi, got {self.lo} >= {self.hi}", key="lo")
        if not 2 <= self.n_points <= MAX_POINTS:
            raise ValidationError(f"n_points must be in [2, {MAX_POINTS}]", key="n")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ValidationError(f"unknown metrics {bad}", key="metrics")
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "convention", TransferConvention(self.convention))

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points, endpoint=self.endpoint)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    report: MetricsReport | None
    error: str | None = None


@dataclass
class SweepTable:
    axis: str
    rows: list = field(default_factory=list)

    def values(self, metric: str) -> np.ndarray:
        """Metric column with ``nan`` on error rows."""
        return np.array(
            [metric_value(r.report, metric) if r.report is not None else np.nan for r in self.rows]
        )

    def axis_values(self) -> np.ndarray:
        return np.array([r.axis_value for r in self.rows])


def _evaluate(p: SensorParams, topology, convention) -> tuple[MetricsReport | None, str | None]:
    try:
        return metrics(p, topology, convention), None
    except NumericalError as exc:
        return None, exc.code


def _evaluate_point(job):
    p, axis, value, topology, convention = job
    report, error = _evaluate(p.replace(**{axis: value}), topology, convention)
    return SweepRow(float(value), report, error)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """One row per grid point; singular points carry an error code instead of numbers.

    With ``workers > 1`` points are farmed out to a process pool; the row
    order and contents do not depend on the number of workers.
    """
    jobs = [(spec.fixed, spec.axis, v, spec.topology, spec.convention) for v in spec.grid()]
    if workers > 1:
        chunk = max(1, len(jobs) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_point, jobs, chunksize=chunk))
    else:
        rows = [_evaluate_point(j) for j in jobs]
    return SweepTable(spec.axis, rows)


@dataclass(frozen=True)
class ExtremumResult:
    arg: float
    value: float
    kind: str
    bracket: tuple
    refined_to: float


def golden_section(f, a: float, b: float, tol: float):
    """Shrink ``[a, b]`` around the minimum of a unimodal ``f`` until ``b - a <= tol``."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    return (a, d) if yc < yd else (c, b)


def _local_peaks(y: np.ndarray) -> list[int]:
    peaks = []
    n = y.size
    for i in range(n):
        left = y[i - 1] if i > 0 else -np.inf
        right = y[i + 1] if i < n - 1 else -np.inf
        if y[i] > left and y[i] >= right:
            peaks.append(i)
    return peaks


def _search(objective, lo, hi, resolution, require_unimodal=True):
    xs = np.linspace(lo, hi, PRESCAN_POINTS)
    ys = np.array([objective(x) for x in xs])
    ys = np.where(np.isfinite(ys), ys, -np.inf)
    peaks = _local_peaks(ys)
    if not require_unimodal and peaks:
        peaks = [max(peaks, key=lambda j: ys[j])]
    if len(peaks) != 1:
        raise NotUnimodal(
            f"coarse scan of [{lo:g}, {hi:g}] has {len(peaks)} local extrema",
            extrema=[(float(xs[i]), float(ys[i])) for i in peaks],
        )
    i = peaks[0]
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, xs.size - 1)]
    a, b = golden_section(lambda x: -objective(x), a, b, resolution)
    arg = 0.5 * (a + b)
    return arg, objective(arg), b - a


def find_extremum(
    metric: str,
    axis: str,
    bracket: tuple,
    p: SensorParams,
    topology: Topology = Topology.GIANT,
    convention: TransferConvention = DEFAULT_CONVENTION,
    kind: str = "max",
    resolution: float = 1e-4,
    require_unimodal: bool = True,
) -> ExtremumResult:
    """Locate the maximum (or minimum) of ``metric`` along ``axis``.

    A 101-point scan must show a single local extremum; golden-section
    search then refines inside the neighbouring grid cells. For small
    cavities a ``gamma_loss`` bracket straddling ``gamma_gain`` is searched
    on each side separately, because the reflective gain switches off at
    balanced gain and loss.

    ``require_unimodal=False`` accepts several local extrema in the scan and
    refines around the best one (e.g. the noise minimum over a full period
    of ``phi``).
    """
    if axis not in AXES:
        raise ValidationError(f"axis must be one of {AXES}", key="axis")
    if kind not in ("max", "min"):
        raise ValidationError("kind must be 'max' or 'min'", key="kind")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValidationError("bracket must satisfy lo < hi", key="bracket")
    sign = 1.0 if kind == "max" else -1.0

    def objective(x):
        report, _ = _evaluate(p.replace(**{axis: x}), topology, convention)
        if report is None:
            return -np.inf
        return sign * metric_value(report, metric)

    pieces = [(lo, hi)]
    split = p.gamma_gain
    if Topology(topology) is Topology.SMALL and axis == "gamma_loss" and lo < split < hi:
        pieces = [(lo, split), (split, hi)]

    best = None
    for a, b in pieces:
        found = _search(objective, a, b, resolution, require_unimodal)
        if best is None or found[1] > best[1]:
            best = found
    arg, value, width = best
    return ExtremumResult(float(arg), float(sign * value), kind, (lo, hi), float(width))


@dataclass(frozen=True)
class RatioRow:
    axis_value: float
    s_ratio: float
    n_ratio: float
    snr_ratio: float
    error: str | None = None


@dataclass
class RatioTable:
    axis: str
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _ratio(a: float, b: float) -> float:
    return a / b if b != 0.0 else math.nan


def compare_topologies(spec: SweepSpec) -> RatioTable:
    """Giant over small ratios of signal, measured noise and SNR along the sweep axis.

    ``spec.topology`` is ignored. The small-cavity reference does not depend on
    ``phi`` and is evaluated once for ``phi`` sweeps.
    """
    giant = run_sweep(
        SweepSpec(spec.axis, spec.lo, spec.hi, spec.n_points, spec.fixed, Topology.GIANT,
                  spec.convention, spec.metrics, spec.endpoint)
    )
    if spec.axis == "phi":
        ref = _evaluate(spec.fixed, Topology.SMALL, spec.convention)
        small = [ref] * len(giant.rows)
    else:
        small = [
            _evaluate(spec.fixed.replace(**{spec.axis: r.axis_value}), Topology.SMALL, spec.convention)
            for r in giant.rows
        ]
    rows = []
    for row, (ref_report, ref_err) in zip(giant.rows, small):
        error = row.error or ref_err
        if error is not None:
            rows.append(RatioRow(row.axis_value, math.nan, math.nan, math.nan, error))
            continue
        g, s = row.report, ref_report
        denominators = (s.rel_signal_per_photon, s.noise.total_measured, s.rel_snr_per_photon)
        rows.append(
            RatioRow(
                row.axis_value,
                _ratio(g.rel_signal_per_photon, s.rel_signal_per_photon),
                _ratio(g.noise.total_measured, s.noise.total_measured),
                _ratio(g.rel_snr_per_photon, s.rel_snr_per_photon),
                "DIV0" if any(d == 0.0 for d in denominators) else None,
            )
        )
    rows.sort(key=lambda r: r.axis_value)
    return RatioTable(spec.axis, rows)


def snr_peak_by_gamma(p: SensorParams, multiples, n_points: int = 2001,
                      convention: TransferConvention = DEFAULT_CONVENTION) -> dict:
    """Peak giant-cavity SNR over ``phi`` for ``gamma_loss = m * gamma_gain``, per multiple ``m``."""
    out = {}
    for m in multiples:
        q = p.replace(gamma_loss=m * p.gamma_gain)
        table = run_sweep(SweepSpec("phi", 0.0, 2.0 * math.pi, n_points, q, Topology.GIANT,
                                    convention, ("snr",), endpoint=False))
        snr = table.values("snr")
        i = int(np.nanargmax(snr))
        out[m] = (float(snr[i]), float(table.rows[i].axis_value))
    return out
