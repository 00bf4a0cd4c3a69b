import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from giantsensor.errors import NonpositiveNoise, SingularSystem
from giantsensor.model import Topology, TransferConvention, build_params
from giantsensor.transfer import (
    calibration_report,
    compare_noise_forms,
    metrics,
    output_noise,
    output_noise_matrix_form,
    reflection_coefficient,
    response_coefficient,
    response_coefficient_fd,
    system_matrix,
    transfer_matrix,
)

PI = math.pi
GIANT, SMALL = Topology.GIANT, Topology.SMALL
GENERAL, EXPLICIT = TransferConvention.GENERAL, TransferConvention.EXPLICIT


def symbolic_k(topology, delta, delta12, j, gain, loss, kappa, phi, omega=0.0, eps=0.0, v=None):
    """Term-by-term symbolic evaluation of
    (w_L + w) I - H[eps] - i pi Y Y^+ + 2 pi i D_Z + i kappa~/2 with w_1 = 0."""
    I = sp.I
    d, d12, J, G, g, k, ph, w, e = sp.symbols("d d12 J G g k ph w e", real=True)
    Y = sp.Matrix([sp.sqrt(G / (2 * sp.pi)), sp.sqrt(G / (2 * sp.pi))])
    Z1 = Z2 = sp.sqrt(g / (2 * sp.pi))
    V = sp.Matrix(v if v is not None else [[1, 1], [1, 1]])
    H = sp.Matrix([[0, J], [J, -d12]]) + e * V
    wl = d  # omega_L = omega_1 + Delta with omega_1 = 0
    if topology is GIANT:
        # (n w_L - w) tau -> n phi at tau = 0 (w enters only through tau)
        p1, p2, p3 = sp.exp(I * ph), sp.exp(2 * I * ph), sp.exp(3 * I * ph)
        DZ = sp.Matrix([[Z1**2 * (1 + p1), 0], [Z2 * Z1 * (p1 + 2 * p2 + p3), Z2**2 * (1 + p1)]])
    else:
        Z = sp.Matrix([Z1, Z2])
        DZ = Z * Z.T / 2
    kt = sp.Matrix([[k, 0], [0, 0]])
    K = (wl + w) * sp.eye(2) - H - I * sp.pi * Y * Y.T + 2 * sp.pi * I * DZ + I * kt / 2
    subs = {d: delta, d12: delta12, J: j, G: gain, g: loss, k: kappa, ph: phi, w: omega, e: eps}
    return np.array(K.subs(subs).evalf(30).tolist(), dtype=complex)


def test_decoupled_k():
    p = build_params(delta=0.37, delta12=0.2, j_coupling=0, gamma_gain=0, gamma_loss=0)
    for conv in (GENERAL, EXPLICIT):
        np.testing.assert_allclose(
            system_matrix(p, GIANT, conv), [[0.37 + 0.5j, 0], [0, 0.57]], atol=1e-15
        )


@pytest.mark.parametrize("topology", [SMALL, GIANT])
@pytest.mark.parametrize("gamma", [0.05, 0.1, 0.2])
def test_k_matches_symbolic(topology, gamma):
    p = build_params(gamma_loss=gamma, phi=0.84 * PI)
    want = symbolic_k(topology, 0, 0, 0.1, 0.1, gamma, 1, 0.84 * PI)
    np.testing.assert_allclose(system_matrix(p, topology, GENERAL), want, atol=1e-14)


def test_k_matches_symbolic_off_resonance():
    p = build_params(delta=0.3, delta12=-0.2, j_coupling=0.07, gamma_gain=0.04, gamma_loss=0.15,
                     phi=1.1, v_matrix=[[1, 0.5], [0.5, -1]])
    want = symbolic_k(SMALL, 0.3, -0.2, 0.07, 0.04, 0.15, 1, 1.1, omega=0.05, eps=0.02,
                      v=[[1, 0.5], [0.5, -1]])
    np.testing.assert_allclose(system_matrix(p, SMALL, GENERAL, 0.05, 0.02), want, atol=1e-14)


def test_explicit_printed_small():
    p = build_params(gamma_loss=0.1)
    k = system_matrix(p, SMALL, EXPLICIT)
    want = np.array([[-0.05j + 0.5j + 0.05, -0.1 - 0.05j + 0.05],
                     [-0.1 - 0.05j + 0.05, -0.05j + 0.05]])
    np.testing.assert_allclose(k, want, atol=1e-15)


@pytest.mark.parametrize("conv", [GENERAL, EXPLICIT])
@pytest.mark.parametrize("topology", [SMALL, GIANT])
def test_epsilon_shift(conv, topology):
    p = build_params(gamma_loss=0.1, phi=0.84 * PI)
    diff = system_matrix(p, topology, conv, 0, 0.01) - system_matrix(p, topology, conv, 0, 0)
    np.testing.assert_allclose(diff, -0.01 * p.v_matrix, atol=1e-16)


def test_chi_decoupled():
    p = build_params(delta12=0.3, j_coupling=0, gamma_gain=0, gamma_loss=0)
    chi = transfer_matrix(p)
    assert chi[0, 0] == pytest.approx(2.0, abs=1e-15)
    assert chi[0, 1] == 0 and chi[1, 0] == 0


def test_chi_singular():
    p = build_params(delta12=0, j_coupling=0, gamma_gain=0, gamma_loss=0)
    with pytest.raises(SingularSystem) as info:
        transfer_matrix(p)
    assert info.value.code == "SINGULAR"
    assert info.value.params is p


def test_lambda_zero_for_zero_v():
    p = build_params(v_matrix=np.zeros((2, 2)))
    assert response_coefficient(p) == 0
    r = metrics(p)
    assert r.rel_signal_per_photon == 0 and r.rel_snr_per_photon == 0


def test_passive_shot_noise():
    for delta in np.linspace(-1, 1, 7):
        p = build_params(delta=delta, delta12=0.3, j_coupling=0, gamma_gain=0, gamma_loss=0)
        n = output_noise(p)
        assert n.total_measured == pytest.approx(1.0, abs=1e-12)
        assert n.xi == pytest.approx(0.0, abs=1e-12)
        assert n.reflective_gain == pytest.approx(0.0, abs=1e-12)


def test_reflection_examples():
    p = build_params(delta12=0.3, j_coupling=0, gamma_gain=0, gamma_loss=0)
    assert reflection_coefficient(p) == pytest.approx(-1.0, abs=1e-15)
    q = p.replace(delta=0.5)
    r = reflection_coefficient(q)
    assert r == pytest.approx((0.5 - 0.5j) / (0.5 + 0.5j), abs=1e-15)
    assert abs(r) == pytest.approx(1.0, abs=1e-15)
    lossy = build_params(gamma_gain=0, gamma_loss=0.1, phi=0.3)
    assert abs(reflection_coefficient(lossy, GIANT)) < 1
    assert abs(reflection_coefficient(lossy, SMALL)) < 1


def test_nonreciprocal_chi():
    p = build_params(j_coupling=0, gamma_gain=0, gamma_loss=0.1, phi=0.7, delta12=0.1)
    chi = transfer_matrix(p, GIANT)
    assert abs(chi[0, 1]) < 1e-16
    assert abs(chi[1, 0]) > 1e-3


def test_noise_anchor_values():
    # frozen values of the calibrated convention at the three noise-minimum anchors
    cases = [(0.05, 0.76, 1.1890200639763107), (0.1, 0.84, 1.042202790094676),
             (0.2, 0.89, 1.0051884860841271)]
    for gamma, phi_pi, want in cases:
        n = output_noise(build_params(gamma_loss=gamma, phi=phi_pi * PI))
        assert n.total_measured == pytest.approx(want, rel=1e-12)


def test_calibration_report():
    rep = calibration_report()
    assert rep.selected is GENERAL
    assert rep.passes == {"general": True, "explicit": False}
    assert rep.values["explicit"][0] > 10
    lines = rep.lines()
    assert lines[-1] == "selected convention: general"
    assert set(rep.as_dict()) >= {"values", "passes", "selected"}


def test_conventions_agree_without_dissipative_block():
    for p in (build_params(gamma_loss=0, phi=0.4), build_params(gamma_loss=0.1, phi=PI)):
        np.testing.assert_allclose(transfer_matrix(p, GIANT, GENERAL),
                                   transfer_matrix(p, GIANT, EXPLICIT), atol=1e-14)


def test_small_dissipative_term_real_nonnegative():
    for gamma in (0.0, 0.03, 0.1, 0.4):
        for delta in (-0.5, 0.0, 0.2):
            n = output_noise(build_params(gamma_loss=gamma, delta=delta), SMALL)
            assert n.dissipative.imag == 0.0
            assert n.dissipative.real >= 0.0


def test_small_heaviside_cutoff():
    for ratio in (1.01, 1.2, 1.5, 2.0):
        n = output_noise(build_params(gamma_loss=ratio * 0.1), SMALL)
        assert n.xi < 0
        assert n.reflective_gain == 0.0
    below = output_noise(build_params(gamma_loss=0.09), SMALL)
    assert below.xi > 0 and below.reflective_gain == 2 * below.xi


def test_matrix_form_without_gain():
    p = build_params(gamma_gain=0.0, gamma_loss=0.1, delta12=0.2, phi=0.5)
    n = output_noise(p, SMALL)
    assert n.xi <= 0 and n.reflective_gain == 0.0
    # with no gain reservoir the matrix form is |chi11 - 1|^2 = 1 + Xi plus dissipation
    assert output_noise_matrix_form(p, SMALL) == pytest.approx(1 + n.xi + n.dissipative, rel=1e-12)


def test_noise_form_scan():
    """The reduced and unreduced noise expressions coincide exactly on the
    Xi > 0 branch; for Xi <= 0 the unreduced form drops below the shot floor."""
    p = build_params(gamma_loss=0.05)
    phis = np.linspace(0, 2 * PI, 2001, endpoint=False)
    scan = compare_noise_forms(p, phis)
    xi = np.array([output_noise(p.replace(phi=phi)).xi for phi in phis])
    np.testing.assert_array_equal(scan["agree"], xi > 0)
    assert np.max(np.abs(scan["reduced"] - scan["matrix"])[scan["agree"]]) < 1e-12
    assert np.min(scan["matrix"].real) < 1.0
    assert np.min(scan["reduced"].real) >= 1.0


def test_nonpositive_noise_is_reported(monkeypatch):
    # Re of every noise term is >= 0 for physical inputs, so force the guard
    import giantsensor.transfer as tr
    from giantsensor.transfer import NoiseBreakdown

    def broken(p, topology, chi):
        return NoiseBreakdown(1.0, 0.0, -2.0 + 0j, -1.0 + 0j, -1.0, 0.0)

    monkeypatch.setattr(tr, "_noise_from_chi", broken)
    with pytest.raises(NonpositiveNoise) as info:
        metrics(build_params())
    assert info.value.code == "NONPOSITIVE_NOISE"


def test_fig3_small_ordering():
    s = {m: metrics(build_params(gamma_loss=m * 0.1), SMALL).rel_signal_per_photon
         for m in (0.25, 0.65, 1.0)}
    assert s[0.65] > s[0.25] and s[0.65] > s[1.0]


def test_snr_factorisation():
    r = metrics(build_params(gamma_loss=0.2, phi=1.0))
    assert r.rel_snr_per_photon * r.noise.total_measured == pytest.approx(r.rel_signal_per_photon,
                                                                         rel=1e-15)
    n = r.noise
    assert n.total_measured == n.shot + n.reflective_gain + n.dissipative.real


finite = dict(allow_nan=False, allow_infinity=False)
params_strategy = st.builds(
    build_params,
    delta=st.floats(-1, 1, **finite),
    delta12=st.floats(-1, 1, **finite),
    j_coupling=st.floats(0, 0.3, **finite),
    gamma_gain=st.floats(0, 0.3, **finite),
    gamma_loss=st.floats(0, 0.3, **finite),
    kappa=st.floats(0.5, 2, **finite),
    phi=st.floats(0, 2 * PI, **finite),
    tau=st.floats(0, 1, **finite),
)


def _chi_or_skip(p, topology, conv=GENERAL):
    try:
        return transfer_matrix(p, topology, conv)
    except SingularSystem:
        return None


@settings(max_examples=200, deadline=None)
@given(params_strategy, st.sampled_from([GIANT, SMALL]), st.sampled_from([GENERAL, EXPLICIT]))
def test_chi_inverts_k(p, topology, conv):
    chi = _chi_or_skip(p, topology, conv)
    if chi is None:
        return
    k = system_matrix(p, topology, conv)
    prod = chi @ k
    scale = np.linalg.norm(chi) * np.linalg.norm(k)
    assert np.max(np.abs(prod - 1j * p.kappa * np.eye(2))) <= 1e-12 * max(scale, p.kappa)


@settings(max_examples=200, deadline=None)
@given(params_strategy, st.sampled_from([GIANT, SMALL]))
def test_lambda_matches_finite_difference(p, topology):
    chi = _chi_or_skip(p, topology)
    if chi is None:
        return
    # central differences carry a relative truncation error of order
    # (h |K^-1| |V|)^2; only compare where the reference itself is accurate
    inv_norm = np.linalg.norm(chi, 2) / p.kappa
    if 1e-6 * inv_norm * np.linalg.norm(p.v_matrix, 2) > 1e-4:
        return
    lam = response_coefficient(p, topology)
    fd = response_coefficient_fd(p, topology, step=1e-6)
    # plus the cancellation floor of the difference quotient, ~ eps_mach |chi_11| / h
    floor = 10 * np.finfo(float).eps * max(1.0, abs(chi[0, 0])) / 1e-6
    assert abs(lam - fd) <= 1e-6 * abs(lam) + floor


@settings(max_examples=100, deadline=None)
@given(params_strategy)
def test_passive_unit_reflection(p):
    q = p.replace(gamma_gain=0.0, gamma_loss=0.0)
    if _chi_or_skip(q, GIANT) is None:
        return
    assert abs(reflection_coefficient(q)) == pytest.approx(1.0, abs=1e-9)
    assert output_noise(q).total_measured == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(params_strategy)
def test_small_noise_dissipative_nonnegative(p):
    if _chi_or_skip(p, SMALL) is None:
        return
    n = output_noise(p, SMALL)
    assert n.dissipative.imag == 0.0 and n.dissipative.real >= 0.0
    assert n.reflective_gain >= 0.0
