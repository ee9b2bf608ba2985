import math

import numpy as np
import pytest
import scipy.linalg
from scipy.optimize import brentq
from hypothesis import given, settings, strategies as st

from kerrdimer.fock import ProductSpace, destroy, number
from kerrdimer.hamiltonian import (
    DEVICE_PHI_DC,
    QUARTIC_EXPANSION,
    DimerParams,
    FullModelParams,
    UnbalancedCouplingError,
    build_effective_h,
    build_full_h,
    coupler_quadrature,
    effective_from_full,
    manifold_spectrum,
    mhz,
    parse_word,
    quartic_normal_ordered,
    rotating_frame_h,
    to_mhz,
    total_number,
    word_exponents,
    word_operator,
)

S4 = ProductSpace.two_mode(4)

rates = st.floats(-60, 60, allow_nan=False)


def test_units_round_trip():
    assert mhz(1.0) == pytest.approx(2 * math.pi)
    assert to_mhz(mhz(-3.1)) == pytest.approx(-3.1)


def test_params_validation():
    with pytest.raises(ValueError):
        DimerParams(j_ac=-1.0)
    with pytest.raises(ValueError):
        DimerParams(kappa_a=-1.0)
    p = DimerParams.device()
    assert to_mhz(p.u_a) == pytest.approx(-3.1)
    assert to_mhz(p.v) == pytest.approx(-7.0)
    assert to_mhz(p.kappa_b) == pytest.approx(2.4)
    assert p.with_drive(1.0).omega_b == 1.0


def test_zero_rates_give_zero_matrix():
    h = build_effective_h(DimerParams(), S4)
    assert np.array_equal(h, np.zeros_like(h))


@pytest.mark.parametrize("theta", [0.0, 0.7, math.pi, 4.0])
def test_one_excitation_splitting_independent_of_phase(theta):
    j = mhz(10.0)
    ev = manifold_spectrum(DimerParams(j_ac=j, theta=theta), S4, 1)
    assert np.allclose(ev, [-j, j], atol=1e-12)


def test_kerr_matrix_element():
    u = mhz(-3.1)
    h = build_effective_h(DimerParams(u_a=u), S4)
    i = S4.index(2, 0)
    assert h[i, i].real == pytest.approx(u, abs=1e-12)


def test_cross_kerr_matrix_element():
    v = mhz(-7.0)
    h = build_effective_h(DimerParams(v=v), S4)
    i = S4.index(2, 3)
    assert h[i, i].real == pytest.approx(6 * v)


@settings(max_examples=30, deadline=None)
@given(da=rates, db=rates, j=st.floats(0, 60), th=st.floats(0, 2 * math.pi), u=rates, v=rates,
       oa=rates, ob=rates)
def test_hermitian(da, db, j, th, u, v, oa, ob):
    p = DimerParams(delta_a=da, delta_b=db, j_ac=j, theta=th, u_a=u, u_b=-u, v=v, omega_a=oa, omega_b=ob)
    h = build_effective_h(p, ProductSpace.two_mode(3))
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(th=st.floats(-2 * math.pi, 2 * math.pi), ob=st.floats(0.1, 20), oa=st.floats(0, 20))
def test_gauge_covariance(th, oa, ob):
    # U(phi) = exp(i phi n_b) maps b -> exp(-i phi) b; the hopping phase is
    # removed by phi = -theta, which shifts the b drive phase to exp(i theta)
    base = DimerParams.device(j_ac=mhz(5.0), omega_a=oa, omega_b=ob, delta_a=1.0, delta_b=-2.0)
    space = ProductSpace.two_mode(3)
    U = scipy.linalg.expm(-1j * th * number(space, 1))
    lhs = build_effective_h(base.replace(theta=th), space)
    rhs = U @ build_effective_h(base.replace(omega_b=ob * np.exp(1j * th)), space) @ U.conj().T
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_number_conserved_without_drive():
    p = DimerParams.device(j_ac=mhz(7.0), theta=1.1, delta_a=0.3)
    h = build_effective_h(p, S4)
    n = total_number(S4)
    assert np.max(np.abs(h @ n - n @ h)) < 1e-12


def test_manifold_spectrum_trivial_and_errors():
    assert np.allclose(manifold_spectrum(DimerParams(), S4, 1), [0, 0])
    with pytest.raises(ValueError):
        manifold_spectrum(DimerParams(omega_a=1.0), S4, 1)
    with pytest.raises(ValueError):
        manifold_spectrum(DimerParams(), S4, 5)


def test_manifold_spectrum_matches_dense_block():
    space = ProductSpace.two_mode(3)
    for j in np.linspace(0, mhz(40), 9):
        p = DimerParams.device(j_ac=j)
        # oracle: diagonalize the full H and keep eigenvectors with N = 2
        w, vecs = np.linalg.eigh(build_effective_h(p, space))
        n = np.real(np.einsum("ij,jk,ki->i", vecs.conj().T, total_number(space), vecs))
        oracle = np.sort(w[np.abs(n - 2) < 1e-9])
        assert np.allclose(manifold_spectrum(p, space, 2), oracle, atol=1e-9)


def test_two_excitation_branch_crossing():
    # frozen from a hand-built 3x3 block in the basis |20>, |11>, |02>
    oracle_mhz = 2.2474123050667663

    def top(j_mhz):
        return manifold_spectrum(DimerParams.device(j_ac=mhz(j_mhz)), S4, 2)[-1]

    js = np.linspace(0, 40, 201)
    signs = np.sign([top(j) for j in js])
    assert np.count_nonzero(np.diff(signs)) == 1
    assert brentq(top, 0, 10, xtol=1e-12) == pytest.approx(oracle_mhz, abs=1e-9)


# -- lab-frame model ------------------------------------------------------------


def test_word_parsing():
    assert parse_word("b+ a+2 a") == [("b", True, 1), ("a", True, 2), ("a", False, 1)]
    assert word_exponents("b+ a+2 a") == (2, 1, 1, 0)
    with pytest.raises(ValueError):
        parse_word("c3")


def test_expansion_has_35_terms_summing_to_binomial_weights():
    assert len(QUARTIC_EXPANSION) == 35
    # with commuting symbols (x - y)^4 at x = y = 1 vanishes, at x = 1, y = 0 gives 16
    assert sum(c for c, _ in QUARTIC_EXPANSION) == 0
    assert sum(c for c, w in QUARTIC_EXPANSION if "b" not in w) == 16


def test_quartic_identity_with_ordering_corrections():
    space = ProductSpace.two_mode(6)
    x = coupler_quadrature(space)
    A = destroy(space, 0) - destroy(space, 1)
    Ad = A.conj().T
    corrections = 12 * (Ad @ Ad + 2 * Ad @ A + A @ A) + 12 * np.eye(space.dim)
    na, nb = np.diag(number(space, 0)).real, np.diag(number(space, 1)).real
    keep = (na <= 4) & (nb <= 4)
    diff = np.linalg.matrix_power(x, 4) - quartic_normal_ordered(space) - corrections
    assert np.max(np.abs(diff[np.ix_(keep, keep)])) < 1e-12
    # the printed sum alone misses the ordering terms
    bare = np.linalg.matrix_power(x, 4) - quartic_normal_ordered(space)
    assert np.max(np.abs(bare[np.ix_(keep, keep)])) > 1


def test_word_operator_order_matters():
    space = ProductSpace.two_mode(3)
    a = destroy(space, 0)
    assert np.allclose(word_operator("a a+", space) - word_operator("a+ a", space),
                       (a @ a.conj().T - a.conj().T @ a))


def _full(**kw):
    base = FullModelParams.balanced(phi_ac=0.01)
    return FullModelParams(**{**base.__dict__, **kw})


def test_full_h_static_without_modulation():
    p = _full(phi_ac=0.0)
    space = ProductSpace.two_mode(3)
    h1 = build_full_h(p, space, 0.0)
    h2 = build_full_h(p, space, 0.123)
    assert np.array_equal(h1, h2)
    assert np.array_equal(h1, build_full_h(p, space, 0.0))
    assert np.max(np.abs(h1 - h1.conj().T)) == 0


def test_full_h_quadratic_one_excitation_spectrum():
    # v_tilde = 0 (and the Kerr top-ups off): block {|10>, |01>} plus pair terms;
    # restricted to one excitation it is a 2x2 hopping problem
    p = _full(phi_ac=0.0, v_tilde=0.0, u_tilde_a=0.0, u_tilde_b=0.0, j_n_tilde=0.0,
              j_c=_full().j_c + mhz(300.0))
    space = ProductSpace.two_mode(1)
    h = build_full_h(p, space, 0.0)
    idx = [space.index(1, 0), space.index(0, 1)]
    block = h[np.ix_(idx, idx)]
    j = p.j_c - p.j_ell * p.coupler_factor(0.0)
    assert to_mhz(j) == pytest.approx(300.0)
    wa, wb = p.omega_res_a, p.omega_res_b
    mean, half = 0.5 * (wa + wb), 0.5 * (wb - wa)
    oracle = [mean - math.hypot(half, j), mean + math.hypot(half, j)]
    assert np.allclose(np.linalg.eigvalsh(block), oracle, rtol=1e-12)


def test_full_model_validation():
    with pytest.raises(ValueError):
        _full(omega_res_b=mhz(6000.0))
    with pytest.raises(ValueError):
        _full(phi_ac=-0.1)


def test_effective_from_full_formula():
    j_ell = mhz(1600.0)
    p = FullModelParams.balanced(j_ell=j_ell, phi_dc=-0.74 * math.pi, phi_ac=0.012)
    eff = effective_from_full(p)
    expected = abs(j_ell * math.sin(-0.37 * math.pi) * 0.012 / 4)
    assert eff.j_ac == pytest.approx(expected, rel=1e-14)
    assert eff.theta == pytest.approx(math.pi)  # sin < 0 at negative flux
    assert to_mhz(eff.v) == pytest.approx(-7.0)
    assert to_mhz(eff.u_a) == pytest.approx(-3.1)


def test_effective_from_full_zero_cases_and_linearity():
    assert effective_from_full(FullModelParams.balanced(phi_ac=0.0)).j_ac == 0
    assert effective_from_full(FullModelParams.balanced(phi_dc=0.0, phi_ac=0.01)).j_ac == 0
    j1 = effective_from_full(FullModelParams.balanced(phi_ac=0.003)).j_ac
    j2 = effective_from_full(FullModelParams.balanced(phi_ac=0.006)).j_ac
    assert j2 == 2 * j1


def test_unbalanced_coupling_rejected():
    with pytest.raises(UnbalancedCouplingError):
        effective_from_full(_full(j_c=_full().j_c + mhz(5.0)))
    with pytest.raises(UnbalancedCouplingError):
        effective_from_full(_full(omega_ac=_full().omega_ac + mhz(5.0)))


def test_rotating_frame_static_part_matches_effective_model():
    # at phi_ac = 0 the non-rotating part of the lab model is the Kerr block
    p = FullModelParams.balanced(phi_ac=0.0)
    space = ProductSpace.two_mode(3)
    H = rotating_frame_h(p, space)
    static = H.terms[0.0].static + p.coupler_factor(0.0) * H.terms[0.0].modulated
    h_eff = build_effective_h(effective_from_full(p), space)
    assert np.max(np.abs(static - h_eff)) < 1e-9
    # the remaining terms rotate at multiples of the detuning
    assert sorted(H.terms) == pytest.approx([k * p.detuning for k in (-2, -1, 0, 1, 2)])
