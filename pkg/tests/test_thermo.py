import numpy as np
import pytest

from hhlab import model, thermo
from hhlab.hilbert import build_basis
from hhlab.lattice import build_lattice

P = model.ModelParams


def small_params(**kw):
    base = dict(t=0.9, U=1.4, V=1.1, g=0.8, omega=1.3, beta=1.2, n_max=2)
    base.update(kw)
    return P(**base)


@pytest.fixture(scope="module")
def state():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    H2 = model.build_doubleprime(params, basis)
    spec = thermo.spectral(H2, params.beta)
    return lat, params, basis, H2, spec


# -- spectral data --------------------------------------------------------------------


def test_reconstruction_and_logz(state):
    lat, params, basis, H2, spec = state
    assert spec.reconstruction_residual(H2) < 1e-9 * np.max(np.abs(H2))
    w = spec.eigenvalues
    assert np.isclose(spec.logZ, np.log(np.sum(np.exp(-params.beta * (w - w[0]))))
                      - params.beta * w[0])


def test_blocks_partition_the_space(state):
    _, _, basis, _, spec = state
    idx = np.concatenate([blk[0] for blk in spec.blocks])
    assert sorted(idx.tolist()) == list(range(basis.total_dim))


def test_large_beta_logz_is_finite():
    lat = build_lattice(1, 1)
    params = small_params(beta=5000.0, n_max=1)
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    spec = thermo.spectral(H, params.beta)
    assert np.isfinite(spec.logZ)


# -- thermal expectation ---------------------------------------------------------------


def test_expectation_identity(state):
    _, _, basis, _, spec = state
    assert np.isclose(spec.expectation(np.eye(basis.total_dim, dtype=complex)), 1.0)
    assert np.isclose(spec.expectation(np.ones(basis.total_dim)), 1.0)


def test_expectation_beta_zero():
    lat = build_lattice(1, 1)
    params = small_params(beta=0.0, n_max=1)
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    spec = thermo.spectral(H, 0.0)
    rng = np.random.default_rng(0)
    A = rng.standard_normal((basis.total_dim, basis.total_dim))
    A = A + A.T
    assert np.isclose(spec.expectation(A), np.trace(A) / basis.total_dim)


def test_half_filling_under_original():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    spec = thermo.spectral(model.build_original(params, basis), params.beta)
    for x in lat.sites:
        n_diag = np.repeat(1.0 + model.charge_diagonals(basis)[lat.site_index[x]],
                           basis.boson_dim)
        assert abs(spec.expectation(n_diag) - 1.0) < 1e-12


def test_half_filling_at_infinite_temperature():
    # beta = 0 counts dimensions: half the fermion modes are occupied
    lat = build_lattice(1, 1)
    params = small_params(beta=0.0, n_max=1)
    basis = build_basis(lat, params.n_max)
    spec = thermo.spectral(model.build_original(params, basis), 0.0)
    n_diag = np.repeat(1.0 + model.charge_diagonals(basis)[0], basis.boson_dim)
    assert abs(spec.expectation(n_diag) - 1.0) < 1e-12


# -- Duhamel two-point function -----------------------------------------------------------


def test_duhamel_identity_is_one(state):
    _, _, basis, _, spec = state
    one = np.eye(basis.total_dim, dtype=complex)
    assert np.isclose(spec.duhamel(one, one), 1.0)


def test_duhamel_commuting_equals_static(state):
    _, _, basis, H2, spec = state
    # A = H commutes with H: (A, A) = <A* A>
    assert np.isclose(spec.duhamel(H2, H2), spec.expectation(H2 @ H2))


def test_duhamel_positive_and_symmetric(state):
    _, _, basis, _, spec = state
    rng = np.random.default_rng(1)
    n = basis.total_dim
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    aa = spec.duhamel(A, A)
    assert abs(complex(aa).imag) < 1e-10 * max(1.0, abs(aa))
    assert complex(aa).real >= -1e-12
    assert np.isclose(spec.duhamel(A, B), np.conj(spec.duhamel(B, A)))


def test_duhamel_complex_split(state):
    # (A, A) = (A_R, A_R) + (A_I, A_I) with A_R, A_I the Hermitian parts
    _, _, basis, _, spec = state
    rng = np.random.default_rng(2)
    n = basis.total_dim
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a_r = (A + A.conj().T) / 2
    a_i = (A - A.conj().T) / 2j
    lhs = spec.duhamel(A, A)
    rhs = spec.duhamel(a_r, a_r) + spec.duhamel(a_i, a_i)
    assert np.isclose(lhs, rhs)


def test_duhamel_bogoliubov_sandwich(state):
    # 0 <= (A, A) <= <A*A + AA*>/2
    _, _, basis, _, spec = state
    rng = np.random.default_rng(3)
    n = basis.total_dim
    for _ in range(5):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        aa = complex(spec.duhamel(A, A)).real
        sym = spec.expectation(A.conj().T @ A + A @ A.conj().T).real / 2
        assert -1e-12 <= aa <= sym * (1 + 1e-12)


def test_duhamel_diagonal_fast_path_matches_dense(state):
    _, _, basis, _, spec = state
    rng = np.random.default_rng(4)
    d = rng.standard_normal(basis.total_dim)
    dense = spec.duhamel(np.diag(d.astype(complex)), np.diag(d.astype(complex)))
    fast = spec.duhamel(d, d)
    assert np.isclose(dense, fast)


def test_duhamel_small_gap_series_continuity():
    # kernel continuity across the series switch: compare two nearly
    # degenerate spectra
    w = np.array([0.0, 1e-7, 1.0])
    kern = thermo._duhamel_kernel(1.0, w, w)
    assert np.all(np.isfinite(kern))
    assert np.isclose(kern[0, 1], np.exp(0.0), atol=1e-6)
    # symmetric kernel
    assert np.allclose(kern, kern.T, atol=1e-12)


# -- charge correlations --------------------------------------------------------------------


def test_charge_correlation_range():
    params = small_params()
    val = thermo.charge_correlation(params, 1, 1, (0,), (0,), which="zigzag")
    assert 0.0 <= val <= 1.0


def test_zigzag_sign_relation_exact():
    params = small_params()
    lat = build_lattice(1, 1)
    for x in lat.sites:
        zz = thermo.charge_correlation(params, 1, 1, x, (0,), which="zigzag")
        orig = thermo.charge_correlation(params, 1, 1, x, (0,), which="original")
        assert abs(zz - lat.staggered_sign(x) * orig) < 1e-12


def test_translation_invariance():
    params = small_params(n_max=1)
    lat = build_lattice(1, 1)
    a = thermo.charge_correlation(params, 1, 1, (-1,), (0,), which="original")
    b = thermo.charge_correlation(params, 1, 1, (0,), (1,), which="original")
    assert np.isclose(a, b)


def test_strong_coupling_charge_order():
    # nu V - u_eff = 12 > 0: staggered correlation positive at the far site
    params = P(t=0.1, U=1.0, V=5.0, g=2.0, omega=1.0, beta=20.0, n_max=6)
    lat = build_lattice(1, 1)
    val = thermo.charge_correlation(params, 1, 1, (-1,), (0,), which="original")
    assert lat.staggered_sign((-1,)) * val > 0.1


# -- g, b, c quantities -----------------------------------------------------------------------


def test_quadratic_form_zero_and_constant_field(state):
    lat, params, basis, H2, spec = state
    for h in (np.zeros(2), 0.8 * np.ones(2)):
        g_q, b_q, c_q = thermo.quadratic_form_quantities(params, basis, h, spec, H=H2)
        assert abs(g_q) < 1e-12 and abs(b_q) < 1e-12 and abs(c_q) < 1e-12


def test_quadratic_form_closed_form_agreement(state):
    # the assertion inside quadratic_form_quantities compares the direct
    # elementwise nested commutator with the bond-sum closed form
    lat, params, basis, H2, spec = state
    rng = np.random.default_rng(5)
    for _ in range(4):
        h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        g_q, b_q, c_q = thermo.quadratic_form_quantities(params, basis, h, spec, H=H2)
        assert g_q >= -1e-12 and b_q >= -1e-12 and c_q >= -1e-12


def test_nested_commutator_matrix_identity(state):
    # [A, [H, A*]] for diagonal A equals the closed-form bond expansion as
    # matrices, not just in expectation
    lat, params, basis, H2, spec = state
    rng = np.random.default_rng(6)
    h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    f = lat.laplacian(-h)
    qd = model.charge_diagonals(basis)
    a = np.repeat(f @ qd, basis.boson_dim)
    direct = (np.diag(a) @ (H2 @ np.diag(np.conj(a)) - np.diag(np.conj(a)) @ H2)
              - (H2 @ np.diag(np.conj(a)) - np.diag(np.conj(a)) @ H2) @ np.diag(a))
    closed = np.zeros_like(H2)
    for (x, y, _, _), term in model.pairing_bond_terms(params, basis):
        fx, fy = f[lat.site_index[x]], f[lat.site_index[y]]
        closed += -abs(fx + fy) ** 2 * term
    assert np.max(np.abs(direct - closed)) < 1e-9 * max(1.0, np.max(np.abs(direct)))


def test_a_operator_is_normal(state):
    # A = sum_x q_x f_x is a combination of commuting Hermitian diagonals,
    # so A* A = A A* exactly
    lat, params, basis, _, _ = state
    rng = np.random.default_rng(7)
    f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    qd = model.charge_diagonals(basis)
    a = f @ qd
    A = np.diag(np.repeat(a, basis.boson_dim))
    assert np.max(np.abs(A.conj().T @ A - A @ A.conj().T)) == 0.0
