import numpy as np
import pytest

from hhlab import model, rpverify, thermo
from hhlab.hilbert import build_basis
from hhlab.lattice import build_lattice

P = model.ModelParams


def small_params(**kw):
    base = dict(t=0.9, U=1.4, V=1.1, g=0.8, omega=1.3, beta=1.2, n_max=2)
    base.update(kw)
    return P(**base)


@pytest.fixture(scope="module")
def chain_state():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    H2 = model.build_doubleprime(params, basis)
    spec = thermo.spectral(H2, params.beta)
    bonds = thermo.pairing_bond_expectations(params, basis, spec)
    return lat, params, basis, H2, spec, bonds


# -- antiunitary plumbing ---------------------------------------------------------------


def test_antiunitary_inverse_and_conjugation():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    th = rpverify.AntiunitaryMap(q)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    assert np.allclose(th.inverse().apply(th.apply(v)), v)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    # theta (i A) theta^-1 = -i theta A theta^-1 (antilinearity)
    assert np.allclose(th.conjugate(1j * A), -1j * th.conjugate(A))
    # conjugate_back inverts conjugate
    assert np.allclose(th.conjugate_back(th.conjugate(A)), A)
    # adjoint compatibility: (theta A theta^-1)^dagger = theta A^dagger theta^-1
    assert np.allclose(th.conjugate(A).conj().T, th.conjugate(A.conj().T))


def test_antiunitary_rejects_nonunitary():
    with pytest.raises(ValueError):
        rpverify.AntiunitaryMap(np.diag([1.0, 2.0]))


def test_lr_split_reorders_kron_products():
    lat = build_lattice(1, 1)
    basis = build_basis(lat, 1)
    split = rpverify.build_lr_split(basis)
    bl, br = split.basis_L, split.basis_R
    rng = np.random.default_rng(1)
    FL = rng.standard_normal((bl.fermion_dim,) * 2)
    FR = rng.standard_normal((br.fermion_dim,) * 2)
    BL = rng.standard_normal((bl.boson_dim,) * 2)
    BR = rng.standard_normal((br.boson_dim,) * 2)
    full = basis.kron_fb(np.kron(FL, FR), np.kron(BL, BR))
    lr = np.kron(bl.kron_fb(FL, BL), br.kron_fb(FR, BR))
    assert np.max(np.abs(split.to_lr(full) - lr)) < 1e-12


# -- theta and the factorization ---------------------------------------------------------


@pytest.mark.parametrize("nu", [1, 2])
def test_theta_relations(nu):
    params = small_params(n_max=1)
    basis = build_basis(build_lattice(nu, 1), params.n_max)
    for res in rpverify.theta_relations_check(params, basis):
        assert res.passed, res


@pytest.mark.parametrize("nu", [1, 2])
def test_lr_split_identities(nu):
    params = small_params(n_max=1 if nu == 2 else 2)
    basis = build_basis(build_lattice(nu, 1), params.n_max)
    rng = np.random.default_rng(2)
    h = rng.standard_normal(basis.n_sites)
    for res in rpverify.verify_lr_split(params, basis, h):
        assert res.passed, res


# -- two-Hilbert-space inequality ----------------------------------------------------------


def test_dls_fuzz_small():
    for res in rpverify.dls_fuzz(n_instances=150, seed=11):
        assert res.passed, res


def test_dls_rejects_negative_lambda():
    rng = np.random.default_rng(3)
    inst = rpverify.random_dls_instance(rng)
    with pytest.raises(ValueError):
        rpverify.DLSInstance(A=inst.A, B=inst.B, Cs=inst.Cs, Ds=inst.Ds,
                             lambdas=[-1.0] * len(inst.lambdas), beta=1.0,
                             theta=inst.theta)


def test_trace_product_identity():
    assert rpverify.trace_product_check().passed


# -- reflection positivity of Z and Gaussian domination --------------------------------------


@pytest.fixture(scope="module")
def field_state():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    ens = rpverify.FieldPartition(params, basis)
    return lat, params, basis, ens


def test_field_partition_matches_dense_logz(field_state):
    lat, params, basis, ens = field_state
    h = np.array([0.3, -1.1])
    Hh = model.build_field_hamiltonian(params, basis, h)
    dense = thermo.spectral(Hh, params.beta).logZ
    assert np.isclose(ens.log_partition(h), dense, rtol=0, atol=1e-10)


def test_rp_equality_for_symmetric_field(field_state):
    lat, params, basis, ens = field_state
    h = np.zeros(lat.n_sites)
    res = rpverify.rp_reflection_check(params, basis, h, ens)
    assert res.passed and abs(res.slack) < 1e-12
    # reflection-symmetric h: equality as well
    h = np.array([0.4, 0.4])  # h_{-1} = h_0 is r-symmetric on the two-site cell
    res = rpverify.rp_reflection_check(params, basis, h, ens)
    assert res.passed and abs(res.slack) < 1e-12


def test_rp_random_fields(field_state):
    lat, params, basis, ens = field_state
    rng = np.random.default_rng(4)
    for _ in range(8):
        res = rpverify.rp_reflection_check(
            params, basis, rng.standard_normal(lat.n_sites), ens)
        assert res.passed, res


def test_gauss_equality_cases(field_state):
    lat, params, basis, ens = field_state
    for h in (np.zeros(lat.n_sites), 1.7 * np.ones(lat.n_sites)):
        res = rpverify.gaussian_domination_check(params, basis, h, ens)
        assert res.passed and abs(res.slack) < 1e-10


def test_gauss_random_fields(field_state):
    lat, params, basis, ens = field_state
    rng = np.random.default_rng(5)
    for _ in range(10):
        res = rpverify.gaussian_domination_check(
            params, basis, rng.standard_normal(lat.n_sites), ens)
        assert res.passed, res


# -- infrared chain ----------------------------------------------------------------------------


def test_infrared_chain_zero_field(chain_state):
    lat, params, basis, H2, spec, bonds = chain_state
    checks = rpverify.infrared_chain_check(params, basis, np.zeros(2), spec, H2, bonds)
    for res in checks:
        assert res.passed, res


def test_infrared_chain_eigenvector_field(chain_state):
    # h an eigenvector of -Delta: b0 = eigenvalue * |h|^2 / (2 beta V)
    lat, params, basis, H2, spec, bonds = chain_state
    h = np.array([1.0, -1.0])  # staggered: (-Delta) h = 4 h on the two-site ring
    checks = {c.name: c for c in
              rpverify.infrared_chain_check(params, basis, h, spec, H2, bonds)}
    b0 = checks["ir_duhamel_bound"].rhs
    assert np.isclose(b0, 4.0 * 2.0 / (2 * params.beta * params.V))
    for res in checks.values():
        assert res.passed, res


def test_infrared_chain_random_complex(chain_state):
    lat, params, basis, H2, spec, bonds = chain_state
    rng = np.random.default_rng(6)
    for _ in range(10):
        h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        for res in rpverify.infrared_chain_check(params, basis, h, spec, H2, bonds):
            assert res.passed, res


def test_falk_bruch_limits():
    assert rpverify.falk_bruch_rhs(0.0, 1.0) == 0.0
    assert rpverify.falk_bruch_rhs(0.7, 0.0) == 0.7
    # smooth near c -> 0: b (1 + x/3 + ...) with x = c / 4b
    b, c = 0.5, 1e-9
    assert np.isclose(rpverify.falk_bruch_rhs(b, c), b * (1 + c / (12 * b)), rtol=1e-6)


# -- half filling and free-energy chain ----------------------------------------------------------


@pytest.mark.parametrize("nu,ell", [(1, 1)])
def test_half_filling_random_draws(nu, ell):
    rng = np.random.default_rng(7)
    for k in range(4):
        params = P(t=float(rng.uniform(0.1, 2)), U=float(rng.uniform(0.1, 3)),
                   V=float(rng.uniform(0.1, 3)), g=float(rng.uniform(-2, 2)),
                   omega=float(rng.uniform(0.3, 2)), beta=float(rng.uniform(0.0, 4)),
                   n_max=int(rng.integers(0, 3)))
        for res in rpverify.half_filling_check(params, nu, ell, mechanism=(k == 0)):
            assert res.passed, res


def test_convexity_lemma():
    assert rpverify.convexity_lemma_check(n_pairs=80, dim_max=16, seed=8).passed


def test_q2_chain_strong_coupling():
    params = P(t=0.1, U=1.0, V=5.0, g=2.0, omega=1.0, beta=20.0, n_max=2)
    checks = rpverify.q2_lower_bound_check(params, 1, 1)
    assert len(checks) == 2
    for res in checks:
        assert res.passed, res
    # the bound should actually have a positive right-hand side here
    assert checks[1].lhs > 0.9


def test_q2_chain_out_of_regime():
    params = P(t=1.0, U=40.0, V=1.0, g=0.1, omega=1.0, beta=1.0, n_max=1)
    checks = rpverify.q2_lower_bound_check(params, 1, 1)
    assert len(checks) == 1 and not checks[0].passed
