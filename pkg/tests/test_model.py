import numpy as np
import pytest

from hhlab import model
from hhlab.hilbert import HilbertBasis, build_basis, hermiticity_residual, is_hermitian
from hhlab.lattice import Lattice, build_lattice

P = model.ModelParams


def small_params(**kw):
    base = dict(t=0.9, U=1.4, V=1.1, g=0.8, omega=1.3, beta=1.2, n_max=2)
    base.update(kw)
    return P(**base)


# -- parameter container -------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        P(t=-1, U=1, V=1, g=0, omega=1, beta=1)
    with pytest.raises(ValueError):
        P(t=1, U=0, V=1, g=0, omega=1, beta=1)
    with pytest.raises(ValueError):
        P(t=1, U=1, V=1, g=0, omega=-2, beta=1)
    with pytest.raises(ValueError):
        P(t=1, U=1, V=1, g=0, omega=1, beta=-0.5)


def test_u_eff_values():
    assert P(t=1, U=4, V=1, g=1, omega=1, beta=1).u_eff == 2.0
    assert P(t=1, U=5, V=1, g=0, omega=1, beta=1).u_eff == 5.0
    assert P(t=1, U=1, V=1, g=3, omega=1, beta=1).u_eff == -17.0


def test_alpha_value():
    p = P(t=1, U=1, V=1, g=2.0, omega=4.0, beta=1)
    assert np.isclose(p.alpha, np.sqrt(2) * 4.0 ** -1.5 * 2.0)


# -- independent assembly oracle ------------------------------------------------------


def _apply_c(f, m, M):
    if not (f >> (M - 1 - m)) & 1:
        return None
    sign = (-1) ** bin(f >> (M - m)).count("1")
    return sign, f & ~(1 << (M - 1 - m))


def _apply_cdag(f, m, M):
    if (f >> (M - 1 - m)) & 1:
        return None
    sign = (-1) ** bin(f >> (M - m)).count("1")
    return sign, f | (1 << (M - 1 - m))


def independent_original(params, lat, basis):
    """H assembled by explicit bit arithmetic on basis states; shares no
    code with the kron-product builders."""
    nb, M, d = basis.boson_dim, basis.n_modes, params.n_max + 1
    dim = basis.total_dim
    H = np.zeros((dim, dim), dtype=complex)

    charges = np.empty((basis.fermion_dim, lat.n_sites))
    for f in range(basis.fermion_dim):
        occ = [(f >> (M - 1 - m)) & 1 for m in range(M)]
        charges[f] = [occ[2 * s] + occ[2 * s + 1] - 1 for s in range(lat.n_sites)]

    tuples = [basis.boson_tuple(b) for b in range(nb)]
    for f in range(basis.fermion_dim):
        q = charges[f]
        coul = params.U * np.sum(q ** 2)
        for bd in lat.bonds():
            coul += params.V * q[bd.i] * q[bd.j]
        for b in range(nb):
            i = f * nb + b
            H[i, i] += coul + params.omega * sum(tuples[b])

    for bd in lat.bonds():
        for s in (0, 1):
            mi, mj = 2 * bd.i + s, 2 * bd.j + s
            for f in range(basis.fermion_dim):
                for src, dst in ((mj, mi), (mi, mj)):
                    r1 = _apply_c(f, src, M)
                    if r1 is None:
                        continue
                    r2 = _apply_cdag(r1[1], dst, M)
                    if r2 is None:
                        continue
                    amp = -params.t * r1[0] * r2[0]
                    for b in range(nb):
                        H[r2[1] * nb + b, f * nb + b] += amp

    for site in range(lat.n_sites):
        for b, tup in enumerate(tuples):
            n = tup[site]
            stride = d ** (lat.n_sites - 1 - site)
            if n > 0:  # annihilate
                for f in range(basis.fermion_dim):
                    H[f * nb + b - stride, f * nb + b] += params.g * charges[f, site] * np.sqrt(n)
            if n < params.n_max:  # create
                for f in range(basis.fermion_dim):
                    H[f * nb + b + stride, f * nb + b] += params.g * charges[f, site] * np.sqrt(n + 1)
    return H


def test_original_matches_independent_assembly():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    assert H.shape == (144, 144)
    oracle = independent_original(params, lat, basis)
    assert np.max(np.abs(H - oracle)) < 1e-12


def test_single_site_interaction_spectrum():
    lat = Lattice.single_site()
    basis = build_basis(lat, 1)
    params = P(t=1.0, U=2.5, V=1.0, g=0.0, omega=1.0, beta=1.0, n_max=1)
    H = model.build_original(params, basis)
    w = np.linalg.eigvalsh(H)
    # U q^2 spectrum {U, 0, 0, U} tensored with the phonon ladder {0, omega}
    expected = np.sort(np.concatenate([[params.U, 0, 0, params.U],
                                       [params.U + 1, 1, 1, params.U + 1]]))
    assert np.allclose(w, expected)


def test_diagonal_when_hopping_and_coupling_vanish():
    # with g = 0 every non-hopping part is diagonal in the occupancy basis
    lat = build_lattice(1, 1)
    params = small_params(g=0.0)
    basis = build_basis(lat, params.n_max)
    parts = model.build_parts(params, basis)
    rest = parts["P"] + parts["I"] + parts["K"]
    assert np.allclose(rest, np.diag(np.diag(rest)))
    assert np.allclose(parts["I"], 0.0)


def test_all_hamiltonians_hermitian():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    hs = model.hamiltonian_set(params, basis)
    for H in (hs.H, hs.H1, hs.H2):
        assert hermiticity_residual(H) < 1e-12 * max(1.0, np.max(np.abs(H)))


# -- Lang-Firsov unitary ----------------------------------------------------------------


def test_lang_firsov_unitary():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    U = model.lang_firsov(params, basis)
    assert np.max(np.abs(U @ U.conj().T - np.eye(basis.total_dim))) < 1e-10


def test_lang_firsov_g0_is_number_phase():
    lat = build_lattice(1, 1)
    params = small_params(g=0.0)
    basis = build_basis(lat, params.n_max)
    U = model.lang_firsov(params, basis)
    n_tot = np.zeros(basis.boson_dim)
    for x in basis.sites:
        n_tot += np.real(np.diag(basis.boson(x, "number")))
    expected = basis.embed_boson(np.diag(np.exp(-0.5j * np.pi * n_tot)))
    assert np.max(np.abs(U - expected)) < 1e-12


def test_conjugation_preserves_spectrum():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    U = model.lang_firsov(params, basis)
    w1 = np.linalg.eigvalsh(H)
    w2 = np.linalg.eigvalsh(U @ H @ U.conj().T)
    assert np.max(np.abs(w1 - w2)) < 1e-9 * max(1.0, np.max(np.abs(w1)))


def test_transformed_equals_original_at_g0():
    lat = build_lattice(1, 1)
    params = small_params(g=0.0)
    basis = build_basis(lat, params.n_max)
    assert np.max(np.abs(model.build_transformed(params, basis)
                         - model.build_original(params, basis))) < 1e-12


def test_lang_firsov_diagnostic_measures_and_flags():
    # The unitary's own conjugation constants: phase alpha_hat = g / sqrt(omega)
    # exactly at any truncation, displacement (zeta, d) -> (i, g / (sqrt(2) omega)),
    # single-site charge gap -> U - g^2/omega.  Each is compared against the
    # displayed constants (sqrt(2) g omega^{-3/2}, (1, g/omega), U - 2 g^2/omega)
    # and flagged; none of the displayed values reproduces the measurement.
    lat = build_lattice(1, 1)
    params = small_params(g=0.8, omega=1.3, n_max=6)
    basis = build_basis(lat, params.n_max)
    diag = model.lang_firsov_diagnostic(params, basis)
    assert diag["phase_residual"] < 1e-6
    assert np.isclose(diag["alpha_hat"], params.g / np.sqrt(params.omega), atol=1e-6)
    assert abs(diag["zeta"] - 1j) < 0.05
    assert np.isclose(diag["displacement"].real, params.g / (np.sqrt(2) * params.omega),
                      atol=0.05)
    assert np.isclose(diag["u_eff_measured"], params.U - params.g ** 2 / params.omega,
                      atol=1e-4)
    assert diag["mismatch_alpha"] and diag["mismatch_displacement"] and diag["mismatch_u_eff"]


def test_u_eff_measured_converges_in_n_max():
    errs = []
    for n_max in (2, 4, 8, 16):
        params = small_params(n_max=n_max)
        errs.append(abs(model._single_site_charge_gap(params)
                        - (params.U - params.g ** 2 / params.omega)))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-10


# -- zigzag -------------------------------------------------------------------------------


def test_zigzag_conjugations():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    Vf = model.zigzag_fermion(basis)
    assert np.max(np.abs(Vf @ Vf.conj().T - np.eye(basis.fermion_dim))) < 1e-12
    for x in lat.sites:
        for spin in ("up", "down"):
            got = Vf @ basis.c(x, spin) @ Vf.conj().T
            want = basis.cdag(x, spin) if lat.parity(x) == "odd" else basis.c(x, spin)
            assert np.max(np.abs(got - want)) < 1e-12, (x, spin)
        q = basis.charge(x)
        got = Vf @ q @ Vf.conj().T
        assert np.max(np.abs(got - lat.staggered_sign(x) * q)) < 1e-12


def test_doubleprime_is_zigzag_image_and_isospectral():
    lat = build_lattice(1, 1)
    params = small_params()
    basis = build_basis(lat, params.n_max)
    H1 = model.build_transformed(params, basis)
    H2 = model.build_doubleprime(params, basis)
    Vfull = model.build_zigzag(basis)
    assert np.max(np.abs(H2 - Vfull @ H1 @ Vfull.conj().T)) < 1e-10
    w1, w2 = np.linalg.eigvalsh(H1), np.linalg.eigvalsh(H2)
    assert np.max(np.abs(w1 - w2)) < 1e-10 * max(1.0, np.max(np.abs(w1)))


# -- external field ------------------------------------------------------------------------


def test_field_hamiltonian_at_zero_field():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    H2 = model.build_doubleprime(params, basis)
    assert np.array_equal(model.build_field_hamiltonian(params, basis, np.zeros(2)), H2)


def test_field_hamiltonian_constant_field():
    lat = build_lattice(2, 1)
    params = small_params(n_max=0)
    basis = build_basis(lat, params.n_max)
    H2 = model.build_doubleprime(params, basis)
    Hc = model.build_field_hamiltonian(params, basis, 1.3 * np.ones(4))
    assert np.max(np.abs(Hc - H2)) < 1e-12


def test_field_expansion_identity():
    # (V/2) sum_bonds (q_x - q_y)^2 + (u_eff - nu V) sum q^2 = u_eff sum q^2
    # - V sum q_x q_y, using the bond count of the directed enumeration
    lat = build_lattice(2, 1)
    params = small_params(n_max=0)
    basis = build_basis(lat, params.n_max)
    qd = model.charge_diagonals(basis)
    lhs = (params.u_eff - lat.nu * params.V) * sum(q ** 2 for q in qd)
    for b in lat.bonds():
        lhs += 0.5 * params.V * (qd[b.i] - qd[b.j]) ** 2
    rhs = params.u_eff * sum(q ** 2 for q in qd)
    for b in lat.bonds():
        rhs += -params.V * qd[b.i] * qd[b.j]
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_field_hamiltonian_hermitian_for_real_h():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    rng = np.random.default_rng(3)
    H = model.build_field_hamiltonian(params, basis, rng.standard_normal(2))
    assert is_hermitian(H, tol=1e-12)


# -- hole-particle, spin flip, a-operators ------------------------------------------------


def test_hole_particle_action():
    lat = build_lattice(1, 1)
    basis = build_basis(lat, 0)
    u = model.hole_particle_fermion(basis)
    assert np.max(np.abs(u @ u.conj().T - np.eye(basis.fermion_dim))) < 1e-12
    for x in lat.sites:
        up = u @ basis.c(x, "up") @ u.conj().T
        assert np.max(np.abs(up - basis.c(x, "up"))) < 1e-12
        dn = u @ basis.c(x, "down") @ u.conj().T
        want = lat.staggered_sign(x) * basis.cdag(x, "down")
        assert np.max(np.abs(dn - want)) < 1e-12
        q_conj = u @ basis.charge(x) @ u.conj().T
        assert np.max(np.abs(q_conj - basis.spin_z(x))) < 1e-12


def test_spin_flip_action():
    lat = build_lattice(1, 1)
    basis = build_basis(lat, 2)
    D = model.build_spin_flip(basis)
    assert np.max(np.abs(D @ D.conj().T - np.eye(basis.total_dim))) < 1e-12
    for x in lat.sites:
        cu = basis.embed_fermion(basis.c(x, "up"))
        cd = basis.embed_fermion(basis.c(x, "down"))
        assert np.max(np.abs(D @ cu @ D.conj().T - cd)) < 1e-12
        b = basis.embed_boson(basis.boson(x, "annihilate"))
        assert np.max(np.abs(D @ b @ D.conj().T + b)) < 1e-12


def test_spin_flip_fixes_hole_particle_image():
    lat = build_lattice(1, 1)
    params = small_params(n_max=1)
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    u = model.build_hole_particle(basis)
    D = model.build_spin_flip(basis)
    hh = u @ H @ u.conj().T
    assert np.max(np.abs(D @ hh @ D.conj().T - hh)) < 1e-10


def test_pure_fermion_limit_matches_charge_model():
    # g = 0, n_max = 0: the phonon factor is trivial and H reduces to the
    # extended Hubbard Hamiltonian; compare against an independent assembly
    lat = build_lattice(1, 1)
    params = small_params(g=1e-30, n_max=0)
    basis = build_basis(lat, params.n_max)
    H = model.build_original(params, basis)
    oracle = independent_original(params, lat, basis)
    assert np.max(np.abs(H - oracle)) < 1e-12
