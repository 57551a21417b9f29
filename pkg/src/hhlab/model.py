"""Hamiltonians of the extended Holstein-Hubbard model and its unitary images.

Three Hamiltonians live here, each assembled directly from its defining
formula (conjugation by the explicit unitaries is a cross-check, never the
definition):

* ``build_original``     H  = T + P + I + K: hopping, on-site U and
  nearest-neighbor V charge repulsion, linear electron-phonon coupling g,
  dispersionless phonons omega.
* ``build_transformed``  H' = T' + P' + K: hopping dressed with phonon
  phase factors exp(-i alpha (phi_x - phi_y)), alpha = sqrt(2) omega^-3/2 g,
  and U replaced by u_eff = U - 2 g^2 / omega.
* ``build_doubleprime``  H'' = T'' + P'' + K: the zigzag image of H', with
  hopping turned into same-spin pairing on even-site bonds and the V term
  sign-flipped.  ``build_field_hamiltonian`` adds the external field h that
  the Gaussian-domination argument differentiates through:
  P''(h) = (u_eff - nu V) sum_x q_x^2 + (V/2) sum_bonds (q_x - h_x - q_y + h_y)^2,
  so H''(0) = H'' entrywise and h enters only through differences.

Charge operators q_x commute with every transformation generator used here,
which is what makes the zigzag sign relation for charge correlations an
exact finite-dimensional identity (see hhlab.thermo.charge_correlation).

The displayed Lang-Firsov constants are treated as data to be measured, not
assumed: ``lang_firsov_diagnostic`` extracts the displacement and phase
constants actually generated by the unitary and flags disagreements with
the displayed alpha, g/omega and u_eff values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .hilbert import adjoint, hermiticity_residual

__all__ = [
    "ModelParams",
    "HamiltonianSet",
    "build_original",
    "build_transformed",
    "build_doubleprime",
    "build_field_hamiltonian",
    "field_diagonal_correction",
    "build_parts",
    "hamiltonian_set",
    "lang_firsov",
    "build_zigzag",
    "zigzag_fermion",
    "build_hole_particle",
    "hole_particle_fermion",
    "build_spin_flip",
    "build_a_operators",
    "expm_i_hermitian",
    "fermion_mode_permutation",
    "lang_firsov_diagnostic",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings, inverse temperature and phonon truncation.

    t, U, V, omega must be positive; g is any real; beta >= 0.
    """

    t: float
    U: float
    V: float
    g: float
    omega: float
    beta: float
    n_max: int = 2

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError(f"t must be > 0, got {self.t}")
        if self.U <= 0:
            raise ValueError(f"U must be > 0, got {self.U}")
        if self.V <= 0:
            raise ValueError(f"V must be > 0, got {self.V}")
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")

    @property
    def alpha(self):
        """Hopping phase constant alpha = sqrt(2) omega^(-3/2) g."""
        return np.sqrt(2.0) * self.omega ** (-1.5) * self.g

    @property
    def u_eff(self):
        """Effective on-site interaction u_eff = U - 2 g^2 / omega."""
        return self.U - 2.0 * self.g ** 2 / self.omega


@dataclass
class HamiltonianSet:
    """H, H' and H'' on a common basis, plus their named parts."""

    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    parts: dict = field(default_factory=dict)


def _require_lattice(basis):
    if basis.lattice is None:
        raise ValueError("this builder needs a basis constructed from a lattice")
    return basis.lattice


def expm_i_hermitian(h):
    """exp(i h) for Hermitian h, via eigendecomposition (exactly unitary)."""
    w, q = np.linalg.eigh(h)
    return (q * np.exp(1j * w)) @ q.conj().T


def _hop_phase(basis, params, x, y):
    """exp(-i alpha (phi_x - phi_y)) on the boson factor."""
    phi_x = basis.boson(x, "position", omega=params.omega)
    phi_y = basis.boson(y, "position", omega=params.omega)
    return expm_i_hermitian(-params.alpha * (phi_x - phi_y))


# -- Hamiltonian builders ---------------------------------------------------------


def build_parts(params, basis):
    """Named components of H = T + P + I + K as full-space matrices."""
    lat = _require_lattice(basis)
    nf, nb = basis.fermion_dim, basis.boson_dim
    eye_f = np.eye(nf, dtype=complex)

    T_f = np.zeros((nf, nf), dtype=complex)
    P_f = np.zeros((nf, nf), dtype=complex)
    for b in lat.bonds():
        x, y = lat.sites[b.i], lat.sites[b.j]
        for spin in ("up", "down"):
            hop = basis.cdag(x, spin) @ basis.c(y, spin)
            T_f += -params.t * (hop + adjoint(hop))
        P_f += params.V * basis.charge(x) @ basis.charge(y)
    for x in lat.sites:
        P_f += params.U * basis.charge(x) @ basis.charge(x)

    I_full = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
    K_b = np.zeros((nb, nb), dtype=complex)
    for x in lat.sites:
        bx = basis.boson(x, "annihilate")
        I_full += params.g * basis.kron_fb(basis.charge(x), bx + adjoint(bx))
        K_b += params.omega * basis.boson(x, "number")

    return {
        "T": basis.embed_fermion(T_f),
        "P": basis.embed_fermion(P_f),
        "I": I_full,
        "K": basis.embed_boson(K_b),
    }


def build_original(params, basis):
    """The extended Holstein-Hubbard Hamiltonian H = T + P + I + K."""
    parts = build_parts(params, basis)
    return parts["T"] + parts["P"] + parts["I"] + parts["K"]


def original_structures(basis):
    """Unit-coupling structure matrices of H: the family
    H(t, U, V, g, omega) = t S_t + U S_U + V S_V + g S_g + omega S_omega.

    Feed to :class:`hhlab.thermo.HamiltonianFamily` for fast parameter scans
    on a fixed geometry.
    """
    lat = _require_lattice(basis)
    nf = basis.fermion_dim
    hop = np.zeros((nf, nf), dtype=complex)
    vv = np.zeros((nf, nf), dtype=complex)
    for b in lat.bonds():
        x, y = lat.sites[b.i], lat.sites[b.j]
        for spin in ("up", "down"):
            term = basis.cdag(x, spin) @ basis.c(y, spin)
            hop += -(term + adjoint(term))
        vv += basis.charge(x) @ basis.charge(y)
    uu = np.zeros((nf, nf), dtype=complex)
    coup = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
    num = np.zeros((basis.boson_dim, basis.boson_dim), dtype=complex)
    for x in lat.sites:
        uu += basis.charge(x) @ basis.charge(x)
        bx = basis.boson(x, "annihilate")
        coup += basis.kron_fb(basis.charge(x), bx + adjoint(bx))
        num += basis.boson(x, "number")
    return {
        "t": basis.embed_fermion(hop),
        "U": basis.embed_fermion(uu),
        "V": basis.embed_fermion(vv),
        "g": coup,
        "omega": basis.embed_boson(num),
    }


def _pairless_charge_terms(params, basis, u_coeff, v_coeff):
    """u_coeff sum_x q_x^2 + v_coeff sum_bonds q_x q_y, on the fermion factor."""
    lat = basis.lattice
    nf = basis.fermion_dim
    out = np.zeros((nf, nf), dtype=complex)
    for x in lat.sites:
        out += u_coeff * basis.charge(x) @ basis.charge(x)
    for b in lat.bonds():
        out += v_coeff * basis.charge(lat.sites[b.i]) @ basis.charge(lat.sites[b.j])
    return out


def build_transformed(params, basis, parts_out=None):
    """H' = T' + P' + K from its defining formula (not by conjugation)."""
    lat = _require_lattice(basis)
    T1 = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
    for b in lat.bonds():
        x, y = lat.sites[b.i], lat.sites[b.j]
        phase = _hop_phase(basis, params, x, y)
        for spin in ("up", "down"):
            term = basis.kron_fb(basis.cdag(x, spin) @ basis.c(y, spin), phase)
            T1 += -params.t * (term + adjoint(term))
    P1 = basis.embed_fermion(_pairless_charge_terms(params, basis, params.u_eff, params.V))
    K = build_parts_K(params, basis)
    if parts_out is not None:
        parts_out.update({"T1": T1, "P1": P1})
    return T1 + P1 + K


def build_parts_K(params, basis):
    K_b = np.zeros((basis.boson_dim, basis.boson_dim), dtype=complex)
    for x in basis.sites:
        K_b += params.omega * basis.boson(x, "number")
    return basis.embed_boson(K_b)


def pairing_bond_terms(params, basis):
    """The pairing terms of T'': one matrix per (even site, direction, eps).

    Each entry is -t (c*_{x s} c*_{y s} (x) exp(-i alpha (phi_x - phi_y)) + h.c.)
    summed over spin, with y = x + eps delta_j.  Their sum is T''.  For L = 1
    the eps = +/- terms coincide pairwise (doubled wrap bonds, intended).
    """
    lat = _require_lattice(basis)
    out = []
    for x in lat.even_sites:
        for j in range(1, lat.nu + 1):
            for eps in (+1, -1):
                y = lat.shift(x, j, eps)
                phase = _hop_phase(basis, params, x, y)
                term = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
                for spin in ("up", "down"):
                    pair = basis.kron_fb(basis.cdag(x, spin) @ basis.cdag(y, spin), phase)
                    term += -params.t * (pair + adjoint(pair))
                out.append(((x, y, j, eps), term))
    return out


def build_doubleprime(params, basis, parts_out=None):
    """H'' = T'' + P'' + K from its defining formula."""
    T2 = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
    for _, term in pairing_bond_terms(params, basis):
        T2 += term
    P2 = basis.embed_fermion(_pairless_charge_terms(params, basis, params.u_eff, -params.V))
    K = build_parts_K(params, basis)
    if parts_out is not None:
        parts_out.update({"T2": T2, "P2": P2})
    return T2 + P2 + K


def charge_diagonals(basis):
    """Diagonal of every q_x on the fermion factor, shape (n_sites, fermion_dim)."""
    nf = basis.fermion_dim
    idx = np.arange(nf)
    out = np.zeros((basis.n_sites, nf))
    for s, x in enumerate(basis.sites):
        up = (idx >> (basis.n_modes - 1 - basis.mode_index(x, "up"))) & 1
        dn = (idx >> (basis.n_modes - 1 - basis.mode_index(x, "down"))) & 1
        out[s] = up + dn - 1
    return out


def field_diagonal_correction(params, basis, h):
    """Diagonal vector d(h) on the fermion factor with H''(h) = H'' + d(h).

    Expanding P''(h) - P''(0) = -V sum_bonds (q_x - q_y)(h_x - h_y)
    + (V/2) sum_bonds (h_x - h_y)^2; both pieces are diagonal in the
    occupancy basis because the q_x are.
    """
    lat = _require_lattice(basis)
    h = np.asarray(h, dtype=float)
    q = charge_diagonals(basis)
    diag = np.zeros(basis.fermion_dim)
    const = 0.0
    for b in lat.bonds():
        dh = h[b.i] - h[b.j]
        diag += -params.V * (q[b.i] - q[b.j]) * dh
        const += 0.5 * params.V * dh * dh
    return diag + const


def build_field_hamiltonian(params, basis, h):
    """H''(h) = T'' + P''(h) + K; equals H'' entrywise at h = 0."""
    h = np.asarray(h, dtype=float)
    H2 = build_doubleprime(params, basis)
    corr = np.repeat(field_diagonal_correction(params, basis, h), basis.boson_dim)
    return H2 + np.diag(corr.astype(complex))


def hamiltonian_set(params, basis):
    """All three Hamiltonians plus named parts (small bases only)."""
    parts = build_parts(params, basis)
    H = parts["T"] + parts["P"] + parts["I"] + parts["K"]
    H1 = build_transformed(params, basis, parts_out=parts)
    H2 = build_doubleprime(params, basis, parts_out=parts)
    hs = HamiltonianSet(H=H, H1=H1, H2=H2, parts=parts)
    for name, m in (("H", H), ("H1", H1), ("H2", H2)):
        res = hermiticity_residual(m)
        if res > 1e-12 * max(1.0, float(np.max(np.abs(m)))):
            raise AssertionError(f"{name} fails Hermiticity: residual {res}")
    return hs


# -- unitary transformations -------------------------------------------------------


def lang_firsov(params, basis):
    """The Lang-Firsov unitary exp(-i pi N_p / 2) exp(L) on the full space,

    with L = -i omega^(-3/2) g sum_x q_x pi_x (anti-Hermitian, so exp(L) is
    exactly unitary at any truncation).  Meant for small bases; the
    generator is exponentiated by dense eigendecomposition.
    """
    n_b = np.zeros((basis.boson_dim, basis.boson_dim), dtype=complex)
    for x in basis.sites:
        n_b += basis.boson(x, "number")
    rot = basis.embed_boson(np.diag(np.exp(-0.5j * np.pi * np.diag(n_b))))

    gen = np.zeros((basis.total_dim, basis.total_dim), dtype=complex)
    for x in basis.sites:
        gen += basis.kron_fb(basis.charge(x), basis.boson(x, "momentum", omega=params.omega))
    # L = -i c * gen  =>  exp(L) = exp(i * (-c * gen)) with gen Hermitian
    c = params.omega ** (-1.5) * params.g
    return rot @ expm_i_hermitian(-c * gen)


def _particle_hole_factor(basis, x, spin):
    """v_{x s} = [prod over all other modes of (-1)^n] (c*_{x s} + c_{x s}).

    The sign string runs over every mode except (x, s); with this full
    string, v c_Y v^-1 = c_Y exactly for all other modes Y (a string over
    same-spin modes only would add a global sign per conjugated factor,
    harmless for Hamiltonian conjugation but breaking the operator-level
    identities).  v is its own inverse.
    """
    nf = basis.fermion_dim
    idx = np.arange(nf)
    own = basis.mode_index(x, spin)
    string = np.ones(nf)
    for m in range(basis.n_modes):
        if m == own:
            continue
        occ = (idx >> (basis.n_modes - 1 - m)) & 1
        string = string * np.where(occ, -1.0, 1.0)
    return np.diag(string.astype(complex)) @ (basis.cdag(x, spin) + basis.c(x, spin))


def zigzag_fermion(basis):
    """Zigzag unitary on the fermion factor: product of v_{x up} v_{x down}
    over odd sites, in lattice site order.  Conjugation sends c_{x s} to
    c*_{x s} on the odd sublattice and leaves the even sublattice alone,
    hence q_x -> (-1)^|x| q_x.
    """
    lat = _require_lattice(basis)
    out = np.eye(basis.fermion_dim, dtype=complex)
    for x in lat.odd_sites:
        for spin in ("up", "down"):
            out = out @ _particle_hole_factor(basis, x, spin)
    return out


def build_zigzag(basis):
    """Zigzag unitary on the full space (acts as identity on phonons)."""
    return np.kron(zigzag_fermion(basis), np.eye(basis.boson_dim, dtype=complex))


def fermion_mode_permutation(basis, perm):
    """Second-quantized unitary of a mode permutation: c*_m -> c*_{perm[m]}.

    Built by re-creating each occupied basis bitstring with the permuted
    modes; Jordan-Wigner signs come out automatically.
    """
    nf, M = basis.fermion_dim, basis.n_modes
    u = np.zeros((nf, nf), dtype=complex)
    for i in range(nf):
        occ = [m for m in range(M) if (i >> (M - 1 - m)) & 1]
        targets = [perm[m] for m in occ]
        # sign = parity of the permutation sorting `targets`
        sign = 1
        ts = list(targets)
        for a in range(len(ts)):
            for b in range(a + 1, len(ts)):
                if ts[a] > ts[b]:
                    sign = -sign
        j = 0
        for m in targets:
            j |= 1 << (M - 1 - m)
        u[j, i] = sign
    return u


def hole_particle_fermion(basis):
    """Hole-particle unitary u on the fermion factor:

    u c_{x up} u^-1 = c_{x up} and u c_{x down} u^-1 = (-1)^|x| c*_{x down},
    hence u q_x u^-1 = s_x.  Built as the product of single-mode
    particle-hole factors on the down modes followed by a phase twist
    (-1)^{n_{x down}} on odd sites.
    """
    lat = _require_lattice(basis)
    nf = basis.fermion_dim
    idx = np.arange(nf)
    out = np.eye(nf, dtype=complex)
    for x in lat.sites:
        out = out @ _particle_hole_factor(basis, x, "down")
    twist = np.ones(nf)
    for x in lat.odd_sites:
        m = basis.mode_index(x, "down")
        occ = (idx >> (basis.n_modes - 1 - m)) & 1
        twist = twist * np.where(occ, -1.0, 1.0)
    return np.diag(twist.astype(complex)) @ out


def build_hole_particle(basis):
    """Hole-particle unitary on the full space (identity on phonons)."""
    return np.kron(hole_particle_fermion(basis), np.eye(basis.boson_dim, dtype=complex))


def build_spin_flip(basis):
    """Spin-swap (x) phonon-parity unitary D:

    D c_{x up} D^-1 = c_{x down}, D c_{x down} D^-1 = c_{x up},
    D b_x D^-1 = -b_x.
    """
    perm = {}
    for x in basis.sites:
        mu, md = basis.mode_index(x, "up"), basis.mode_index(x, "down")
        perm[mu], perm[md] = md, mu
    swap = fermion_mode_permutation(basis, perm)
    n_tot = np.zeros(basis.boson_dim)
    for x in basis.sites:
        n_tot += np.real(np.diag(basis.boson(x, "number")))
    parity = np.diag(np.where(np.round(n_tot).astype(int) % 2 == 1, -1.0, 1.0).astype(complex))
    return np.kron(swap, parity)


def build_a_operators(basis):
    """Left-half annihilators a_{x s} = c_{x s} (-1)^{N_L}, fermion factor.

    N_L counts fermions on sites with x_1 < 0 (for a half-space basis that
    is every site).  Returns {(site, spin): matrix}; the a's satisfy the
    canonical anticommutation relations exactly.
    """
    left = [x for x in basis.sites if x[0] < 0]
    par = basis.fermion_parity(left)
    return {(x, s): basis.c(x, s) @ par for x in left for s in ("up", "down")}


# -- Lang-Firsov constant diagnostics ----------------------------------------------


def lang_firsov_diagnostic(params, basis, rtol=1e-6):
    """Measure the conjugation constants that the Lang-Firsov unitary
    actually generates, and compare with the displayed values.

    Returns a dict with the fitted coefficients of
    U b_x U^-1 = zeta * b_x - d * q_x  (least squares over {b, q}),
    the fitted alpha_hat minimizing || {U c U^-1, c*} - exp(i a phi_x) ||_F,
    the single-site polaron-shifted charge gap as a measured u_eff, and
    boolean mismatch flags against the displayed (1, g/omega, alpha, u_eff).
    Small bases only (dense exponentials).
    """
    U = lang_firsov(params, basis)
    Ui = U.conj().T
    x = basis.sites[0]

    b_full = basis.embed_boson(basis.boson(x, "annihilate"))
    q_full = basis.embed_fermion(basis.charge(x))
    target = U @ b_full @ Ui

    # fit away from the truncation boundary: the top phonon rungs carry O(1)
    # Frobenius-weight artifacts (and by trace cyclicity a global fit cannot
    # see the q term at all), so restrict to low occupations on every site
    low = max(1, basis.n_max // 2)
    keep = np.ones(basis.boson_dim, dtype=bool)
    for i in range(basis.boson_dim):
        keep[i] = all(n <= low for n in basis.boson_tuple(i))
    proj = basis.embed_boson(np.diag(keep.astype(complex)))

    def tr(a, b):
        return complex(np.vdot(proj @ a @ proj, proj @ b @ proj))

    gram = np.array([[tr(b_full, b_full), tr(b_full, q_full)],
                     [tr(q_full, b_full), tr(q_full, q_full)]])
    rhs = np.array([tr(b_full, target), tr(q_full, target)])
    zeta, minus_d = np.linalg.solve(gram, rhs)
    d = -minus_d
    resid = proj @ (target - zeta * b_full + d * q_full) @ proj
    disp_residual = float(np.linalg.norm(resid)
                          / max(np.linalg.norm(proj @ target @ proj), 1e-300))

    c_full = basis.embed_fermion(basis.c(x, "up"))
    cd_full = basis.embed_fermion(basis.cdag(x, "up"))
    conj_c = U @ c_full @ Ui
    phase_op = conj_c @ cd_full + cd_full @ conj_c
    phi = basis.embed_boson(basis.boson(x, "position", omega=params.omega))

    def mismatch_norm(a):
        return float(np.linalg.norm(phase_op - expm_i_hermitian(a * phi)))

    scale = max(abs(params.alpha), abs(params.g) / np.sqrt(params.omega), 1e-3)
    res = minimize_scalar(mismatch_norm, bounds=(-8 * scale, 8 * scale), method="bounded",
                          options={"xatol": 1e-12})
    alpha_hat = float(res.x)
    phase_residual = float(res.fun) / max(float(np.linalg.norm(phase_op)), 1e-300)

    u_eff_measured = _single_site_charge_gap(params)

    displayed_d = params.g / params.omega
    return {
        "zeta": complex(zeta),
        "displacement": complex(d),
        "displacement_residual": disp_residual,
        "displayed_displacement": displayed_d,
        "alpha_hat": alpha_hat,
        "phase_residual": phase_residual,
        "displayed_alpha": float(params.alpha),
        "u_eff_measured": u_eff_measured,
        "displayed_u_eff": float(params.u_eff),
        "mismatch_displacement": not (abs(zeta - 1.0) <= rtol and
                                      abs(d - displayed_d) <= rtol * max(1.0, abs(displayed_d))),
        "mismatch_alpha": not abs(alpha_hat - params.alpha) <= rtol * max(1.0, abs(params.alpha)),
        "mismatch_u_eff": not abs(u_eff_measured - params.u_eff) <= 1e-3 * max(1.0, abs(params.u_eff)),
    }


def _single_site_charge_gap(params):
    """Measured effective on-site repulsion: ground energy of the |q| = 1
    sector of the one-site problem U q^2 + g q (b + b*) + omega b* b,
    relative to the q = 0 sector.  Converges to U - g^2/omega as n_max grows.
    """
    d = params.n_max + 1
    b = np.zeros((d, d))
    for n in range(1, d):
        b[n - 1, n] = np.sqrt(n)
    k = params.omega * b.T @ b
    coup = params.g * (b + b.T)
    e_charged = np.linalg.eigvalsh(params.U * np.eye(d) + coup + k)[0]
    e_neutral = np.linalg.eigvalsh(k)[0]
    return float(e_charged - e_neutral)
