import math

import numpy as np
import pytest
from scipy.integrate import quad

from tomokit import FockSuperposition, make_state
from tomokit import closed_forms as cf
from tomokit.errors import DimensionError, NonConvergenceError
from tomokit.reconstruction import (
    characteristic_function,
    displacement_matrix,
    displacement_matrix_element,
    fidelity,
    project_psd,
    read_samples_csv,
    reconstruct_from_samples,
    reconstruct_single_mode,
)
from tomokit.states import DensityMatrix, density_matrix, fock_wavefunction
from tomokit.tomography import subsystem_tomogram


def _bch_element(m, n, mu, nu):
    # exp(-i(mu q + nu p)) psi_n (q) = e^{i mu nu / 2} e^{-i mu q} psi_n(q - nu)
    def integrand(q, part):
        v = fock_wavefunction(m, q) * np.exp(1j * (mu * nu / 2 - mu * q)) * fock_wavefunction(n, q - nu)
        return part(v)

    re = quad(integrand, -15, 15, args=(np.real,), limit=300, epsabs=1e-13)[0]
    im = quad(integrand, -15, 15, args=(np.imag,), limit=300, epsabs=1e-13)[0]
    return re + 1j * im


@pytest.mark.parametrize("mu,nu", [(0.0, 0.0), (0.7, -0.4), (-1.3, 0.9), (0.2, 2.1)])
def test_displacement_elements_match_bch_oracle(mu, nu):
    for m in range(4):
        for n in range(4):
            assert abs(displacement_matrix_element(m, n, mu, nu) - _bch_element(m, n, mu, nu)) < 1e-11


def test_displacement_examples():
    assert displacement_matrix_element(0, 0, 0.0, 0.0) == 1.0
    assert displacement_matrix_element(0, 0, 0.6, -0.8) == pytest.approx(math.exp(-0.25), rel=1e-14)


def test_displacement_matrix_is_unitary_on_low_block():
    d = displacement_matrix(40, 0.5, -0.3)
    block = (d @ d.conj().T)[:10, :10]
    np.testing.assert_allclose(block, np.eye(10), atol=1e-12)
    assert displacement_matrix(3, np.zeros(5), np.zeros(5)).shape == (5, 3, 3)


def _marg(state):
    return lambda x, mu, nu: subsystem_tomogram(state, 0, x, mu, nu)


def test_characteristic_function_examples(vac, one):
    for mu, nu in [(0.3, 0.4), (-1.5, 0.2), (2.0, -2.0)]:
        s = mu * mu + nu * nu
        assert characteristic_function(_marg(vac), mu, nu) == pytest.approx(math.exp(-s / 4), abs=1e-12)
        assert characteristic_function(_marg(one), mu, nu) == pytest.approx((1 - s / 2) * math.exp(-s / 4), abs=1e-12)
    assert characteristic_function(_marg(one), 0.0, 0.0) == 1.0


def test_characteristic_function_conjugate_symmetry():
    psi = FockSuperposition.from_amplitudes({(0,): 0.6, (1,): 0.48j, (2,): -0.64})
    for mu, nu in [(0.4, 0.3), (-1.1, 0.7), (1.9, -2.2)]:
        a = characteristic_function(_marg(psi), mu, nu)
        b = characteristic_function(_marg(psi), -mu, -nu)
        assert abs(b - np.conj(a)) < 1e-10
    assert abs(characteristic_function(_marg(psi), 0.4, 0.3).imag) > 1e-3


def test_characteristic_function_adaptive(one):
    a = characteristic_function(_marg(one), 0.8, -0.6, method="adaptive")
    b = characteristic_function(_marg(one), 0.8, -0.6)
    assert a == pytest.approx(b, abs=1e-11)
    with pytest.raises(ValueError):
        characteristic_function(_marg(one), 0.8, -0.6, method="simpson")


def test_characteristic_function_detects_lost_mass(vac):
    with pytest.raises(NonConvergenceError):
        characteristic_function(lambda x, m, n: 0.9 * subsystem_tomogram(vac, 0, x, m, n), 0.5, 0.5)


def test_reconstruct_examples(vac):
    rho = reconstruct_single_mode(_marg(vac), 6)
    assert rho.entries[0, 0].real == pytest.approx(1.0, abs=1e-3)
    off = rho.entries.copy()
    off[0, 0] = 0
    assert np.max(np.abs(off)) < 1e-3
    mixed = reconstruct_single_mode(cf.marg_ent, 6)
    np.testing.assert_allclose(np.diag(mixed.entries.real)[:2], [0.5, 0.5], atol=1e-3)
    assert np.max(np.abs(mixed.entries - np.diag(np.diag(mixed.entries)))) < 1e-3


def test_reconstruct_superposition_phases():
    psi = FockSuperposition.from_amplitudes({(0,): 1 / math.sqrt(2), (1,): 1j / math.sqrt(2)})
    rho = reconstruct_single_mode(_marg(psi), 4)
    truth = density_matrix(psi).embed((5,))
    np.testing.assert_allclose(rho.entries, truth.entries, atol=1e-3)
    assert fidelity(rho, density_matrix(psi)) > 0.999


def test_raw_and_psd_outputs(one):
    raw = reconstruct_single_mode(_marg(one), 4, symmetrize=False)
    assert raw.hermiticity_error() < 1e-10
    psd = reconstruct_single_mode(_marg(one), 4, psd=True)
    assert psd.eigenvalues().min() >= -1e-15
    assert psd.trace().real == pytest.approx(1.0, abs=1e-14)


def test_low_cutoff_is_reported():
    high = FockSuperposition.basis((5,))
    with pytest.raises(NonConvergenceError):
        reconstruct_single_mode(_marg(high), 2)


def _sample_cube(state, mu, nu, x):
    cube = np.empty((mu.size, nu.size, x.size))
    for i, m in enumerate(mu):
        for j, n in enumerate(nu):
            if m == 0 and n == 0:
                cube[i, j] = 0.0
                cube[i, j, np.argmin(np.abs(x))] = 1.0
            else:
                cube[i, j] = subsystem_tomogram(state, 0, x, m, n)
    return cube


def test_reconstruct_from_samples(one):
    mu = nu = np.linspace(-6, 6, 41)
    x = np.linspace(-40, 40, 801)
    rho = reconstruct_from_samples(mu, nu, x, _sample_cube(one, mu, nu, x), 4)
    assert fidelity(rho, density_matrix(one)) > 0.999
    assert abs(rho.trace() - 1) < 1e-3
    with pytest.raises(DimensionError):
        reconstruct_from_samples(mu, nu, x, np.zeros((2, 2, 2)), 4)


def test_read_samples_csv(tmp_path):
    good = tmp_path / "s.csv"
    rows = ["mu,nu,X,w"] + [f"{m},{n},{x},{m + n + x}" for m in (0, 1) for n in (-1, 1) for x in (0, 1, 2)]
    good.write_text("\n".join(rows) + "\n")
    mu, nu, x, cube = read_samples_csv(good)
    assert mu.tolist() == [0, 1] and nu.tolist() == [-1, 1] and x.tolist() == [0, 1, 2]
    assert cube[1, 0, 2] == 1 - 1 + 2
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("mu,nu,x,w\n0,0,0,1\n")
    with pytest.raises(ValueError, match="header"):
        read_samples_csv(bad_header)
    missing = tmp_path / "m.csv"
    missing.write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(ValueError, match="product grid"):
        read_samples_csv(missing)
    text = tmp_path / "t.csv"
    text.write_text("mu,nu,X,w\n0,0,a,1\n")
    with pytest.raises(ValueError, match="non-numeric"):
        read_samples_csv(text)


def test_project_psd():
    rho = DensityMatrix((2,), np.array([[1.1, 0.0], [0.0, -0.1]]))
    p = project_psd(rho)
    np.testing.assert_allclose(p.entries, np.diag([1.0, 0.0]), atol=1e-15)


def test_fidelity_properties(vac, one):
    r0, r1 = density_matrix(vac), density_matrix(one)
    assert fidelity(r0, r0) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(r0, r1) == pytest.approx(0.0, abs=1e-12)
    mixed = DensityMatrix.from_diagonal([0.25, 0.75])
    assert fidelity(mixed, r1) == pytest.approx(0.75, abs=1e-12)
    assert fidelity(mixed, mixed) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionError):
        fidelity(mixed, density_matrix(make_state("ent")))
