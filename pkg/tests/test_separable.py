import json
import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from tomokit import FockSuperposition, TomographyFrame, make_state
from tomokit.errors import DegenerateFrameError, DimensionError, InvalidStateError
from tomokit.separable import (
    SeparableDecomposition,
    entanglement_witness_gap,
    separable_cm,
    separable_symplectic,
)
from tomokit.tomography import cm_tomogram, symplectic_tomogram

DIAG = TomographyFrame((1.0, 1.0), (0.0, 0.0))


def _single(a, b):
    return SeparableDecomposition((1.0,), ((a, b),))


def test_cm_examples(vac, one):
    assert separable_cm(_single(vac, vac), 0.0, DIAG) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)
    assert separable_cm(_single(vac, one), 0.0, DIAG) == pytest.approx(1 / math.sqrt(8 * math.pi), abs=1e-12)


def test_symplectic_single_term_is_product(vac, one, sep, rng):
    f = TomographyFrame(tuple(rng.uniform(-2, 2, 2)), tuple(rng.uniform(-2, 2, 2)))
    pts = rng.normal(size=(25, 2))
    np.testing.assert_allclose(separable_symplectic(_single(vac, one), pts, f), symplectic_tomogram(sep, pts, f), atol=1e-15)


def test_symplectic_mixture_zero_at_origin(vac, one):
    d = SeparableDecomposition((0.5, 0.5), ((vac, one), (one, vac)))
    assert separable_symplectic(d, [0.0, 0.0], DIAG) == 0.0


def test_mixture_normalization(vac, one):
    d = SeparableDecomposition((0.3, 0.7), ((vac, one), (one, one)))
    f = TomographyFrame((0.8, -1.1), (0.5, 0.2))
    axes = [np.linspace(-8 * math.sqrt(s), 8 * math.sqrt(s), 201) for s in f.mode_sigmas]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = separable_symplectic(d, pts, f)
    mass = np.trapezoid(np.trapezoid(vals, axes[1], axis=1), axes[0])
    assert mass == pytest.approx(1.0, abs=1e-10)
    xs = np.linspace(-8 * math.sqrt(f.sigma), 8 * math.sqrt(f.sigma), 201)
    assert np.trapezoid(separable_cm(d, xs, f), xs) == pytest.approx(1.0, abs=1e-10)


def test_convexity(vac, one, ent):
    parts = ((ent, one), (make_state("sep"), vac))
    d = SeparableDecomposition((0.25, 0.75), parts)
    f = TomographyFrame((0.8, -1.1, 0.4), (0.5, 0.2, -0.9))
    xs = np.linspace(-5, 5, 21)
    mix = separable_cm(d, xs, f)
    expected = 0.25 * separable_cm(_single(*parts[0]), xs, f) + 0.75 * separable_cm(_single(*parts[1]), xs, f)
    np.testing.assert_allclose(mix, expected, atol=1e-14)


@pytest.mark.parametrize("first,second", [("vac", "vac"), ("vac", "one"), ("one", "one")])
def test_single_term_matches_direct_cm(first, second, request, rng):
    a, b = request.getfixturevalue(first), request.getfixturevalue(second)
    xs = np.linspace(-5, 5, 51)
    for _ in range(3):
        f = TomographyFrame(tuple(rng.uniform(-2, 2, 2)), tuple(rng.uniform(-2, 2, 2)))
        np.testing.assert_allclose(separable_cm(_single(a, b), xs, f), cm_tomogram(a.tensor(b), xs, f), atol=1e-12)


def test_three_mode_split_matches_direct_cm(ent, one, rng):
    xs = np.linspace(-5, 5, 51)
    for _ in range(2):
        f = TomographyFrame(tuple(rng.uniform(-2, 2, 3)), tuple(rng.uniform(-2, 2, 3)))
        np.testing.assert_allclose(separable_cm(_single(ent, one), xs, f), cm_tomogram(ent.tensor(one), xs, f), atol=1e-10)
    # (N1, N2) = (1, 2) as well
    f = TomographyFrame((0.7, -0.3, 1.2), (0.1, 0.9, -0.6))
    np.testing.assert_allclose(separable_cm(_single(one, ent), xs, f), cm_tomogram(one.tensor(ent), xs, f), atol=1e-10)


def _fourier_composition(decomp, xs, frame, nodes=200):
    # w(X) = (1/2pi) int dk e^{-ikX} sum_k p_k chi1_k(k) chi2_k(k), chi from GL transforms of the factors
    f1 = frame.subframe(range(decomp.n1))
    f2 = frame.subframe(range(decomp.n1, decomp.num_modes))
    kmax = 14.0 / math.sqrt(frame.sigma)
    k, wk = leggauss(nodes)
    k, wk = kmax * k, kmax * wk

    def chi(state, sub):
        half = 10 * math.sqrt(sub.sigma)
        z, wz = leggauss(nodes)
        z, wz = half * z, half * wz
        return np.exp(1j * np.outer(k, z)) @ (wz * cm_tomogram(state, z, sub))

    spectrum = sum(p * chi(a, f1) * chi(b, f2) for p, (a, b) in zip(decomp.weights, decomp.parts))
    return (np.exp(-1j * np.outer(xs, k)) @ (wk * spectrum)).real / (2 * math.pi)


def test_convolution_agrees_with_fourier_kernel(ent, one, vac):
    d = SeparableDecomposition((0.4, 0.6), ((ent, one), (make_state("ground"), vac)))
    f = TomographyFrame((0.8, -1.1, 0.4), (0.5, 0.2, -0.9))
    xs = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(separable_cm(d, xs, f), _fourier_composition(d, xs, f), atol=1e-9)


def test_zero_subsystem_frame_reduces_to_other_factor(ent, one):
    d = _single(ent, one)
    xs = np.linspace(-4, 4, 17)
    f = TomographyFrame((0.6, -0.8, 0.0), (0.3, 0.1, 0.0))
    np.testing.assert_allclose(separable_cm(d, xs, f), cm_tomogram(ent, xs, f.subframe([0, 1])), atol=1e-15)
    g = TomographyFrame((0.0, 0.0, 1.3), (0.0, 0.0, 0.4))
    np.testing.assert_allclose(separable_cm(d, xs, g), cm_tomogram(one, xs, g.subframe([2])), atol=1e-15)


def test_decomposition_validation(vac, one, ent):
    with pytest.raises(InvalidStateError):
        SeparableDecomposition((0.5, 0.6), ((vac, one), (one, vac)))
    with pytest.raises(InvalidStateError):
        SeparableDecomposition((1.2, -0.2), ((vac, one), (one, vac)))
    with pytest.raises(InvalidStateError):
        SeparableDecomposition((0.5, 0.5), ((vac, one), (ent, vac)))
    with pytest.raises(InvalidStateError):
        SeparableDecomposition((), ())
    d = _single(vac, one)
    with pytest.raises(DimensionError):
        separable_cm(d, 0.0, TomographyFrame((1.0,), (0.0,)))
    with pytest.raises(DimensionError):
        separable_symplectic(d, [0.0], DIAG)
    with pytest.raises(DegenerateFrameError):
        separable_symplectic(d, [0.0, 0.0], TomographyFrame((1.0, 0.0), (0.0, 0.0)))


def test_json_round_trip(vac, one, ent):
    d = SeparableDecomposition((0.3, 0.7), ((ent, one), (make_state("sep"), vac)))
    back = SeparableDecomposition.loads(json.dumps(d.to_json_dict()))
    assert back == d
    with pytest.raises(InvalidStateError):
        SeparableDecomposition.loads("{")
    with pytest.raises(InvalidStateError):
        SeparableDecomposition.loads('{"weights": [1.0]}')


def test_witness_gap(ent, sep, w_state, vac):
    assert entanglement_witness_gap(ent) == pytest.approx(0.5, abs=1e-10)
    assert entanglement_witness_gap(sep) == pytest.approx(0.0, abs=1e-10)
    assert entanglement_witness_gap(make_state("ground")) == 0.0
    assert entanglement_witness_gap(w_state, (2,)) == pytest.approx(math.sqrt(2) / 3, abs=1e-12)
    product = FockSuperposition.from_amplitudes({(0,): 0.6, (1,): 0.8}).tensor(vac)
    assert entanglement_witness_gap(product) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DimensionError):
        entanglement_witness_gap(vac)
