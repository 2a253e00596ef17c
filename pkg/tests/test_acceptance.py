"""End-to-end property checks over randomly generated kernels."""

import math

import numpy as np
import pytest

from src.domain.models import Configuration
from src.groups.models import GroupModel
from src.groups.pd_functions import (
    CharacterMix,
    Constant,
    Cosine,
    ExpDecay,
    Gaussian,
    Triangular,
    validate_pd_on_samples,
)
from src.kernels.catalog import SPACE_TIME_FORMS, SPATIAL_FORMS
from src.kernels.evaluator import gram_matrix, kernel_eval
from src.kernels.spec import (
    Monomial,
    Product,
    RawForm,
    RawSpatial,
    Scale,
    ScaledShift,
    SeparableSum,
    Sum,
    TensorProduct,
    Ultraspherical,
)
from src.schoenberg.extraction import extract, synthesize
from src.schoenberg.infinity import infty_limit_gap, monomial_coefficients, project_from_infty
from src.schoenberg.product_sphere import product_sphere_extract, product_sphere_synthesize
from src.schoenberg.recurrences import step_up
from src.special.functions import UltrasphericalBasis, harmonic_dim, sphere_surface
from src.special.quadrature import build_rule
from src.verify.pd_check import find_witness, gaussian_sample, sample_sphere

CYCLIC = GroupModel.cyclic(9)
RESIDUES = list(range(9))
REAL = GroupModel.real_line()


def _random_temporal(rng, group):
    family = int(rng.integers(6))
    if family == 0:
        return ExpDecay(group, float(rng.uniform(0.2, 2.0)))
    if family == 1:
        return Gaussian(group, float(rng.uniform(0.1, 1.0)))
    if family == 2:
        return Cosine(group, int(rng.integers(0, 9)))
    if family == 3:
        return Triangular(group, float(rng.uniform(1.0, 4.0)))
    if family == 4:
        return Constant(group, float(rng.uniform(0.1, 1.5)))
    weights = rng.uniform(0.1, 1.0, size=2)
    return CharacterMix(group, tuple((float(w), int(f)) for w, f in zip(weights, rng.integers(0, 9, size=2))))


def _random_spatial(rng):
    k = int(rng.integers(0, 6))
    choice = int(rng.integers(3))
    if choice == 0:
        return Monomial(k)
    if choice == 1:
        return ScaledShift()
    # c_k(7, .) is positive definite on S^d for every d <= 7.
    return Ultraspherical(7, k)


def _random_tensor(rng, group):
    return TensorProduct(_random_spatial(rng), _random_temporal(rng, group))


def _random_spec(rng, group=CYCLIC):
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        shape = int(rng.integers(3))
        if shape == 0:
            terms.append(_random_tensor(rng, group))
        elif shape == 1:
            terms.append(Scale(float(rng.uniform(0.1, 2.0)), _random_tensor(rng, group)))
        else:
            terms.append(Product((_random_tensor(rng, group), _random_tensor(rng, group))))
    return Sum(tuple(terms))


def _random_specs(count=25, seed=2024):
    rng = np.random.default_rng(seed)
    return [_random_spec(rng) for _ in range(count)]


def test_orthogonality_suite():
    for d in (1, 2, 3, 5):
        basis = UltrasphericalBasis(d, 20)
        rule = build_rule(d, 24)
        table = basis.table(rule.nodes)
        gram = (table * rule.weights) @ table.T
        for n in range(21):
            expected = sphere_surface(d) / (harmonic_dim(d, n) * sphere_surface(d - 1))
            assert gram[n, n] == pytest.approx(expected, rel=1e-10)
            off = np.delete(gram[n], n)
            assert np.max(np.abs(off)) <= 1e-10 * expected


@pytest.mark.slow
def test_round_trip_on_random_band_limited_specs():
    rng = np.random.default_rng(7)
    for index, spec in enumerate(_random_specs()):
        assert spec.degree() <= 10
        seq = extract(spec, 2, 10, RESIDUES)
        for _ in range(200):
            x = float(rng.uniform(-1.0, 1.0))
            u = int(rng.integers(9))
            got = synthesize(seq, x, u).value
            assert got == pytest.approx(kernel_eval(spec, x, u), abs=1e-8), index

        assert seq.tail_mass_at_identity == pytest.approx(kernel_eval(spec, 1.0, 0).real, abs=1e-8)
        for n, fn in enumerate(seq.coefficients):
            check = validate_pd_on_samples(fn, 12, seed=index * 100 + n)
            assert check.passed, (index, n, check.reason)


@pytest.mark.slow
def test_step_up_matches_direct_extraction_on_random_specs():
    for index, spec in enumerate(_random_specs()):
        for d in (1, 2, 3):
            stepped = step_up(extract(spec, d, 12, RESIDUES))
            direct = extract(spec, d + 2, 10, RESIDUES)
            for n in range(11):
                np.testing.assert_allclose(
                    stepped.values_on(n, RESIDUES),
                    direct.values_on(n, RESIDUES),
                    atol=1e-10,
                    err_msg=f"spec {index} d={d} n={n}",
                )


def test_chebyshev_two_is_falsified_on_the_sphere():
    spatial_only = TensorProduct(Ultraspherical(1, 2), Constant(GroupModel.trivial(), 1.0))
    report = find_witness(spatial_only, 2, trials=200, seed=0)
    assert report.verdict == "fail"
    assert report.min_eig < -1e-6

    g = Gaussian(REAL, 0.7)
    seq = extract(TensorProduct(Ultraspherical(1, 2), g), 1, 2, [0.0, 1.0])
    up = step_up(seq)
    assert up.value(0, 0.0).real == pytest.approx(-0.5, abs=1e-14)
    assert up.value(0, 1.0).real == pytest.approx(-0.5 * math.exp(-0.7), abs=1e-14)


def test_projection_from_hilbert_sphere():
    grid = [-1.0, 0.0, 0.5, 2.0]
    g = ExpDecay(REAL, 0.6)
    for n in range(9):
        spec = TensorProduct(Monomial(n), g)
        powers = monomial_coefficients(spec)
        for d in (1, 2, 3, 5):
            projected = project_from_infty(powers, d)
            extracted = extract(spec, d, n, grid)
            for k in range(n + 1):
                np.testing.assert_allclose(projected.values_on(k, grid), extracted.values_on(k, grid), atol=1e-10)

    cube = project_from_infty(monomial_coefficients(TensorProduct(Monomial(3), g)), 1)
    assert cube.value(1, 0.0).real == pytest.approx(0.75)
    assert cube.value(3, 0.0).real == pytest.approx(0.25)


def test_coefficients_converge_to_monomial_limit():
    g = Gaussian(REAL, 0.5)
    spec = TensorProduct(Monomial(2), g)
    u = 0.8
    gaps = [infty_limit_gap(spec, 2, u, d) for d in range(1, 26, 2)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.1 * g.value_at_identity().real


def test_product_sphere_examples_and_round_trip():
    xy = product_sphere_extract(SeparableSum(((1.0, Monomial(1), Monomial(1)),)), 2, 2, 3, 3)
    assert xy.matrix[1, 1] == pytest.approx(1.0, abs=1e-10)
    assert np.sum(np.abs(xy.matrix)) == pytest.approx(1.0, abs=1e-10)

    one = product_sphere_extract(SeparableSum(((1.0, Monomial(0), Monomial(0)),)), 3, 4, 2, 2)
    assert one.matrix[0, 0] == pytest.approx(1.0, abs=1e-10)
    assert np.sum(np.abs(one.matrix)) == pytest.approx(1.0, abs=1e-10)

    squares = product_sphere_extract(SeparableSum(((1.0, Monomial(2), Monomial(2)),)), 1, 1, 2, 2)
    np.testing.assert_allclose(squares.matrix, [[0.25, 0, 0.25], [0, 0, 0], [0.25, 0, 0.25]], atol=1e-10)

    rng = np.random.default_rng(3)
    f2 = SeparableSum(((0.4, Monomial(2), ScaledShift()), (0.6, Ultraspherical(3, 3), Monomial(1))))
    coeffs = product_sphere_extract(f2, 3, 2, 3, 2)
    for _ in range(50):
        x, y = rng.uniform(-1, 1, size=2)
        assert product_sphere_synthesize(coeffs, x, y) == pytest.approx(float(f2(np.array(x), np.array(y))), abs=1e-10)


def test_gaussian_sampling_reproduces_gram():
    spec = Sum((TensorProduct(ScaledShift(), Gaussian(REAL, 1.0)), TensorProduct(Monomial(0), Constant(REAL, 0.5))))
    vectors = sample_sphere(2, 5, 11)
    elements = (0.0, 0.5, -1.0, 2.0, 0.25)
    config = Configuration(d=2, vectors=vectors, elements=elements, group=REAL)
    gram = gram_matrix(spec, vectors, elements).real
    n_samples = 20_000
    draws = gaussian_sample(spec, config, n_samples, seed=1)
    empirical = draws.T @ draws / n_samples
    diag = np.diag(gram)
    stderr = np.sqrt((np.outer(diag, diag) + gram**2) / n_samples)
    assert np.all(np.abs(empirical - gram) <= 5 * stderr)


def _catalog_specs(group):
    spatial = [Monomial(3), ScaledShift(), Ultraspherical(2, 4)] + [RawSpatial(name) for name in SPATIAL_FORMS]
    if group.kind == "cyclic":
        temporal = [ExpDecay(group, 1.0), Gaussian(group, 0.5), Cosine(group, 2), Triangular(group, 2.0),
                    Constant(group, 0.7), CharacterMix(group, ((0.5, 1), (0.5, 4)))]
    else:
        temporal = [ExpDecay(group, 1.0), Gaussian(group, 0.5), Cosine(group, 1.5), Triangular(group, 2.0),
                    Constant(group, 0.7), CharacterMix(group, ((0.5, 1.0), (0.5, -2.5)))]
    specs = [TensorProduct(s, t) for s in spatial for t in temporal]
    if group.kind == "real":
        specs += [RawForm(name, group, {}) for name in SPACE_TIME_FORMS]
    return specs


@pytest.mark.parametrize("group", [REAL, CYCLIC], ids=lambda g: g.label)
def test_boundedness_and_hermitian_sweep(group):
    rng = np.random.default_rng(0)
    specs = _catalog_specs(group)
    per_spec = 10_000 // len(specs) + 1
    for spec in specs:
        x = rng.uniform(-1.0, 1.0, size=per_spec)
        elements = group.sample(rng, per_spec)
        u = group.as_array(elements)
        u_inv = group.as_array([group.inverse(v) for v in elements])
        values = np.asarray(spec.evaluate(x, u))
        mirrored = np.asarray(spec.evaluate(x, u_inv))
        peak = kernel_eval(spec, 1.0, group.identity()).real
        assert np.max(np.abs(values)) <= peak + 1e-10, spec.to_dict()
        np.testing.assert_allclose(mirrored, np.conj(values), atol=1e-12)

        xi = sample_sphere(2, 8, int(rng.integers(1_000)))
        gram = gram_matrix(spec, xi, group.sample(rng, 8))
        np.testing.assert_allclose(gram, gram.conj().T, atol=1e-12)
