import math

import numpy as np
import pytest

from src.domain.errors import DomainError, GroupMismatchError
from src.groups.models import GroupModel, group_ops
from src.groups.pd_functions import (
    CharacterMix,
    Constant,
    Cosine,
    ExpDecay,
    Gaussian,
    PDFunctionSpec,
    Triangular,
    pd_eval,
    validate_pd_on_samples,
)
from src.schoenberg.sequence import NumericProfile

MODELS = [
    GroupModel.real_line(),
    GroupModel.integers(),
    GroupModel.cyclic(7),
    GroupModel.real_vector(2),
]


def _builtins(group: GroupModel) -> list[PDFunctionSpec]:
    if group.kind == "real_vector":
        omega: object = (1.0, -0.5)
        mix = ((0.5, (1.0, 0.0)), (0.25, (0.0, 2.0)))
    elif group.kind == "cyclic":
        omega = 2
        mix = ((0.5, 1), (0.5, 3))
    else:
        omega = 0.75
        mix = ((0.5, 1.0), (0.5, -1.0))
    return [
        ExpDecay(group, 1.0),
        Gaussian(group, 0.5),
        Cosine(group, omega),
        Triangular(group, 2.5),
        Constant(group, 0.7),
        CharacterMix(group, mix),
    ]


def test_group_ops_examples():
    real = group_ops(GroupModel.real_line())
    assert real.displacement(2.5, 1.0) == -1.5
    cyc = group_ops(GroupModel.cyclic(7))
    assert cyc.displacement(5, 2) == 4
    vec = group_ops(GroupModel.real_vector(2))
    assert vec.inverse((1, -2)) == (-1.0, 2.0)


@pytest.mark.parametrize("model", MODELS, ids=lambda g: g.label)
def test_group_axioms(model):
    rng = np.random.default_rng(3)
    for u in model.sample(rng, 10):
        e = model.identity()
        assert model.compose(e, u) == model.coerce(u)
        assert model.key(model.compose(u, model.inverse(u))) == model.key(e)
        assert model.is_identity(model.displacement(u, u))


def test_cyclic_arithmetic_wraps():
    g = GroupModel.cyclic(5)
    assert g.compose(3, 4) == 2
    assert g.inverse(0) == 0
    assert g.inverse(2) == 3


def test_coerce_rejects_foreign_elements():
    with pytest.raises(GroupMismatchError):
        GroupModel.cyclic(4).coerce(4)
    with pytest.raises(GroupMismatchError):
        GroupModel.integers().coerce(1.5)
    with pytest.raises(GroupMismatchError):
        GroupModel.real_vector(2).coerce((1.0, 2.0, 3.0))
    with pytest.raises(GroupMismatchError):
        GroupModel.real_line().coerce((1.0,))
    with pytest.raises(GroupMismatchError):
        GroupModel.real_line().coerce(True)


def test_group_model_validates_parameters():
    with pytest.raises(GroupMismatchError):
        GroupModel.cyclic(0)
    with pytest.raises(GroupMismatchError):
        GroupModel("torus")


def test_displacement_matrix_is_u_inverse_v():
    g = GroupModel.cyclic(7)
    elements = [1, 5, 6]
    mat = g.displacement_matrix(elements)
    for k, u in enumerate(elements):
        for l, v in enumerate(elements):
            assert mat[k, l] == g.displacement(u, v)

    vec = GroupModel.real_vector(2)
    mat = vec.displacement_matrix([(0.0, 1.0), (2.0, -1.0)])
    assert mat.shape == (2, 2, 2)
    np.testing.assert_allclose(mat[0, 1], [2.0, -2.0])


def test_sampling_distributions_follow_the_model():
    rng = np.random.default_rng(0)
    ints = GroupModel.integers().sample(rng, 500)
    assert all(-50 <= v <= 50 for v in ints)
    residues = GroupModel.cyclic(4).sample(rng, 200)
    assert set(residues) == {0, 1, 2, 3}
    vectors = GroupModel.real_vector(3).sample(rng, 5)
    assert all(len(v) == 3 for v in vectors)


def test_json_round_trip_of_group_descriptor():
    g = GroupModel.real_vector(3)
    assert g.to_dict() == {"kind": "real_vector", "k": 3}
    assert g.from_json([1, 2, 3]) == (1.0, 2.0, 3.0)
    assert g.to_json((1.0, 2.0, 3.0)) == [1.0, 2.0, 3.0]


def test_pd_eval_examples():
    real = GroupModel.real_line()
    assert pd_eval(ExpDecay(real, 1.0), 0.0) == pytest.approx(1.0)
    assert pd_eval(Gaussian(real, 0.5), 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    mix = CharacterMix(real, ((0.5, 1.0), (0.5, -1.0)))
    assert pd_eval(mix, math.pi) == pytest.approx(-1.0, abs=1e-14)


def test_pd_eval_rejects_element_of_other_model():
    with pytest.raises(GroupMismatchError):
        pd_eval(Gaussian(GroupModel.real_line(), 1.0), (0.0, 1.0))


def test_triangular_and_cosine_values():
    real = GroupModel.real_line()
    tri = Triangular(real, 2.0)
    assert pd_eval(tri, 1.0) == pytest.approx(0.5)
    assert pd_eval(tri, -3.0) == 0.0
    assert pd_eval(Cosine(real, 3.0), 0.5) == pytest.approx(math.cos(1.5))


def test_cyclic_forms_are_normalised_and_periodic():
    g = GroupModel.cyclic(6)
    for phi in (ExpDecay(g, 0.8), Gaussian(g, 0.3), Triangular(g, 2.0)):
        assert pd_eval(phi, 0) == pytest.approx(1.0, rel=1e-14)
        assert pd_eval(phi, 1) == pytest.approx(pd_eval(phi, 5), rel=1e-14)


def test_cyclic_character_uses_integer_frequency():
    g = GroupModel.cyclic(4)
    assert pd_eval(Cosine(g, 1), 1) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(GroupMismatchError):
        Cosine(g, 0.5)


def test_parameter_validation():
    real = GroupModel.real_line()
    with pytest.raises(DomainError, match="a > 0"):
        ExpDecay(real, 0.0)
    with pytest.raises(DomainError, match="a > 0"):
        Gaussian(real, -1.0)
    with pytest.raises(DomainError, match="c > 0"):
        Triangular(real, 0.0)
    with pytest.raises(DomainError, match="r >= 0"):
        Constant(real, -0.1)
    with pytest.raises(DomainError, match="weights"):
        CharacterMix(real, ((-1.0, 1.0),))
    with pytest.raises(GroupMismatchError):
        Cosine(GroupModel.real_vector(2), 1.0)


@pytest.mark.parametrize("model", MODELS, ids=lambda g: g.label)
def test_builtins_hermitian_and_bounded(model):
    rng = np.random.default_rng(11)
    elements = model.sample(rng, 15)
    for phi in _builtins(model):
        at_e = phi.value_at_identity()
        assert abs(at_e.imag) < 1e-14 and at_e.real >= 0
        for u in elements:
            value = pd_eval(phi, u)
            assert pd_eval(phi, model.inverse(u)) == pytest.approx(value.conjugate(), abs=1e-13)
            assert abs(value) <= at_e.real + 1e-12


def test_validate_pd_examples():
    real = GroupModel.real_line()
    assert validate_pd_on_samples(Gaussian(real, 1.0), 20, seed=4).verdict == "pass"
    assert validate_pd_on_samples(Cosine(real, 3.0), 20, seed=4).verdict == "pass"


def test_validate_pd_single_point():
    check = validate_pd_on_samples(ExpDecay(GroupModel.integers(), 0.3), 1, seed=0)
    assert check.passed
    assert check.min_eig == pytest.approx(1.0)


class _Identity(PDFunctionSpec):
    # phi(u) = u, unbounded and not positive definite.
    @property
    def form(self) -> str:
        return "identity_map"

    def values(self, u):
        return np.asarray(u, dtype=float).astype(complex)


def test_validate_pd_fails_boundedness_precheck():
    check = validate_pd_on_samples(_Identity(GroupModel.real_line()), 10, seed=2)
    assert check.verdict == "fail"
    assert "boundedness" in check.reason


def test_validate_pd_rejects_empty_draw():
    with pytest.raises(DomainError):
        validate_pd_on_samples(Gaussian(GroupModel.real_line(), 1.0), 0, seed=0)


def test_validate_pd_on_profile_draws_from_its_grid():
    g = GroupModel.cyclic(5)
    phi = Gaussian(g, 0.4)
    profile = NumericProfile(group=g, grid=tuple(range(5)), samples=phi.values(np.arange(5)))
    check = validate_pd_on_samples(profile, 12, seed=1)
    assert check.passed


def test_products_and_mixtures_remain_positive_definite():
    real = GroupModel.real_line()
    a, b = Gaussian(real, 0.7), Cosine(real, 2.0)
    rng = np.random.default_rng(5)
    u = np.asarray(real.sample(rng, 30))
    disp = real.displacement_matrix(list(u))
    for matrix in (a.values(disp) * b.values(disp), 0.3 * a.values(disp) + 0.7 * b.values(disp)):
        eigs = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
        assert eigs[0] >= -1e-8 * max(1.0, eigs[-1])


@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS, ids=lambda g: g.label)
def test_builtins_pass_across_seeds(model):
    for phi in _builtins(model):
        for seed in range(100):
            check = validate_pd_on_samples(phi, 30, seed=seed)
            assert check.passed, (phi, seed, check.reason)
