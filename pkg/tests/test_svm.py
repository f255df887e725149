import numpy as np
import pytest

from pave_iri.classifiers.kernels import KernelKind, KernelSpec
from pave_iri.classifiers.svm import (
    SvmBinaryModel,
    SvmOvoModel,
    check_dual_feasibility,
    default_gamma,
    predict_svm,
    train_svm_binary,
    train_svm_ovo,
)
from pave_iri.errors import DegenerateTrainingError, DomainError

POLY1 = KernelSpec(KernelKind.POLYNOMIAL, degree=1)
XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([-1.0, -1.0, 1.0, 1.0])


def assert_feasible(m: SvmBinaryModel):
    m.check_feasibility()
    assert np.all(np.abs(m.dual_coefficients) <= m.C)
    assert abs(m.dual_coefficients.sum()) <= 1e-6


def test_two_point_symmetric_boundary():
    X = np.array([[-1.0], [1.0]])
    m = train_svm_binary(X, np.array([-1.0, 1.0]), POLY1, C=1e3)
    assert_feasible(m)
    assert len(m.support_vectors) == 2
    # boundary at x = 0
    assert abs(m.decision_function([[0.0]])[0]) < 1e-9
    assert m.decision_function([[0.5]])[0] > 0 > m.decision_function([[-0.5]])[0]


def test_xor_separable_with_rbf():
    m = train_svm_binary(XOR_X, XOR_Y, KernelSpec(KernelKind.RBF, gamma=1.0), C=10.0)
    assert_feasible(m)
    pred = np.where(m.decision_function(XOR_X) >= 0, 1.0, -1.0)
    assert np.array_equal(pred, XOR_Y)


def test_xor_through_ovo_prediction():
    classes = np.array([0, 0, 1, 1])
    ovo = train_svm_ovo(XOR_X, classes, KernelSpec(KernelKind.RBF, gamma=1.0), C=10.0)
    assert [predict_svm(ovo, x) for x in XOR_X] == [0, 0, 1, 1]


def test_single_class_is_degenerate():
    with pytest.raises(DegenerateTrainingError):
        train_svm_binary(XOR_X, np.ones(4), POLY1)
    with pytest.raises(DegenerateTrainingError):
        train_svm_ovo(XOR_X, np.zeros(4, dtype=int), POLY1)


def test_bad_labels_and_C():
    with pytest.raises(DomainError):
        train_svm_binary(XOR_X, np.array([0.0, 1.0, 0.0, 1.0]), POLY1)
    with pytest.raises(DomainError):
        train_svm_binary(XOR_X, XOR_Y, POLY1, C=0.0)


def test_pair_counts(rng):
    X = rng.normal(size=(60, 3))
    three = np.repeat([0, 1, 2], 20)
    m = train_svm_ovo(X, three, KernelSpec(KernelKind.RBF, 0.5))
    assert len(m.binaries) == 3
    for b in m.binaries:
        assert_feasible(b)
    fifteen = np.arange(60) % 15
    m15 = train_svm_ovo(X, fifteen, KernelSpec(KernelKind.RBF, 0.5), n_classes=15)
    assert len(m15.binaries) == 105
    two = np.where(np.arange(60) < 30, 2, 7)
    m2 = train_svm_ovo(X, two, KernelSpec(KernelKind.RBF, 0.5), n_classes=15)
    assert len(m2.binaries) == 1 and m2.binaries[0].label_pair == (2, 7)
    assert set(m2.predict(X).tolist()) <= {2, 7}


def test_deep_inside_region_predicts_that_class():
    X = np.array([[-3.0], [-2.0], [2.0], [3.0]])
    m = train_svm_ovo(X, np.array([0, 0, 1, 1]), POLY1, C=10.0)
    assert predict_svm(m, [-50.0]) == 0
    assert predict_svm(m, [50.0]) == 1


def _constant_binary(pair, value):
    return SvmBinaryModel(np.zeros((1, 1)), np.array([0.0]), value, POLY1, pair, 1.0)


def test_cyclic_tie_goes_to_lowest_class():
    # 0 beats 1, 1 beats 2, 2 beats 0: one vote each
    binaries = (_constant_binary((0, 1), 1.0), _constant_binary((0, 2), -1.0), _constant_binary((1, 2), 1.0))
    m = SvmOvoModel(binaries, 3, (0, 1, 2))
    assert m.votes([[0.0]]).tolist() == [[1, 1, 1]]
    assert predict_svm(m, [0.0]) == 0


def test_prediction_dimension_mismatch():
    m = train_svm_ovo(XOR_X, np.array([0, 0, 1, 1]), KernelSpec(KernelKind.RBF, 1.0))
    with pytest.raises(DomainError):
        m.predict(np.zeros((1, 3)))


def test_feasibility_checker_catches_violations():
    with pytest.raises(AssertionError):
        check_dual_feasibility(np.array([0.5, 0.2]), np.array([1.0, -1.0]), 1.0)
    with pytest.raises(AssertionError):
        check_dual_feasibility(np.array([1.5, 1.5]), np.array([1.0, -1.0]), 1.0)


def test_default_gamma():
    X = np.array([[0.0, 0.0], [2.0, 4.0]])
    # variances 1 and 4, mean 2.5, p = 2
    assert default_gamma(X) == 1.0 / 5.0
    assert default_gamma(np.ones((3, 2))) == 1.0


def test_training_is_deterministic(rng):
    X = rng.normal(size=(50, 4))
    c = (X[:, 0] > 0).astype(int) + (X[:, 1] > 0).astype(int)
    a = train_svm_ovo(X, c, KernelSpec(KernelKind.POLYNOMIAL, degree=3), C=1.0)
    b = train_svm_ovo(X, c, KernelSpec(KernelKind.POLYNOMIAL, degree=3), C=1.0)
    for p, q in zip(a.binaries, b.binaries):
        assert np.array_equal(p.dual_coefficients, q.dual_coefficients) and p.bias == q.bias
