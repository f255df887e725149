import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pave_iri.classifiers.kernels import KernelKind, KernelSpec, gram, gram_symmetric, kernel_eval
from pave_iri.errors import DomainError

RBF = KernelSpec(KernelKind.RBF, gamma=0.5)
POLY1 = KernelSpec(KernelKind.POLYNOMIAL, degree=1)


def test_rbf_identical_points():
    assert kernel_eval([1.0, -2.0, 3.0], [1.0, -2.0, 3.0], KernelSpec(KernelKind.RBF, gamma=7.3)) == 1.0


def test_poly_degree_one_orthogonal():
    assert kernel_eval([1.0, 0.0], [0.0, 1.0], POLY1) == 1.0


def test_rbf_hand_value():
    assert kernel_eval([1.0, 0.0], [0.0, 1.0], RBF) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert kernel_eval([1.0, 0.0], [0.0, 1.0], RBF) == pytest.approx(0.367879, abs=5e-7)


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        kernel_eval([1.0], [1.0, 2.0], RBF)
    with pytest.raises(DomainError):
        gram(np.zeros((2, 3)), np.zeros((2, 2)), RBF)


def test_spec_validation():
    with pytest.raises(DomainError):
        KernelSpec(KernelKind.RBF, gamma=0.0)
    with pytest.raises(DomainError):
        KernelSpec(KernelKind.POLYNOMIAL, degree=0)
    s = KernelSpec("poly", 0.3, 4)
    assert KernelSpec.from_dict(s.to_dict()) == s


vec = arrays(np.float64, 4, elements=st.floats(-10, 10, allow_nan=False))
specs = st.one_of(
    st.builds(KernelSpec, st.just(KernelKind.RBF), st.floats(1e-3, 10)),
    st.builds(KernelSpec, st.just(KernelKind.POLYNOMIAL), st.just(1.0), st.integers(1, 5)),
)


@given(vec, vec, specs)
def test_symmetry(x, z, spec):
    assert kernel_eval(x, z, spec) == kernel_eval(z, x, spec)


@given(vec, vec, st.floats(1e-3, 10))
def test_rbf_range(x, z, g):
    k = kernel_eval(x, z, KernelSpec(KernelKind.RBF, g))
    assert 0.0 <= k <= 1.0
    if np.array_equal(x, z):
        assert k == 1.0
    elif g * float(np.sum((x - z) ** 2)) > 1e-12:
        assert k < 1.0


@given(arrays(np.float64, (5, 3), elements=st.floats(-3, 3, allow_nan=False)), specs)
def test_gram_matches_pointwise_and_is_symmetric(A, spec):
    K = gram_symmetric(A, spec)
    assert np.array_equal(K, K.T)
    for i in range(5):
        for j in range(5):
            assert K[i, j] == pytest.approx(kernel_eval(A[i], A[j], spec), rel=1e-12, abs=1e-12)
