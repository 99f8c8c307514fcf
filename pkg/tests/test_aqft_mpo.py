import cmath
import itertools
import math

import numpy as np
import pytest

from qttdft.aqft_mpo import (
    aqft_entries,
    aqft_entry,
    aqft_error_bound,
    aqft_params,
    aqft_reference,
    assemble_aqft_mpo,
    build_aqft_core,
    build_aqft_left_core,
)
from qttdft.qft_mpo import (
    assemble_qft_mpo,
    contract_dense,
    dft_entry,
    dft_reference,
    entrywise_error,
    reference_error,
    to_matrix,
)


def aqft_oracle(n, b, sigma, tau):
    """Direct sum over all (k, l) with l >= max(1, k-b), no term dropping."""
    e = 0.0
    for k in range(1, n + 1):
        for l in range(max(1, k - b), n + 1):
            e += 2.0 ** (l - k) * sigma[k - 1] * tau[l - 1]
    return cmath.exp(-1j * math.pi * e)


def hadamard(n):
    H = np.array([[1, 1], [1, -1]])
    out = np.array([[1]])
    for _ in range(n):
        out = np.kron(out, H)
    return out


def test_params_validation():
    assert aqft_params(5, 2).u_nodes.tolist() == [0, 0.25, 0.5, 0.75]
    with pytest.raises(ValueError):
        aqft_params(4, 4)
    with pytest.raises(ValueError):
        aqft_params(4, -1)


@pytest.mark.parametrize("n", range(1, 7))
def test_aqft_entry_oracle_and_exact_level(n):
    for b in range(n):
        p = aqft_params(n, b)
        for sig in itertools.product((0, 1), repeat=n):
            for tau in itertools.product((0, 1), repeat=n):
                got = aqft_entry(p, sig, tau)
                assert got == pytest.approx(aqft_oracle(n, b, sig, tau), abs=1e-12)
                if b == n - 1:
                    assert got == pytest.approx(dft_entry(n, 2, sig, tau), abs=1e-14)


def test_aqft_b0_is_hadamard():
    p = aqft_params(2, 0)
    for sig in itertools.product((0, 1), repeat=2):
        for tau in itertools.product((0, 1), repeat=2):
            want = (-1) ** (sig[0] * tau[0] + sig[1] * tau[1])
            assert aqft_entry(p, sig, tau) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("b", [2, 4, 6])
def test_aqft_error_bound_n8(b):
    err = reference_error(8, 2, aqft_reference(aqft_params(8, b)), dft_reference(8))
    assert err.exhaustive
    assert err.max_error <= math.pi * 8 * 2.0**-b


def test_core_b0():
    A = build_aqft_core(0)
    assert A.shape == (1, 2, 2, 1)
    np.testing.assert_allclose(A[0, :, :, 0], [[1, 1], [1, -1]], atol=1e-15)


def test_core_b1_selector():
    A = build_aqft_core(1)
    # (sigma + u_beta)/2 = (1 + 1/2)/2 = 0.75 -> alpha = 1
    col = A[:, 1, 1, 1]
    assert np.count_nonzero(col) == 1 and col[1] != 0
    assert abs(col[1]) == pytest.approx(1.0)


@pytest.mark.parametrize("b", range(0, 5))
def test_core_sparsity_pattern(b):
    # alpha_1 = sigma and alpha_{k+1} = beta_k, i.e. alpha = (sigma << (b-1)) | (beta >> 1)
    A = build_aqft_core(b)
    r = 2**b
    for beta, sig, tau in itertools.product(range(r), (0, 1), (0, 1)):
        nz = np.flatnonzero(A[:, sig, tau, beta])
        assert nz.size == 1
        expected = (sig * 2 ** (b - 1) + (beta >> 1)) if b else 0
        assert nz[0] == expected


@pytest.mark.parametrize("b", range(0, 5))
def test_indicator_partition_gives_left_core(b):
    A = build_aqft_core(b)
    np.testing.assert_array_equal(A.sum(axis=0), build_aqft_left_core(b)[0])


def test_assemble_shapes():
    mpo = assemble_aqft_mpo(8, 3)
    assert mpo.cores[1].shape == (8, 2, 2, 8)
    assert mpo.bond_dims == [8] * 7
    with pytest.raises(ValueError):
        assemble_aqft_mpo(3, 3)


def test_n3_b0_is_hadamard():
    # indexed by site-order digit strings on both sides the operator is H x H x H;
    # in natural (s, t) order the columns are additionally bit-reversed
    site_order = contract_dense(assemble_aqft_mpo(3, 0)).reshape(8, 8)
    np.testing.assert_allclose(site_order, hadamard(3), atol=1e-15)
    rev = [int(f"{t:03b}"[::-1], 2) for t in range(8)]
    np.testing.assert_allclose(to_matrix(assemble_aqft_mpo(3, 0)), hadamard(3)[:, rev], atol=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
def test_mpo_exactly_equals_aqft(n):
    for b in range(min(n - 1, 4) + 1):
        err = entrywise_error(assemble_aqft_mpo(n, b), aqft_reference(aqft_params(n, b)))
        assert err.max_error <= 1e-13


def test_error_bound_values():
    assert aqft_error_bound(10, 8) == pytest.approx(0.1227, abs=1e-4)
    assert aqft_error_bound(4, 3) == pytest.approx(math.pi / 2)
    assert aqft_error_bound(6, 3) == pytest.approx(2 * aqft_error_bound(6, 4))


def test_worse_than_chebyshev_at_equal_bond():
    # bond dimension 4: AQFT b=2 vs Chebyshev K=3
    aq = entrywise_error(assemble_aqft_mpo(8, 2)).max_error
    ch = entrywise_error(assemble_qft_mpo(8, 3)).max_error
    assert aq <= aqft_error_bound(8, 2)
    assert aq > ch


def test_vectorised_matches_scalar(rng):
    p = aqft_params(7, 3)
    sig = rng.integers(0, 2, (50, 7))
    tau = rng.integers(0, 2, (50, 7))
    vec = aqft_entries(p, sig, tau)
    for i in range(50):
        assert vec[i] == pytest.approx(aqft_entry(p, sig[i], tau[i]), abs=1e-15)
