import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmt_smin import certify as C, graph as G, linalg, profile as P
from rmt_smin.sampler import sample

from instances import admissible_violation, corollary_instance, decomposition_instance, gershgorin_instance


@given(st.integers(0, 10**6), st.booleans())
def test_gershgorin_sound(seed, permute):
    T, part, eps, R = gershgorin_instance(np.random.default_rng(seed), permute)
    cert = C.gershgorin_certificate(T, part, eps, R)
    assert cert.precondition_ok, cert.reason
    assert cert.lower_bound == pytest.approx(eps * part.k)
    assert cert.lower_bound <= linalg.smin(T) + 1e-8


@given(st.integers(0, 10**6))
def test_corollary_sound(seed):
    X, part, z, eps, R = corollary_instance(np.random.default_rng(seed))
    cert = C.corollary_certificate(X, part, z, eps, R)
    assert cert.precondition_ok, cert.reason
    assert cert.lower_bound <= linalg.smin(X - z * np.eye(part.m)) + 1e-8


@given(st.integers(0, 10**6))
def test_violations_refused(seed):
    T, part, eps, R = admissible_violation(np.random.default_rng(seed))
    cert = C.gershgorin_certificate(T, part, eps, R)
    assert not cert.precondition_ok and cert.lower_bound == 0.0 and cert.reason


def test_gershgorin_identity_trivial_partition():
    cert = C.gershgorin_certificate(np.eye(3), C.BlockPartition.trivial(3), 0.1, 1.0)
    assert cert.precondition_ok and cert.lower_bound == pytest.approx(0.1)


def test_refusal_reports_block():
    T = np.eye(2)
    T[1, 0] = 0.5
    cert = C.gershgorin_certificate(T, C.BlockPartition.from_sizes([1, 1]), 0.01, 1.0)
    assert cert.failed_block == (1, 0)
    d = cert.to_dict()
    assert d["preconditionOk"] is False and d["failedBlock"] == [1, 0]


def test_parameter_guards():
    part = C.BlockPartition.trivial(2)
    assert not C.gershgorin_certificate(np.eye(2), part, 0.1, 0.5).precondition_ok
    assert not C.gershgorin_certificate(np.eye(2), part, 0.0, 1.0).precondition_ok
    assert not C.corollary_certificate(np.zeros((2, 2)), part, 0, 0.01, 1.0).precondition_ok
    with pytest.raises(ValueError):
        C.gershgorin_certificate(np.eye(3), part, 0.1, 1.0)


def test_partition_validation():
    with pytest.raises(ValueError):
        C.BlockPartition((2, 0), (0, 1))
    with pytest.raises(ValueError):
        C.BlockPartition((2,), (0, 0))
    p = C.BlockPartition((1, 2), (2, 0, 1))
    assert p.block_members(1) == (0, 1)
    assert p.permute(np.arange(9).reshape(3, 3))[0, 0] == 8


@pytest.mark.parametrize("kappa", [0.2, 0.5])
@pytest.mark.parametrize("seed", range(10))
def test_decomposition_properties(kappa, seed):
    rng = np.random.default_rng(seed)
    n = 200
    B, za = decomposition_instance(rng, n, kappa)
    dec = C.block_decompose(B, n, kappa, za, full=True)
    sets = dec.pruning_sets
    assert sets[0] == tuple(range(B.shape[0])) and sets[-1] == ()
    for prev, cur in zip(sets, sets[1:]):
        assert set(cur) <= set(prev)
        assert len(cur) <= len(prev) * n ** (-kappa) + 1e-9
    chk = C.check_decomposition(B, dec.partition, n, kappa, za)
    assert chk["k_bound"] and chk["lower_left_rows"]


def test_decomposition_order_and_refusal():
    # cap on column sums 0.25, heavy-row cut 0.5: only row 1 is heavy, and not within {1}
    n, kappa, za = 4, 0.5, 1.0
    B = np.zeros((3, 3))
    B[1, :] = 0.25
    B[0, 2] = 0.0
    dec = C.block_decompose(B, n, kappa, za, full=True)
    assert dec.pruning_sets == [(0, 1, 2), (1,), ()]
    assert dec.partition.permutation == (1, 0, 2)
    assert dec.partition.sizes == (1, 2)
    with pytest.raises(ValueError):
        C.block_decompose(np.ones((3, 3)), n, kappa, za)


def test_terminal_zero_profile_entry_gives_abs_z():
    V = np.zeros((3, 3))
    V[0, 1] = 1.0
    s = sample(P.VarianceProfile(V), z=2.0, seed=0)
    cert = C.certify_terminal(s, (2,), 0.5)
    assert cert.lower_bound == 2.0 and cert.precondition_ok


@pytest.mark.parametrize("seed", range(8))
def test_terminal_certificates_sound(seed):
    prof = P.periodic_band(12, 1)
    z = 3.0 * np.exp(1j * seed)
    s = sample(prof, "complex_gaussian_split", z, seed=seed)
    g = G.build_graph(prof, G.GraphParams.from_shift(12, z, 0.3))
    for J in g.non_empty_terminals[:15]:
        cert = C.certify_terminal(s, J, 0.3)
        assert cert.lower_bound <= linalg.smin(s.principal(J)) + 1e-8


def test_terminal_rejects_non_terminal():
    s = sample(P.full(4), z=1.0)
    with pytest.raises(ValueError):
        C.certify_terminal(s, (0, 1, 2, 3), 0.5)
