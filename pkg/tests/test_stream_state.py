import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_spearman.errors import ContractError, InputError, NonFiniteObservation
from hermite_spearman.hermite_basis import eval_hermite_vector
from hermite_spearman.stream_state import (
    CoefficientState,
    Standardizer,
    ew_coefficient_path,
    merge_stationary,
    standardize_update,
    update_ew,
    update_stationary,
)

finite = st.floats(-6, 6, allow_nan=False)


def batch_coefficients(x, y, N):
    hx = np.array([eval_hermite_vector(v, N) for v in x])
    hy = np.array([eval_hermite_vector(v, N) for v in y])
    return hx.mean(0), hy.mean(0), hx.T @ hy / len(x)


def assert_state_close(s, a1, a2, A, atol=1e-12):
    np.testing.assert_allclose(s.a1, a1, rtol=0, atol=atol)
    np.testing.assert_allclose(s.a2, a2, rtol=0, atol=atol)
    np.testing.assert_allclose(s.A, A, rtol=0, atol=atol)


def test_first_observation_initializes():
    s = update_stationary(CoefficientState(1), 0.0, 0.0)
    np.testing.assert_array_equal(s.a1, [math.pi ** -0.25, 0.0])
    np.testing.assert_array_equal(s.A, np.outer(s.a1, s.a1))
    assert s.count == 1


def test_two_term_mean():
    s = CoefficientState(6).update(0.3, -1.0).update(1.7, 0.2)
    np.testing.assert_allclose(s.a1, (eval_hermite_vector(0.3, 6) + eval_hermite_vector(1.7, 6)) / 2, atol=1e-15)


def test_stationary_matches_batch_and_is_order_invariant():
    rng = np.random.default_rng(11)
    x, y = rng.standard_normal((2, 100))
    ref = batch_coefficients(x, y, 8)
    s = CoefficientState(8)
    for a, b in zip(x, y):
        s.update(a, b)
    assert_state_close(s, *ref)
    perm = rng.permutation(100)
    p = CoefficientState(8)
    for a, b in zip(x[perm], y[perm]):
        p.update(a, b)
    assert_state_close(p, s.a1, s.a2, s.A)
    assert s.count == p.count == 100


def test_stationary_long_stream_matches_batch():
    rng = np.random.default_rng(12)
    x, y = rng.standard_normal((2, 10_000))
    s = CoefficientState(6)
    for a, b in zip(x.tolist(), y.tolist()):
        s.update(a, b)
    hx, hy = eval_hermite_vector(x, 6), eval_hermite_vector(y, 6)
    assert_state_close(s, hx.mean(0), hy.mean(0), hx.T @ hy / x.size)


def test_update_batch_equals_sequential():
    rng = np.random.default_rng(13)
    x, y = rng.standard_normal((2, 500))
    seq = CoefficientState(10)
    for a, b in zip(x, y):
        seq.update(a, b)
    blk = CoefficientState(10).update_batch(x[:123], y[:123]).update_batch(x[123:], y[123:])
    assert_state_close(blk, seq.a1, seq.a2, seq.A)
    assert blk.count == seq.count


def test_ew_lambda_one_forgets_history():
    s = CoefficientState(5, 1.0).update(0.1, 0.2).update(-2.0, 1.0).update(0.7, -0.4)
    fresh = CoefficientState(5, 1.0).update(0.7, -0.4)
    assert_state_close(s, fresh.a1, fresh.a2, fresh.A, atol=0)


def test_ew_two_observations_half():
    s = update_ew(update_ew(CoefficientState(4, 0.5), 0.3, 0.1), -0.8, 1.2)
    np.testing.assert_allclose(s.a1, 0.5 * eval_hermite_vector(0.3, 4) + 0.5 * eval_hermite_vector(-0.8, 4), atol=1e-15)


def _geometric_oracle(x, y, lam, N):
    n = len(x)
    w = np.array([lam * (1 - lam) ** (n - 1 - i) for i in range(n)])
    w[0] = (1 - lam) ** (n - 1)
    hx = np.array([eval_hermite_vector(v, N) for v in x])
    hy = np.array([eval_hermite_vector(v, N) for v in y])
    A = sum(w[i] * np.outer(hx[i], hy[i]) for i in range(n))
    return w @ hx, w @ hy, A


def test_ew_ten_observations_geometric_weights():
    rng = np.random.default_rng(14)
    x, y = rng.standard_normal((2, 10))
    s = CoefficientState(7, 0.1)
    for a, b in zip(x, y):
        s.update(a, b)
    assert_state_close(s, *_geometric_oracle(x, y, 0.1, 7))


def test_ew_thousand_observations_geometric_weights():
    rng = np.random.default_rng(15)
    x, y = rng.standard_normal((2, 1000))
    s = CoefficientState(5, 0.02)
    for a, b in zip(x, y):
        s.update(a, b)
    assert_state_close(s, *_geometric_oracle(x, y, 0.02, 5))
    blk = CoefficientState(5, 0.02).update_batch(x[:400], y[:400]).update_batch(x[400:], y[400:])
    assert_state_close(blk, s.a1, s.a2, s.A)


def test_ew_path_rows_equal_sequential_states():
    rng = np.random.default_rng(16)
    x, y = rng.standard_normal((2, 300))
    a1, a2, A = ew_coefficient_path(x, y, 6, 0.05)
    s = CoefficientState(6, 0.05)
    for i, (a, b) in enumerate(zip(x, y)):
        s.update(a, b)
        if i in (0, 1, 57, 299):
            assert_state_close(s, a1[i], a2[i], A[i])


def test_mode_contracts():
    with pytest.raises(ContractError):
        update_ew(CoefficientState(3), 0.0, 0.0)
    with pytest.raises(ContractError):
        update_stationary(CoefficientState(3, 0.1), 0.0, 0.0)
    for lam in (0.0, -0.1, 1.5):
        with pytest.raises(ContractError):
            CoefficientState(3, lam)


@pytest.mark.parametrize("bad", [(math.nan, 0.0), (0.0, math.inf), (-math.inf, math.nan)])
def test_non_finite_rejected_and_state_unchanged(bad):
    s = CoefficientState(4).update(0.5, 0.5)
    before = s.copy()
    with pytest.raises(NonFiniteObservation) as info:
        s.update(*bad)
    assert info.value.rejected == 1
    assert s.rejected == 1 and s.count == 1
    assert s.A.tobytes() == before.A.tobytes()
    with pytest.raises(NonFiniteObservation) as info:
        s.update(*bad)
    assert info.value.rejected == 2


def test_batch_skips_non_finite():
    s = CoefficientState(4).update_batch([0.1, np.nan, 0.3], [0.2, 0.0, np.inf])
    ref = CoefficientState(4).update(0.1, 0.2)
    assert s.count == 1 and s.rejected == 2
    assert_state_close(s, ref.a1, ref.a2, ref.A, atol=0)


def test_merge_two_singletons_equals_sequential_exactly():
    s1 = CoefficientState(5).update(0.2, -0.3)
    s2 = CoefficientState(5).update(1.1, 0.4)
    seq = CoefficientState(5).update(0.2, -0.3).update(1.1, 0.4)
    m = merge_stationary(s1, s2)
    assert m.count == 2
    assert_state_close(m, seq.a1, seq.a2, seq.A, atol=0)


def test_merge_halves_equals_full_pass():
    rng = np.random.default_rng(17)
    x, y = rng.standard_normal((2, 1000))
    full = CoefficientState(12).update_batch(x, y)
    m = merge_stationary(CoefficientState(12).update_batch(x[:500], y[:500]),
                         CoefficientState(12).update_batch(x[500:], y[500:]))
    assert m.count == 1000
    assert_state_close(m, full.a1, full.a2, full.A)


def test_merge_contracts():
    s = CoefficientState(3).update(0.0, 0.0)
    with pytest.raises(ContractError):
        merge_stationary(s, CoefficientState(3))
    with pytest.raises(ContractError):
        merge_stationary(s, CoefficientState(4).update(0.0, 0.0))
    with pytest.raises(ContractError):
        merge_stationary(s, CoefficientState(3, 0.1).update(0.0, 0.0))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30), st.data())
def test_merge_associative_commutative(pairs, data):
    cut1 = data.draw(st.integers(1, len(pairs) - 2))
    cut2 = data.draw(st.integers(cut1 + 1, len(pairs) - 1))
    parts = [pairs[:cut1], pairs[cut1:cut2], pairs[cut2:]]
    a, b, c = (CoefficientState(6).update_batch(*np.array(p).T) for p in parts)
    left = merge_stationary(merge_stationary(a, b), c)
    right = merge_stationary(a, merge_stationary(b, c))
    swapped = merge_stationary(c, merge_stationary(b, a))
    for other in (right, swapped):
        assert_state_close(left, other.a1, other.a2, other.A)
        assert left.count == other.count == len(pairs)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=40),
       st.one_of(st.none(), st.floats(0.001, 1.0)))
def test_coefficient_bounds(pairs, lam):
    s = CoefficientState(10, lam)
    for x, y in pairs:
        s.update(x, y)
    bound = math.pi ** -0.25 + 1e-12
    assert np.all(np.abs(s.a1) <= bound) and np.all(np.abs(s.a2) <= bound)
    assert np.all(np.abs(s.A) <= bound ** 2)
    assert np.all(np.isfinite(s.A))
    if lam is None:
        assert s.count == len(pairs)


def test_memory_depends_only_on_order():
    rng = np.random.default_rng(18)
    small = CoefficientState(20).update_batch(*rng.standard_normal((2, 10)))
    big = CoefficientState(20).update_batch(*rng.standard_normal((2, 10_000)))
    for _ in range(100):
        big.update(*rng.standard_normal(2))
    assert small.nbytes == big.nbytes == (21 + 21 + 21 * 21) * 8
    assert CoefficientState(10).nbytes < small.nbytes


@pytest.mark.parametrize("lam", [None, 0.05])
def test_snapshot_round_trip_bit_exact(lam):
    rng = np.random.default_rng(19)
    s = CoefficientState(9, lam).update_batch(*rng.standard_normal((2, 250)))
    text = s.to_json()
    back = CoefficientState.from_json(text)
    assert back.to_json() == text
    for name in ("a1", "a2", "A"):
        assert getattr(back, name).tobytes() == getattr(s, name).tobytes()
    assert back.lam == s.lam
    if lam is None:
        assert back.count == 250
    # restored state keeps evolving identically
    s.update(0.3, 0.4)
    back.update(0.3, 0.4)
    assert back.A.tobytes() == s.A.tobytes()


def test_standardizer_first_value_passes_through():
    std = Standardizer()
    std, out = standardize_update(std, 7.0)
    assert out == 7.0 and std.mean == 7.0


def test_standardizer_matches_batch_statistics():
    std = Standardizer()
    outs = [std.update(v) for v in [1, 2, 3, 4, 5]]
    assert std.mean == pytest.approx(3.0, abs=1e-12)
    assert std.std == pytest.approx(math.sqrt(2.5), abs=1e-12)
    assert std.std == pytest.approx(np.std([1, 2, 3, 4, 5], ddof=1), abs=1e-12)
    # third value uses mean/sd of (1, 2)
    assert outs[2] == pytest.approx((3 - 1.5) / np.std([1, 2], ddof=1), abs=1e-12)
    assert outs[:2] == [1.0, 2.0]


def test_standardizer_constant_stream_passes_through():
    std = Standardizer()
    assert [std.update(4.0) for _ in range(3)] == [4.0, 4.0, 4.0]
    assert std.variance == 0.0


def test_standardizer_rejects_non_finite():
    with pytest.raises(InputError):
        Standardizer().update(math.nan)


@pytest.mark.parametrize("split", [0, 1, 2, 137])
def test_standardizer_block_matches_sequential(split):
    rng = np.random.default_rng(20)
    v = 3.0 + 2.0 * rng.standard_normal(2000)
    seq = Standardizer()
    expected = np.array([seq.update(a) for a in v])
    blk = Standardizer()
    got = np.concatenate([blk.transform(v[:split]), blk.transform(v[split:])])
    np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-10)
    assert blk.count == seq.count
    assert blk.mean == pytest.approx(seq.mean, abs=1e-12)
    assert blk.m2 == pytest.approx(seq.m2, rel=1e-10)


def test_standardizer_block_constant_stream():
    out = Standardizer().transform([4.0, 4.0, 4.0, 4.0])
    np.testing.assert_array_equal(out, [4.0, 4.0, 4.0, 4.0])
