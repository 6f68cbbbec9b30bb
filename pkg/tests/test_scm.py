"""Model generator and sampler tests."""

import io
import json

import numpy as np
import pytest

from robustlingam.exceptions import ParseError
from robustlingam.scm import (
    DataMatrix,
    ExponentialCentered,
    LognormalCentered,
    ParetoCentered,
    ScmSpec,
    StudentT,
    generate_random_scm,
    inject_outlier,
    noise_from_string,
    order_respects_weights,
    sample,
    validate_ordering,
)

# Monte Carlo centering bounds: |mean| <= 4 * sd / sqrt(draws) for the
# families with finite variance: t(5) var 5/3, lognormal(0,1) var
# (e-1)e, pareto(2.5,1) var 20/9, exponential(2) var 1/4.
N_MC = 1_000_000


@pytest.mark.parametrize(
    "dist,sd",
    [
        (StudentT(5.0), np.sqrt(5.0 / 3.0)),
        (LognormalCentered(0.0, 1.0), np.sqrt((np.e - 1.0) * np.e)),
        (ParetoCentered(2.5, 1.0), np.sqrt(2.5 / (1.5**2 * 0.5))),
        (ExponentialCentered(2.0), 0.5),
    ],
)
def test_noise_families_are_centered(dist, sd):
    rng = np.random.default_rng(101)
    draws = dist.sample(rng, N_MC)
    assert abs(draws.mean()) <= 4.0 * sd / np.sqrt(N_MC)


def test_cauchy_noise_is_sign_balanced():
    # df = 1 has no mean; centering is by symmetry, so check the median
    rng = np.random.default_rng(102)
    draws = StudentT(1.0).sample(rng, N_MC)
    assert abs(np.mean(draws > 0) - 0.5) <= 4.0 * 0.5 / np.sqrt(N_MC)


def test_noise_parameter_validation():
    with pytest.raises(ValueError):
        StudentT(0.0)
    with pytest.raises(ValueError):
        LognormalCentered(0.0, -1.0)
    with pytest.raises(ValueError):
        ParetoCentered(1.0, 1.0)  # mean undefined at shape <= 1
    with pytest.raises(ValueError):
        ExponentialCentered(0.0)


def test_noise_from_string():
    assert noise_from_string("t:3") == StudentT(3.0)
    assert noise_from_string("lognormal:0:1") == LognormalCentered(0.0, 1.0)
    assert noise_from_string("pareto:1.5:2") == ParetoCentered(1.5, 2.0)
    assert noise_from_string("exp:1") == ExponentialCentered(1.0)
    with pytest.raises(ParseError):
        noise_from_string("gauss:0:1")
    with pytest.raises(ParseError):
        noise_from_string("t:abc")


def test_generate_random_scm_structure():
    rng = np.random.default_rng(7)
    for q, p in [(0.5, 6), (1.0, 5), (0.0, 4)]:
        spec = generate_random_scm(p, q, StudentT(3.0), rng)
        assert spec.p == p
        assert sorted(spec.order.tolist()) == list(range(p))
        position = np.empty(p, dtype=int)
        position[spec.order] = np.arange(p)
        rows, cols = np.nonzero(spec.weights)
        assert np.all(position[cols] < position[rows])
        mags = np.abs(spec.weights[rows, cols])
        assert np.all((mags >= 0.1) & (mags <= 0.9))
        if q == 1.0:
            assert rows.size == p * (p - 1) // 2
        if q == 0.0:
            assert rows.size == 0


def test_generate_random_scm_parent_counts():
    # at causal position k the parent count is Binomial(k, q)
    rng = np.random.default_rng(11)
    p, q, reps = 6, 0.4, 1500
    counts = np.zeros(p)
    for _ in range(reps):
        spec = generate_random_scm(p, q, StudentT(3.0), rng)
        for k, var in enumerate(spec.order):
            counts[k] += np.count_nonzero(spec.weights[var])
    for k in range(1, p):
        mean_k = counts[k] / reps
        se = np.sqrt(k * q * (1 - q) / reps)
        assert abs(mean_k - k * q) <= 4.0 * se


def test_generate_random_scm_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        generate_random_scm(0, 0.5, StudentT(3.0), rng)
    with pytest.raises(ValueError):
        generate_random_scm(3, 1.5, StudentT(3.0), rng)


def _chain_spec(b21=0.7, b32=-0.4):
    weights = np.zeros((3, 3))
    weights[1, 0] = b21
    weights[2, 1] = b32
    return ScmSpec(order=np.array([0, 1, 2]), weights=weights,
                   noise=(StudentT(5.0),) * 3)


def test_sample_solves_the_linear_system():
    # sampling with the same seed but zero weights exposes the raw noise
    # matrix, so the mixed sample must equal (I - B)^-1 E exactly
    spec = _chain_spec()
    zero = ScmSpec(order=spec.order, weights=np.zeros((3, 3)), noise=spec.noise)
    mixed = sample(spec, 400, np.random.default_rng(42)).values
    noise = sample(zero, 400, np.random.default_rng(42)).values
    expected = np.linalg.solve(np.eye(3) - spec.weights, noise.T).T
    assert np.allclose(mixed, expected, rtol=1e-12, atol=1e-12)


def test_sample_repeatability_and_shapes():
    spec = _chain_spec()
    a = sample(spec, 50, np.random.default_rng(9))
    b = sample(spec, 50, np.random.default_rng(9))
    c = sample(spec, 50, np.random.default_rng(10))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.names == ["x1", "x2", "x3"]
    assert (a.n, a.p) == (50, 3)
    with pytest.raises(ValueError):
        sample(spec, 0, np.random.default_rng(1))


def test_sample_nontrivial_order():
    # variable 2 is the source, 0 the sink: columns must respect that
    weights = np.zeros((3, 3))
    weights[1, 2] = 0.8
    weights[0, 1] = 0.5
    spec = ScmSpec(order=np.array([2, 1, 0]), weights=weights,
                   noise=(ExponentialCentered(1.0),) * 3)
    data = sample(spec, 30_000, np.random.default_rng(3))
    x = data.values
    slope = np.dot(x[:, 2] - x[:, 2].mean(), x[:, 1] - x[:, 1].mean())
    slope /= np.dot(x[:, 2] - x[:, 2].mean(), x[:, 2] - x[:, 2].mean())
    assert slope == pytest.approx(0.8, abs=0.05)


def test_scm_spec_validation():
    with pytest.raises(ValueError):
        ScmSpec(order=np.array([0, 0, 2]), weights=np.zeros((3, 3)),
                noise=(StudentT(3.0),) * 3)
    backward = np.zeros((2, 2))
    backward[0, 1] = 0.5  # 1 -> 0 but order says 0 first
    with pytest.raises(ValueError):
        ScmSpec(order=np.array([0, 1]), weights=backward, noise=(StudentT(3.0),) * 2)
    with pytest.raises(ValueError):
        ScmSpec(order=np.array([0, 1]), weights=np.zeros((2, 2)), noise=(StudentT(3.0),))
    with pytest.raises(ValueError):
        ScmSpec(order=np.array([0, 1]), weights=np.full((2, 2), np.nan),
                noise=(StudentT(3.0),) * 2)


def test_scm_spec_json_round_trip():
    spec = generate_random_scm(4, 0.6, (StudentT(3.0), LognormalCentered(0.0, 1.0),
                                        ParetoCentered(2.0, 1.0), ExponentialCentered(1.0)),
                               np.random.default_rng(5))
    clone = ScmSpec.from_json(spec.to_json())
    assert np.array_equal(clone.order, spec.order)
    assert np.array_equal(clone.weights, spec.weights)
    assert clone.noise == spec.noise
    with pytest.raises(ParseError):
        ScmSpec.from_json("{not json")
    with pytest.raises(ParseError):
        ScmSpec.from_json(json.dumps({"order": [0], "weights": [[0.0]]}))
    with pytest.raises(ParseError):
        ScmSpec.from_json(json.dumps({"order": [0, 1], "weights": [[0.0, 0.5], [0.0, 0.0]],
                                      "noise": [{"family": "student-t", "df": 3}] * 2}))


def test_order_respects_weights():
    weights = np.zeros((3, 3))
    weights[1, 0] = 0.5
    assert order_respects_weights([0, 1, 2], weights)
    assert order_respects_weights([0, 2, 1], weights)
    assert order_respects_weights([2, 0, 1], weights)  # 2 is disconnected
    assert not order_respects_weights([1, 0, 2], weights)
    with pytest.raises(ValueError):
        validate_ordering([0, 1, 1], 3)


def test_inject_outlier():
    data = DataMatrix(values=np.zeros((4, 2)))
    poked = inject_outlier(data, 0, 1, 1024.0)
    assert poked.values[0, 1] == 1024.0
    assert data.values[0, 1] == 0.0  # original untouched
    assert poked.values[1:].sum() == 0.0
    for row, col in [(-1, 0), (4, 0), (0, -1), (0, 2)]:
        with pytest.raises(IndexError):
            inject_outlier(data, row, col, 1.0)
    with pytest.raises(ValueError):
        inject_outlier(data, 0, 0, np.inf)


def test_data_matrix_csv_round_trip():
    rng = np.random.default_rng(8)
    data = DataMatrix(values=rng.normal(size=(20, 3)), names=["a", "b", "c"])
    buf = io.StringIO()
    data.to_csv(buf)
    back = DataMatrix.from_csv(io.StringIO(buf.getvalue()))
    assert back.names == ["a", "b", "c"]
    assert np.array_equal(back.values, data.values)  # repr round-trips exactly
    buf = io.StringIO()
    data.to_csv(buf, header=False)
    bare = DataMatrix.from_csv(io.StringIO(buf.getvalue()))
    assert bare.names == ["x1", "x2", "x3"]
    assert np.array_equal(bare.values, data.values)


def test_data_matrix_csv_errors():
    with pytest.raises(ParseError) as info:
        DataMatrix.from_csv(io.StringIO("a,b\n1.0,2.0\n1.0,oops\n"))
    assert info.value.row == 2 and info.value.column == 1
    with pytest.raises(ParseError):
        DataMatrix.from_csv(io.StringIO("a,b\n1.0\n"))
    with pytest.raises(ParseError):
        DataMatrix.from_csv(io.StringIO(""))
    with pytest.raises(ParseError):
        DataMatrix.from_csv(io.StringIO("a,b\n"))
    with pytest.raises(ParseError):
        DataMatrix.from_csv(io.StringIO("1.0,inf\n2.0,3.0\n"))


def test_data_matrix_json_round_trip():
    data = DataMatrix(values=np.array([[1.5, -2.0], [0.25, 8.0]]), names=["u", "v"])
    back = DataMatrix.from_json(data.to_json())
    assert back.names == data.names
    assert np.array_equal(back.values, data.values)
    with pytest.raises(ParseError):
        DataMatrix.from_json("[1, 2")
