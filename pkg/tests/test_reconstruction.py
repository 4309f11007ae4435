import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_trains
from pulserecon import (
    AlphaEstimates,
    InsufficientData,
    MissingCoordinateData,
    PolygonalChain,
    QuantileEstimate,
    ReconstructionError,
    SamplingConfig,
    algorithm1_oracle,
    algorithm2,
    arc_coordinate,
    build_chain,
    chain_point,
    estimate_alphas,
    estimate_quantile,
    estimate_Tp,
    extract_trains,
    q_hat,
    reconstruct_pulse,
    synth_stream,
)
from pulserecon.reconstruction import slice_estimates

L_CHAIN = [[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]


@pytest.fixture
def chain():
    return build_chain(L_CHAIN)


def test_build_chain_lengths(chain):
    assert np.allclose(np.diff(chain.cum_len), 1.0)
    assert chain.length == 4.0
    assert chain.n == 3


def test_build_chain_single_point():
    assert build_chain([[0.0, 0.0, 3.0]]).length == 6.0


def test_build_chain_empty():
    with pytest.raises(ValueError):
        build_chain(np.empty((0, 3)))


def test_arc_coordinate(chain):
    assert [arc_coordinate(chain, k) for k in (1, 2, 3)] == [1.0, 2.0, 3.0]
    with pytest.raises(IndexError):
        arc_coordinate(chain, 0)
    with pytest.raises(IndexError):
        arc_coordinate(chain, 4)


def test_arc_coordinate_ends():
    pts = np.array([[0.0, 0.3, 2.0], [1.0, 0.5, 0.2], [2.0, 0.0, 0.0]])
    c = build_chain(pts)
    assert arc_coordinate(c, 1) == pytest.approx(np.linalg.norm(pts[0]))
    assert arc_coordinate(c, 3) == pytest.approx(c.length - np.linalg.norm(pts[-1]))


def test_chain_point(chain):
    assert np.allclose(chain_point(chain, 0.5), [0.0, 0.5])
    assert np.allclose(chain_point(chain, 0.0), 0.0)
    assert np.allclose(chain_point(chain, chain.length), 0.0)
    assert np.allclose(chain_point(chain, 2.5), [1.0, 0.5])
    with pytest.raises(ValueError):
        chain_point(chain, -0.1)
    with pytest.raises(ValueError):
        chain_point(chain, 4.1)


def test_estimate_quantile(chain):
    Q = estimate_quantile(chain)
    assert Q(0.0) == 0.0
    assert Q(1 / 6) == pytest.approx(1.0)
    assert Q(1 / 2) == pytest.approx(2.0)
    assert Q(5 / 6) == pytest.approx(3.0)
    assert Q(1.0) == 4.0
    assert Q(1 / 3) == pytest.approx(1.5)


def test_estimate_quantile_single_point():
    c = build_chain([[3.0, 4.0]])
    assert estimate_quantile(c)(0.5) == pytest.approx(5.0)


def test_non_monotone_grid_is_clamped():
    c = PolygonalChain(np.zeros((4, 2)), np.array([0.0, 2.0, 1.0, 3.0]))
    with pytest.warns(RuntimeWarning):
        Q = estimate_quantile(c)
    assert np.all(np.diff(Q.values) >= 0)


def test_q_hat(chain):
    Q = estimate_quantile(chain)
    assert np.allclose(q_hat(chain, Q, 1.5), 0.0)
    assert np.allclose(q_hat(chain, Q, -0.2), 0.0)
    assert np.allclose(q_hat(chain, Q, 1 / 6), [0.0, 1.0])
    assert q_hat(chain, Q, np.array([0.1, 0.5, 2.0])).shape == (3, 2)


def test_estimate_alphas_ordinals():
    pts = np.array([
        [0.0, 0.0, 1.0],
        [0.3, 0.3, 0.4],
        [0.5, 0.5, 0.2],
        [0.1, 0.0, 0.0],
    ])
    a = estimate_alphas(pts)
    assert a.alpha_min[1] == pytest.approx(0.25)  # n_min = 2
    assert a.alpha_max[0] == pytest.approx(0.75)  # n_max = 3
    assert a.alpha_min[0] == pytest.approx(0.25)
    assert a.alpha_max[1] == pytest.approx(0.75)  # third coordinate last nonzero at row 3


def test_estimate_alphas_all_nonzero():
    pts = np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
    assert estimate_alphas(pts).alpha_min[0] == 0.0


def test_estimate_alphas_missing_coordinate():
    with pytest.raises(MissingCoordinateData):
        estimate_alphas(np.array([[0.0, 1.0], [0.0, 2.0]]))


def test_exact_alphas_value():
    a = AlphaEstimates.exact(1.0, 2, 0.16)
    assert a.alpha_min[0] == pytest.approx(2 * 0.16 / 1.32)
    assert a.alpha_min[0] == pytest.approx(0.242424, abs=1e-6)


def test_estimate_Tp_hand_example():
    a = AlphaEstimates(np.array([0.375, 0.1875]), np.array([0.8125, 0.625]))
    assert estimate_Tp(a, 2, 0.3) == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(AlphaEstimates.exact(1.0, 2, 0.3).alpha_min, a.alpha_min)
    assert np.allclose(AlphaEstimates.exact(1.0, 2, 0.3).alpha_max, a.alpha_max)


@settings(max_examples=100, deadline=None)
@given(Tp=st.floats(0.01, 100.0), tau_frac=st.floats(0.01, 2.0), d=st.integers(1, 5))
def test_Tp_inversion_identity(Tp, tau_frac, d):
    tau = tau_frac * Tp
    assert estimate_Tp(AlphaEstimates.exact(Tp, d, tau), d, tau) == pytest.approx(Tp, rel=1e-10)


def test_estimate_Tp_derivative():
    d, tau = 2, 0.16
    a = AlphaEstimates.exact(1.0, d, tau)
    n = 10_000

    def Tp_with(delta):
        amin = a.alpha_min.copy()
        amin[0] += delta
        return estimate_Tp(AlphaEstimates(amin, a.alpha_max), d, tau)

    analytic = -(tau * d / (2 * d)) / a.alpha_min[0] ** 2
    h = 1e-6
    central = (Tp_with(h) - Tp_with(-h)) / (2 * h)
    assert central == pytest.approx(analytic, rel=1e-6)
    step = Tp_with(1 / n) - Tp_with(0.0)
    assert abs(step - analytic / n) < 10 / n**2


def test_estimate_Tp_drops_degenerate_terms():
    a = AlphaEstimates.exact(1.0, 3, 0.2)
    amin = a.alpha_min.copy()
    amax = a.alpha_max.copy()
    amin[2] = 0.0
    amax[0] = 1.0
    assert estimate_Tp(AlphaEstimates(amin, amax), 3, 0.2) == pytest.approx(1.0, abs=1e-12)


def test_estimate_Tp_all_degenerate():
    with pytest.raises(ReconstructionError):
        estimate_Tp(AlphaEstimates(np.zeros(2), np.ones(2)), 2, 0.1)


def test_reconstruct_zero_quantile_map(chain):
    Q = QuantileEstimate(np.array([0.0, 0.5, 1.0]), np.zeros(3))
    est = reconstruct_pulse(chain, Q, 1.0, 1, 0.2, grid_size=64)
    assert np.all(est.pulse.knot_values == 0.0)
    assert est.pulse.Tp == 1.0


@pytest.mark.parametrize("name", ["tri", "bump"])
def test_oracle_recovers_pulse(name, request):
    p = request.getfixturevalue(name)
    est = algorithm1_oracle(p, 2, 0.16, m=10_000)
    t = est.pulse.knot_times
    assert abs(est.Tp_hat - p.Tp) < 1e-6
    assert np.max(np.abs(est.pulse.knot_values - p(t))) < 1e-3


@pytest.mark.parametrize("name", ["tri", "bump"])
def test_oracle_slices_agree(name, request):
    p = request.getfixturevalue(name)
    res = algorithm1_oracle(p, 2, 0.16, m=10_000, full=True)
    t = np.linspace(0, p.Tp, 301)
    slices = slice_estimates(res.chain, res.quantile, res.estimate.Tp_hat, 2, 0.16, t)
    assert np.max(np.abs(slices - p(t))) < 1e-3


def test_oracle_other_dimensions(bump):
    for d in (1, 3, 4):
        est = algorithm1_oracle(bump, d, 0.1, m=5000)
        assert abs(est.Tp_hat - 1.0) < 1e-9
        assert np.max(np.abs(est.pulse.knot_values - bump(est.pulse.knot_times))) < 1e-3


def test_algorithm2_converges_to_oracle(bump, cfg2):
    _, trains = exact_trains(bump, 2, 0.16, 10_000)
    perm = np.random.default_rng(0).permutation(len(trains))
    est2 = algorithm2(trains[perm], 2, 0.16, cfg2)
    est1 = algorithm1_oracle(bump, 2, 0.16, m=10_000)
    t = np.linspace(0, max(est1.Tp_hat, est2.Tp_hat), 2000)
    assert np.max(np.abs(est2.pulse(t) - est1.pulse(t))) < 1e-2


def test_algorithm2_two_trains():
    with pytest.raises(InsufficientData):
        algorithm2(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]), 2, 0.1)


def test_algorithm2_dimension_mismatch(bump, cfg2):
    _, trains = exact_trains(bump, 2, 0.16, 100)
    with pytest.raises(ValueError):
        algorithm2(trains, 3, 0.16)


def test_algorithm2_self_intersecting_curve_does_not_crash(bump):
    cfg = SamplingConfig(2, 0.36, "stream")
    for seed in range(5):
        trains = extract_trains(synth_stream(bump, 200, seed, cfg), cfg, seed + 100)
        try:
            est = algorithm2(trains, 2, 0.36, cfg)
        except ReconstructionError:
            continue
        assert est.Tp_hat > 0


@pytest.mark.parametrize("seed", range(10))
def test_quantile_monotone_after_orient(bump, seed):
    from pulserecon import nn_crust, orient

    cfg = SamplingConfig(2, 0.16, "stream")
    trains = extract_trains(synth_stream(bump, 64, seed, cfg), cfg, seed)
    ordered = trains[orient(trains, nn_crust(trains)).perm]
    Q = estimate_quantile(build_chain(ordered))
    assert np.all(np.diff(Q.values) >= 0)
    assert Q.values[0] == 0.0 and Q.values[-1] == build_chain(ordered).length


@pytest.mark.parametrize("c", [0.1, 3.0])
def test_amplitude_equivariance(bump, cfg2, c):
    trains = extract_trains(synth_stream(bump, 256, 1, cfg2), cfg2, 2)
    base = algorithm2(trains, 2, 0.16, cfg2)
    scaled = algorithm2(c * trains, 2, 0.16, cfg2)
    assert scaled.Tp_hat == base.Tp_hat
    assert np.allclose(scaled.pulse.knot_values, c * base.pulse.knot_values, rtol=1e-9, atol=0)


def test_time_scale_equivariance(bump):
    gamma = 2.0
    slow = bump.scaled(time=gamma)
    cfg = SamplingConfig(2, 0.16)
    cfg_slow = SamplingConfig(2, gamma * 0.16)
    t = np.random.default_rng(4).uniform(-cfg.span, bump.Tp, 500)
    from pulserecon import sample_train

    a = sample_train(bump, t, cfg)
    b = sample_train(slow, gamma * t, cfg_slow)
    assert np.array_equal(a, b)
    a = a[np.any(a != 0, axis=1)]
    est = algorithm2(a, 2, 0.16)
    est_slow = algorithm2(a, 2, gamma * 0.16)
    assert est_slow.Tp_hat == pytest.approx(gamma * est.Tp_hat, rel=1e-12)
    s = np.linspace(0, est.Tp_hat, 97)
    assert np.allclose(est_slow.pulse(gamma * s), est.pulse(s), atol=1e-12)
