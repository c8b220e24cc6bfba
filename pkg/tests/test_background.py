import numpy as np
import pytest

from plumefilters.background import KIND_CENTERED, KIND_RAW, BackgroundStats, estimate, spd_solve
from plumefilters.errors import SingularBackgroundError, ValidationError

from oracles import covariance_brute


def test_two_pixel_example():
    stats = estimate(np.array([[0.0, 0.0], [2.0, 2.0]]), KIND_CENTERED, ddof=1)
    assert np.allclose(stats.mean, [1.0, 1.0])
    assert np.allclose(stats.matrix, [[2.0, 2.0], [2.0, 2.0]])


def test_constant_pixels_zero_covariance():
    stats = estimate(np.full((5, 3), 7.0), KIND_CENTERED, ddof=1)
    assert np.all(stats.matrix == 0.0)


def test_repeated_pixel_raw_correlation():
    v = np.array([1.0, -2.0, 0.5])
    n = 6
    stats = estimate(np.tile(v, (n, 1)), KIND_RAW, ddof=1)
    assert np.allclose(stats.matrix, n / (n - 1) * np.outer(v, v), rtol=1e-12)


def test_matches_brute_force(rng):
    for _ in range(30):
        n = int(rng.integers(2, 65))
        p = int(rng.integers(1, 17))
        pixels = rng.standard_normal((n, p)) * 3.0 + rng.standard_normal(p)
        for kind, centered in ((KIND_CENTERED, True), (KIND_RAW, False)):
            for ddof in (0, 1):
                stats = estimate(pixels, kind, ddof)
                mean, matrix = covariance_brute(pixels, centered, ddof)
                assert np.allclose(stats.mean, mean, rtol=1e-10)
                scale = max(np.abs(matrix).max(), 1e-30)
                assert np.abs(stats.matrix - matrix).max() <= 1e-10 * scale


def test_raw_equals_centered_plus_mean_outer(rng):
    # K = C + (N/divisor) mu mu^T, an identity cross-validating both kinds.
    for _ in range(20):
        n = int(rng.integers(2, 40))
        p = int(rng.integers(1, 10))
        pixels = rng.standard_normal((n, p)) + 2.0
        for ddof in (0, 1):
            raw = estimate(pixels, KIND_RAW, ddof).matrix
            centered = estimate(pixels, KIND_CENTERED, ddof).matrix
            mu = pixels.mean(axis=0)
            expected = centered + (n / (n - ddof)) * np.outer(mu, mu)
            assert np.allclose(raw, expected, rtol=1e-8)


def test_estimate_validation():
    with pytest.raises(ValidationError):
        estimate(np.zeros((1, 3)))
    with pytest.raises(ValidationError):
        estimate(np.array([[1.0, np.inf], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        estimate(np.zeros((3, 2)), kind="nonsense")


def test_spd_solve_identity_and_diagonal():
    stats = BackgroundStats(
        mean=np.zeros(2), matrix=np.eye(2), kind=KIND_CENTERED, ddof=0, sample_count=4
    )
    assert np.allclose(spd_solve(stats, np.array([3.0, -1.0])), [3.0, -1.0])
    diag = BackgroundStats(
        mean=np.zeros(2), matrix=np.diag([2.0, 4.0]), kind=KIND_CENTERED, ddof=0, sample_count=4
    )
    assert np.allclose(spd_solve(diag, np.array([2.0, 4.0])), [1.0, 1.0])


def test_spd_solve_residual_bound(rng):
    for _ in range(25):
        b = rng.standard_normal((8, 8))
        a = b.T @ b + np.eye(8)
        stats = BackgroundStats(
            mean=np.zeros(8), matrix=(a + a.T) / 2, kind=KIND_CENTERED, ddof=0, sample_count=10
        )
        rhs = rng.standard_normal(8)
        x = spd_solve(stats, rhs)
        residual = np.abs(a @ x - rhs).max()
        assert residual < 1e-8 * max(np.abs(rhs).max(), 1e-30)


def test_jitter_recovers_singular_matrix(rng):
    # Rank-deficient but nonzero trace: the ladder must find a solution.
    v = rng.standard_normal(6)
    matrix = np.outer(v, v)
    stats = BackgroundStats(
        mean=np.zeros(6), matrix=(matrix + matrix.T) / 2, kind=KIND_CENTERED, ddof=0, sample_count=9
    )
    x = spd_solve(stats, v * (v @ v))
    assert np.isfinite(x).all()


def test_all_jitter_levels_fail_for_zero_matrix():
    stats = BackgroundStats(
        mean=np.zeros(3), matrix=np.zeros((3, 3)), kind=KIND_CENTERED, ddof=0, sample_count=5
    )
    with pytest.raises(SingularBackgroundError, match="product-x tile-7"):
        spd_solve(stats, np.ones(3), context="product-x tile-7")


def test_stats_validation():
    with pytest.raises(ValidationError):
        BackgroundStats(
            mean=np.zeros(2),
            matrix=np.array([[1.0, 0.5], [0.0, 1.0]]),
            kind=KIND_CENTERED,
            ddof=0,
            sample_count=3,
        )
    with pytest.raises(ValidationError):
        BackgroundStats(
            mean=np.zeros(2), matrix=np.eye(2), kind=KIND_CENTERED, ddof=1, sample_count=1
        )
