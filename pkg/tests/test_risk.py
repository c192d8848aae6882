import numpy as np
import pytest

from evacgate.risk import DelaySamples, avar, objective


def ru_bruteforce(x, alpha):
    """Independent oracle: minimize the Rockafellar-Uryasev expression over
    an eta grid that includes the sample values (where the piecewise-linear
    objective attains its minimum)."""
    x = np.asarray(x, dtype=float)
    etas = np.unique(np.concatenate([x, np.linspace(0.0, x.max(), 1001)]))
    vals = etas + np.mean(np.clip(x[None, :] - etas[:, None], 0.0, None), axis=1) / (1.0 - alpha)
    return vals.min()


def test_worked_example():
    assert avar([1, 2, 3, 4, 5], 0.8) == pytest.approx(5.0, abs=1e-9)
    assert ru_bruteforce([1, 2, 3, 4, 5], 0.8) == pytest.approx(5.0, abs=1e-9)


def test_alpha_zero_is_mean():
    x = [1, 2, 3, 4, 5]
    assert avar(x, 0.0) == pytest.approx(3.0)


def test_degenerate_constant_samples():
    for a in (0.0, 0.3, 0.8, 0.99):
        assert avar([7.5] * 9, a) == pytest.approx(7.5)


def test_fractional_tail_case():
    # N=5, alpha=0.5: tail 2.5 samples -> (5 + 4 + 0.5*3) / 2.5
    assert avar([1, 2, 3, 4, 5], 0.5) == pytest.approx(4.2)
    assert ru_bruteforce([1, 2, 3, 4, 5], 0.5) == pytest.approx(4.2, abs=1e-9)


def test_objective_example_and_linearity():
    x = [1, 2, 3, 4, 5]
    assert objective(x, 1.0 / 3.0, 0.8) == pytest.approx(3.0 + 5.0 / 3.0, abs=1e-9)
    assert objective(x, 0.0, 0.8) == pytest.approx(3.0)
    j1 = objective(x, 1.0, 0.8)
    j2 = objective(x, 2.0, 0.8)
    assert j2 - j1 == pytest.approx(j1 - objective(x, 0.0, 0.8))


def test_positive_homogeneity():
    x = np.array([0.5, 1.0, 9.0, 2.0])
    assert objective(3.0 * x, 0.25, 0.6) == pytest.approx(3.0 * objective(x, 0.25, 0.6))


def test_oracle_agreement_and_coherence():
    rng = np.random.default_rng(123)
    for _ in range(100):
        x = rng.exponential(5.0, size=rng.integers(2, 40))
        prev = -np.inf
        for a in np.sort(rng.random(3) * 0.97):
            val = avar(x, a)
            assert val == pytest.approx(ru_bruteforce(x, a), abs=1e-9)
            assert val >= x.mean() - 1e-12  # coherence: AVaR >= E
            assert val >= prev - 1e-12  # monotone in alpha
            prev = val


def test_translation_equivariance():
    x = np.array([1.0, 5.0, 2.0, 8.0])
    assert avar(x + 3.0, 0.7) == pytest.approx(avar(x, 0.7) + 3.0)


def test_errors():
    with pytest.raises(ValueError):
        avar([1.0], 1.0)
    with pytest.raises(ValueError):
        avar([1.0], -0.1)
    with pytest.raises(ValueError):
        objective([1.0], -1.0, 0.5)
    with pytest.raises(ValueError):
        avar([], 0.5)
    with pytest.raises(ValueError):
        DelaySamples(np.array([1.0, -2.0]))


def test_delay_samples_container():
    s = DelaySamples(np.array([1.0, 2.0]), seeds=((42, 0), (42, 1)))
    assert len(s) == 2
    assert objective(s, 0.0, 0.0) == pytest.approx(1.5)
