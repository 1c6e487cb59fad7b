from dataclasses import replace

import numpy as np
import pytest

from exceptions.forecast_exceptions import (
    ConfigError,
    ConstantChannelError,
    InsufficientDataError,
    ShapeMismatchError,
)
from selection.channel_selector import (
    annotate_scores,
    build_scores,
    channel_scores,
    consistency_filter,
    mask_from,
    select_topk,
)
from timeseries.dataset import from_array, split_and_standardize, window_arrays

# ETTh2 worked example: per-channel scores and validation losses
NAMES = ["HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL", "OT"]
NONSTAT = [0.569, 0.590, 0.295, 0.664, 0.290, 0.121, 0.422]
SIM = [0.510, 0.530, 0.451, 0.395, 0.353, 0.314, 0.013]
STATIONARY_LOSS = [0.273, 0.252, 0.082, 0.414, 0.254, 0.013, 0.183]
FUSION_LOSS = [0.270, 0.873, 0.083, 0.946, 0.254, 0.013, 0.183]


def test_worked_example_selection():
    scores = build_scores(NAMES, NONSTAT, SIM, rho=1.0)
    topk = select_topk(scores, 0.7)
    assert topk == (0, 1, 2, 3)

    final = consistency_filter(topk, STATIONARY_LOSS, FUSION_LOSS, tau=0.05)
    assert [NAMES[i] for i in final] == ["HUFL", "MUFL"]
    np.testing.assert_array_equal(mask_from(final, 7), [1, 0, 1, 0, 0, 0, 0])

    annotated = annotate_scores(scores, topk, STATIONARY_LOSS, FUSION_LOSS, tau=0.05)
    assert [s.consistent for s in annotated] == [True, False, True, False, True, True, True]
    assert [s.selected_topk for s in annotated] == [True, True, True, True, False, False, False]
    assert annotated[1].fusion_val_loss == 0.873


def test_score_decomposition():
    scores = build_scores(NAMES, NONSTAT, SIM, rho=0.5)
    for s in scores:
        assert s.g == pytest.approx(s.nonstat + 0.5 * s.sim)
    zero_rho = build_scores(NAMES, NONSTAT, SIM, rho=0.0)
    assert [s.g for s in zero_rho] == NONSTAT


def test_ties_go_to_lower_index():
    scores = build_scores(["a", "b", "c", "d"], [1.0, 2.0, 2.0, 2.0], [0.0] * 4)
    assert select_topk(scores, 0.5) == (1, 2)


def test_small_alpha_selects_nothing(caplog):
    scores = build_scores(NAMES, NONSTAT, SIM)
    assert select_topk(scores, 0.1) == ()
    assert "selects no channel" in caplog.text


def test_alpha_one_selects_all():
    scores = build_scores(NAMES, NONSTAT, SIM)
    assert select_topk(scores, 1.0) == tuple(range(7))


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_alpha_out_of_range(alpha):
    with pytest.raises(ConfigError):
        select_topk(build_scores(NAMES, NONSTAT, SIM), alpha)


def test_consistency_filter_keeps_equal_losses():
    assert consistency_filter([0, 1], [0.2, 0.2], [0.2, 0.3], tau=0.0) == (0,)
    assert consistency_filter([1], [0.2, 0.2], [0.2, 0.209], tau=0.05) == (1,)
    assert consistency_filter([], [0.2], [0.9]) == ()
    with pytest.raises(ConfigError):
        consistency_filter([0], [0.2], [0.2], tau=-1.0)


def test_annotate_without_losses():
    scores = build_scores(NAMES, NONSTAT, SIM)
    annotated = annotate_scores(scores, (0, 1))
    assert all(s.consistent is None for s in annotated)
    assert scores[0].selected_topk is False
    assert annotated[0].selected_topk is True


def test_build_scores_length_mismatch():
    with pytest.raises(ShapeMismatchError):
        build_scores(["a", "b"], [0.1], [0.2, 0.3])


def test_channel_scores_from_dataset(random_walk_dataset):
    scores = channel_scores(random_walk_dataset, 24, rho=1.0)
    assert [s.channel for s in scores] == ["a", "b", "c"]

    windows = random_walk_dataset.values[:360]
    expected_nonstat = np.mean([windows[i:i + 24, 1].std() for i in range(360 - 24 + 1)])
    assert scores[1].nonstat == pytest.approx(expected_nonstat)
    # a and c are strongly correlated
    assert scores[0].sim > scores[1].sim
    assert all(1.0 / 3.0 <= s.sim <= 1.0 for s in scores)


def test_channel_scores_average_over_training_windows(random_walk_dataset):
    L, H = 24, 12
    scores = channel_scores(random_walk_dataset, L, H=H)
    X, _, _ = window_arrays(random_walk_dataset, "train", L, H)
    assert X.shape[0] == 360 - L - H + 1
    expected = X.std(axis=1).mean(axis=0)
    assert [s.nonstat for s in scores] == pytest.approx(list(expected), rel=1e-12)


def test_channel_scores_need_a_full_training_window(random_walk_dataset):
    with pytest.raises(InsufficientDataError):
        channel_scores(random_walk_dataset, 300, H=100)
    with pytest.raises(ConfigError):
        channel_scores(random_walk_dataset, 24, H=-1)


def test_identical_channels_have_full_similarity():
    rng = np.random.default_rng(2)
    base = np.cumsum(rng.normal(size=200))
    ds = split_and_standardize(from_array(np.column_stack([base, 2 * base + 1])), (0.6, 0.2, 0.2))
    scores = channel_scores(ds, 10)
    assert [s.sim for s in scores] == pytest.approx([1.0, 1.0])


def test_constant_channel_has_no_similarity():
    rng = np.random.default_rng(2)
    values = np.column_stack([rng.normal(size=100), rng.normal(size=100)])
    ds = split_and_standardize(from_array(values), (0.6, 0.2, 0.2))
    constant = replace(ds, values=np.column_stack([ds.values[:, 0], np.zeros(100)]))
    with pytest.raises(ConstantChannelError):
        channel_scores(constant, 10)
