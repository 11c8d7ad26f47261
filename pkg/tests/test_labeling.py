import numpy as np
import pytest

from kolmo import labeling as lb
from kolmo import spectral as sp
from kolmo import symmetry as sym
from kolmo.errors import TooShortError

from oracles import label_sequence_reference


def synthetic_norms(seed, ns=200):
    """Norm traces that straddle the thresholds like the flow data does."""
    rng = np.random.default_rng(seed)
    base = 50 + 10 * rng.standard_normal(ns).cumsum() * 0.1
    bursts = 25 * (rng.random(ns) < 0.05)
    return np.abs(base + rng.normal(0, 3, ns) + bursts)


class TestLabel:
    def test_constant_below_threshold(self):
        ls = lb.label_norms(np.full(120, 40.0))
        assert np.all(ls.labels == 0)
        assert len(ls.labels) == 100
        assert ls.first_labeled == 10 and ls.last_labeled == 110

    def test_constant_above_threshold(self):
        ls = lb.label_norms(np.full(120, 70.0))
        assert np.all(ls.labels == 1)

    def test_threshold_boundary_is_bursting(self):
        ls = lb.label_norms(np.full(120, 60.0))
        assert np.all(ls.labels == 1)

    def test_step_signal_matches_reference(self):
        norms = np.concatenate([np.full(50, 40.0), np.full(50, 80.0)])
        got = lb.label_norms(norms).labels
        ref = label_sequence_reference(norms)
        assert np.array_equal(got, ref)

    def test_reference_equivalence_random(self):
        for seed in range(200):
            norms = synthetic_norms(seed)
            got = lb.label_norms(norms).labels
            ref = label_sequence_reference(norms)
            assert np.array_equal(got, ref), seed

    def test_too_short_raises(self):
        with pytest.raises(TooShortError):
            lb.label_norms(np.full(20, 40.0), b=10, f=10)

    def test_raising_threshold_keeps_quiescent_labels(self):
        for seed in range(30):
            norms = synthetic_norms(seed)
            lo = lb.label_norms(norms, norm_threshold=55.0).labels
            hi = lb.label_norms(norms, norm_threshold=70.0).labels
            assert np.all(hi[lo == 0] == 0)

    def test_label_of_indexing(self):
        norms = synthetic_norms(1)
        ls = lb.label_norms(norms)
        assert ls.label_of(ls.first_labeled) == ls.labels[0]
        assert ls.label_of(ls.last_labeled - 1) == ls.labels[-1]
        with pytest.raises(IndexError):
            ls.label_of(ls.first_labeled - 1)

    def test_labels_invariant_under_symmetry_ops(self):
        grid = sp.Grid()
        params = sp.FlowParams(re=14.4, n=2, dt=0.01)
        ic = sp.random_initial_condition(grid, seed=3)
        ser = sp.simulate(sp.advance(ic, params, 30.0), params, 150.0, 5.0)
        base = lb.label(ser, norm_threshold=np.median(lb.snapshot_norms(ser)))
        for op in (sym.shift_reflect(1), sym.rotate(), sym.translate(0.9)):
            moved = np.stack(
                [sym.apply_op(op, s, grid, params.n) for s in ser.snapshots]
            )
            got = lb.label(moved, norm_threshold=np.median(lb.snapshot_norms(ser)))
            assert np.array_equal(got.labels, base.labels)


class TestDurations:
    def test_interior_runs_only(self):
        ls = lb.LabelSeries(np.array([0, 0, 0, 1, 1, 0, 0]), 10, 17, np.zeros(27))
        t_q, t_b = lb.durations(ls, 5.0)
        assert list(t_b) == [10.0]
        assert list(t_q) == []

    def test_all_equal_labels_give_nothing(self):
        ls = lb.LabelSeries(np.zeros(40, dtype=int), 10, 50, np.zeros(60))
        t_q, t_b = lb.durations(ls, 5.0)
        assert len(t_q) == 0 and len(t_b) == 0

    def test_alternating(self):
        lab = np.array([1, 0, 0, 1, 1, 1, 0, 1, 0, 0])
        ls = lb.LabelSeries(lab, 0, 10, np.zeros(10))
        t_q, t_b = lb.durations(ls, 2.0)
        assert sorted(t_q) == [2.0, 4.0]
        assert sorted(t_b) == [2.0, 6.0]

    def test_snapshot_norm_convention(self):
        # plain euclidean norm of the flattened snapshot, no area weights
        arr = np.ones((3, 4, 4))
        assert np.allclose(lb.snapshot_norms(arr), 4.0)
