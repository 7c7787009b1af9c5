from __future__ import annotations

import numpy as np
import pytest

from interpred.context.regions import NUM_REGIONS
from interpred.models.classifiers import (
    SpatialModel,
    StructuralModel,
    TemporalConvParams,
    TemporalModel,
    pad_flow_sequence,
    spatial_forward,
    structural_forward,
    temporal_forward,
)
from interpred.models.head import ClassifierHead, head_scores
from interpred.models.lstm import LstmParams, LstmState, lstm_forward, lstm_step
from interpred.numerics.gradcheck import grad_check
from interpred.numerics.random import make_rng


def _naive_pad(flows, t, k):
    if t >= k:
        return [flows[i] for i in range(t - k, t)]
    out = [flows[i] for i in range(t)]
    for _ in range(k - t):
        out.append(flows[t - 1])
    return out


class TestLstm:
    def test_zero_params_keep_hidden_state_at_zero(self):
        p = LstmParams.zeros(3, 4)
        state = LstmState.zeros(4)
        x = make_rng(0).normal(size=(7, 3))
        for t in range(7):
            state, o = lstm_step(p, x[t], state)
            np.testing.assert_array_equal(state.h, 0.0)
            np.testing.assert_array_equal(state.C, 0.0)
            np.testing.assert_array_equal(o, 0.5)

    def test_batched_forward_matches_steps(self):
        rng = make_rng(1)
        p = LstmParams.init(rng, 3, 5)
        xs = rng.normal(size=(2, 7, 3))
        trace = lstm_forward(p, xs)
        for b in range(2):
            state = LstmState.zeros(5)
            for t in range(7):
                state, o = lstm_step(p, xs[b, t], state)
                np.testing.assert_allclose(trace.outputs[b, t], o, atol=1e-14)

    def test_output_gate_sees_new_cell_state(self):
        p = LstmParams.zeros(1, 1)
        p.W_c[:] = 1.0
        p.b_i[:] = 50.0
        p.V_o[:] = 10.0
        state, o = lstm_step(p, np.array([2.0]), LstmState.zeros(1))
        c = np.tanh(2.0)
        assert state.C[0] == pytest.approx(c, rel=1e-9)
        assert o[0] == pytest.approx(1.0 / (1.0 + np.exp(-10.0 * c)))

    def test_saturated_gates_pass_memory_through(self):
        p = LstmParams.zeros(3, 4)
        p.W_c[:] = make_rng(1).normal(size=p.W_c.shape)
        p.b_f[:] = 50.0
        p.b_i[:] = -50.0
        c = make_rng(2).normal(size=4)
        state = LstmState(C=c.copy(), h=np.zeros(4))
        for x in make_rng(3).normal(size=(5, 3)):
            state, _ = lstm_step(p, x, state)
            np.testing.assert_allclose(state.C, c, atol=1e-12)

    def test_shape_validation(self):
        p = LstmParams.zeros(3, 4)
        with pytest.raises(ValueError):
            lstm_step(p, np.zeros(2), LstmState.zeros(4))
        with pytest.raises(ValueError):
            LstmParams(**{**p.arrays(), "V_o": np.zeros((4, 3))})


class TestHead:
    def test_zero_head_is_uniform(self):
        head = ClassifierHead.zeros(6, 5, 4)
        y = head_scores(head, make_rng(2).normal(size=6))
        np.testing.assert_array_equal(y, np.full(4, 0.25))

    def test_batch_shapes(self):
        head = ClassifierHead.init(make_rng(3), 6, 5, 4)
        y, _ = head.forward(np.zeros((2, 7, 6)))
        assert y.shape == (2, 7, 4)
        np.testing.assert_allclose(y.sum(axis=-1), 1.0)

    def test_closed_form_two_class(self):
        head = ClassifierHead(
            W_1=np.array([[1.0]]), b_1=np.zeros(1), W_2=np.array([[1.0], [-1.0]]), b_2=np.zeros(2)
        )
        y = head_scores(head, np.array([2.0]))
        expected = np.exp([2.0, -2.0]) / np.exp([2.0, -2.0]).sum()
        np.testing.assert_allclose(y, expected, rtol=1e-12)

    def test_negative_hidden_units_are_clamped(self):
        head = ClassifierHead(
            W_1=np.array([[-1.0]]), b_1=np.zeros(1), W_2=np.array([[5.0], [-5.0]]), b_2=np.array([0.0, 1.0])
        )
        y, (_, a1, r, _) = head.forward(np.array([[2.0], [-2.0]]))
        np.testing.assert_array_equal(a1[:, 0], [-2.0, 2.0])
        np.testing.assert_array_equal(r[:, 0], [0.0, 2.0])
        np.testing.assert_allclose(y[0], np.exp([0.0, 1.0]) / np.exp([0.0, 1.0]).sum(), rtol=1e-12)

    def test_wrong_input_dim(self):
        with pytest.raises(ValueError, match="dim"):
            ClassifierHead.zeros(6, 5, 4).forward(np.zeros(5))


class TestPadding:
    @pytest.mark.parametrize("t", range(1, 16))
    def test_matches_naive_rule(self, t):
        k = 7
        flows = [f"flow{i + 1}" for i in range(t)]
        assert pad_flow_sequence(flows, t, k) == _naive_pad(flows, t, k)

    def test_short_prefix_repeats_last_flow(self):
        assert pad_flow_sequence(["a", "b"], 2, 5) == ["a", "b", "b", "b", "b"]

    def test_no_flow(self):
        with pytest.raises(ValueError):
            pad_flow_sequence([], 0, 7)


class TestClassifiers:
    def test_temporal_mean_kernel_averages(self):
        conv = TemporalConvParams.mean(3, 2)
        stack = np.array([[1.0, 3.0], [2.0, 6.0], [3.0, 9.0]])
        np.testing.assert_allclose(conv.collapse(stack), [2.0, 6.0])

    def test_temporal_forward_needs_k_flows(self):
        conv = TemporalConvParams.mean(3, 2)
        with pytest.raises(ValueError, match="exactly 3"):
            temporal_forward(conv, ClassifierHead.zeros(2, 4, 3), [np.zeros(2)] * 2)

    def test_single_item_helpers(self):
        head = ClassifierHead.zeros(4, 3, 5)
        np.testing.assert_allclose(spatial_forward(head, np.ones(4)), 0.2, atol=1e-15)
        seq = np.ones((NUM_REGIONS, 4))
        out = structural_forward(LstmParams.zeros(4, 3), ClassifierHead.zeros(3, 3, 5), seq)
        np.testing.assert_allclose(out, 0.2, atol=1e-15)

    def test_temporal_delta_kernel_selects_first_flow(self):
        flows = list(make_rng(8).normal(size=(3, 4)))
        kernel = np.zeros((3, 4))
        kernel[0] = 1.0
        head = ClassifierHead.init(make_rng(9), 4, 5, 3)
        np.testing.assert_array_equal(TemporalConvParams(kernel).collapse(np.stack(flows)), flows[0])
        out = temporal_forward(TemporalConvParams(kernel), head, flows)
        np.testing.assert_allclose(out, spatial_forward(head, flows[0]))

    def test_temporal_forward_is_channelwise_weighted_sum(self):
        rng = make_rng(3)
        kernel = rng.normal(size=(4, 5))
        flows = list(rng.normal(size=(4, 5)))
        head = ClassifierHead.init(rng, 5, 6, 3)
        collapsed = np.zeros(5)
        for j in range(4):
            for c in range(5):
                collapsed[c] += kernel[j, c] * flows[j][c]
        out = temporal_forward(TemporalConvParams(kernel), head, flows)
        np.testing.assert_allclose(out, spatial_forward(head, collapsed), rtol=1e-12)

    def test_structural_rejects_wrong_length(self):
        model = StructuralModel.init(make_rng(4), 3, 4, 4, 2)
        with pytest.raises(ValueError, match="structural input"):
            model.forward(np.zeros((1, 6, 3)))

    def test_structural_scores_are_step_means(self):
        model = StructuralModel.init(make_rng(5), 3, 4, 4, 3)
        seqs = make_rng(6).normal(size=(2, NUM_REGIONS, 3))
        np.testing.assert_allclose(model.forward(seqs), model.step_scores(seqs).mean(axis=1))


class TestGradients:
    @pytest.mark.parametrize("seed", range(20))
    def test_structural_bptt(self, seed):
        rng = make_rng(seed)
        model = StructuralModel.init(rng, 3, 4, 5, 3)
        for arr in model.params().values():
            arr += rng.normal(0, 0.1, size=arr.shape)
        seqs = rng.normal(size=(2, NUM_REGIONS, 3))
        labels = rng.integers(0, 3, size=2)
        err = grad_check(lambda: model.loss_and_grads(seqs, labels), model.params())
        assert err < 1e-4

    @pytest.mark.parametrize("seed", range(5))
    def test_spatial_and_temporal(self, seed):
        rng = make_rng(100 + seed)
        spatial = SpatialModel.init(rng, 4, 5, 3)
        for arr in spatial.params().values():
            arr += rng.normal(0, 0.1, size=arr.shape)
        x = rng.normal(size=(3, 4))
        labels = rng.integers(0, 3, size=3)
        assert grad_check(lambda: spatial.loss_and_grads(x, labels), spatial.params()) < 1e-4

        temporal = TemporalModel.init(rng, 4, 5, 3, k=3)
        for arr in temporal.params().values():
            arr += rng.normal(0, 0.1, size=arr.shape)
        stacks = rng.normal(size=(3, 3, 4))
        assert grad_check(lambda: temporal.loss_and_grads(stacks, labels), temporal.params()) < 1e-4
