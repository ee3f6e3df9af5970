import json

import pytest

from edgesplit.netgraph import (LayerDesc, NetworkIR, ShapeMismatchError, count_ops,
                                count_params, infer_shapes, network_from_dict,
                                network_from_json, network_to_dict, per_layer_ops,
                                per_layer_params, split_at)
from edgesplit.baselines import load_reference_network


def chain(*layers, in_ch=3, res=224):
    return NetworkIR(tuple(layers), in_ch, res)


def brute_force_conv_macs(k, c_in, c_out, s_out, groups=1):
    """Independent oracle: literally count the multiplies of a convolution."""
    total = 0
    for _ in range(s_out * s_out):
        for _ in range(c_out):
            total += k * k * (c_in // groups)
    return total


class TestInferShapes:
    def test_conv_stride1_keeps_spatial(self):
        net = chain(LayerDesc("Conv", 3, 8, k=1), res=4)
        assert infer_shapes(net) == [((3, 4), (8, 4))]

    def test_mbconv_stride2_hand_trace(self):
        # ceil(112 / 2) = 56
        net = chain(LayerDesc("MBConv", 16, 24, k=3, stride=2, expansion=6.0),
                    in_ch=16, res=112)
        assert infer_shapes(net)[0][1] == (24, 56)

    def test_viewfuse_concatenates_views(self):
        net = chain(LayerDesc("ViewFuse", 6, 72), in_ch=6, res=12)
        assert infer_shapes(net)[0][1] == (72, 12)

    def test_channel_mismatch_rejected_with_layer_index(self):
        net = chain(LayerDesc("Conv", 3, 8, k=1), LayerDesc("Conv", 16, 8, k=1), res=8)
        with pytest.raises(ShapeMismatchError) as err:
            infer_shapes(net)
        assert err.value.layer_index == 1

    def test_residual_requires_identity_shape(self):
        net = chain(LayerDesc("Conv", 3, 8, k=1, residual=True), res=8)
        with pytest.raises(ShapeMismatchError):
            infer_shapes(net)
        net = chain(LayerDesc("Conv", 3, 3, k=3, stride=2, residual=True), res=8)
        with pytest.raises(ShapeMismatchError):
            infer_shapes(net)

    def test_empty_network_rejected(self):
        with pytest.raises(ShapeMismatchError):
            infer_shapes(chain())

    def test_two_viewfuse_rejected(self):
        net = chain(LayerDesc("ViewFuse", 4, 8), LayerDesc("ViewFuse", 8, 16),
                    in_ch=4, res=8)
        with pytest.raises(ShapeMismatchError):
            infer_shapes(net)

    def test_kernel_larger_than_map_rejected(self):
        net = chain(LayerDesc("Conv", 3, 8, k=3), res=2)
        with pytest.raises(ShapeMismatchError):
            infer_shapes(net)


class TestCountOps:
    def test_1x1_conv_against_loop_oracle(self):
        net = chain(LayerDesc("Conv", 3, 8, k=1), res=4)
        assert count_ops(net) == brute_force_conv_macs(1, 3, 8, 4) == 384

    def test_3x3_group_conv_against_loop_oracle(self):
        net = chain(LayerDesc("Conv", 8, 8, k=3, groups=2), in_ch=8, res=6)
        assert count_ops(net) == brute_force_conv_macs(3, 8, 8, 6, groups=2)

    def test_mbconv_sums_three_subconvs(self):
        net = chain(LayerDesc("MBConv", 16, 24, k=3, stride=2, expansion=6.0),
                    in_ch=16, res=112)
        expand = brute_force_conv_macs(1, 16, 96, 112)
        dw = 3 * 3 * 96 * 56 * 56  # depthwise: one filter per channel
        project = brute_force_conv_macs(1, 96, 24, 56)
        assert count_ops(net) == expand + dw + project

    def test_mobilenet_v2_total(self):
        net = load_reference_network("mobilenet_v2")
        assert count_ops(net) == pytest.approx(301e6, rel=0.03)

    def test_empty_tail_counts_zero(self):
        net = load_reference_network("mobilenet_v2")
        _, tail, _ = split_at(net, len(net.layers))
        assert count_ops(tail) == 0

    def test_pool_counts_zero(self):
        net = chain(LayerDesc("Pool", 3, 3, k=0), res=8)
        assert count_ops(net) == 0


class TestCountParams:
    def test_fully_connected_hand_arithmetic(self):
        net = chain(LayerDesc("FullyConnected", 1280, 1000), in_ch=1280, res=1)
        assert count_params(net) == 1280 * 1000 + 1000 == 1_281_000

    def test_unit_conv_three_params(self):
        # one weight plus normalization scale and shift
        net = chain(LayerDesc("Conv", 1, 1, k=1), in_ch=1, res=4)
        assert count_params(net) == 3

    def test_mobilenet_v2_total(self):
        net = load_reference_network("mobilenet_v2")
        assert count_params(net) == pytest.approx(3.51e6, rel=0.03)

    def test_fc_flattens_spatial(self):
        net = chain(LayerDesc("FullyConnected", 512, 10), in_ch=512, res=7)
        assert count_params(net) == 512 * 49 * 10 + 10
        assert count_ops(net) == 512 * 49 * 10


class TestSplitAt:
    def test_index_zero_all_on_aggregator(self):
        net = load_reference_network("mobilenet_v2")
        head, tail, feature = split_at(net, 0)
        assert len(head.layers) == 0
        assert feature == (3, 224)
        assert len(tail.layers) == len(net.layers)

    def test_index_len_logits_boundary(self):
        net = load_reference_network("mobilenet_v2")
        head, tail, feature = split_at(net, len(net.layers))
        assert len(tail.layers) == 0
        assert feature == (1000, 1)

    def test_published_interior_boundary_feature(self):
        # the one lightweight backbone whose best split is mid-network
        net = load_reference_network("mnasnet_1_0")
        shapes = infer_shapes(net)
        boundary = next(i + 1 for i, (_, out) in enumerate(shapes) if out == (80, 14))
        _, _, feature = split_at(net, boundary)
        assert feature == (80, 14)

    def test_out_of_range_rejected(self):
        net = load_reference_network("mobilenet_v2")
        with pytest.raises(IndexError):
            split_at(net, len(net.layers) + 1)
        with pytest.raises(IndexError):
            split_at(net, -1)

    def test_round_trip_and_monotonicity_every_index(self):
        net = load_reference_network("mnasnet_1_0")
        total = count_ops(net)
        previous = -1
        for i in range(len(net.layers) + 1):
            head, tail, feature = split_at(net, i)
            assert head.layers + tail.layers == net.layers
            assert count_ops(head) + count_ops(tail) == total
            assert count_ops(head) >= previous
            previous = count_ops(head)
            if len(tail.layers) > 0:
                assert (tail.input_channels, tail.input_resolution) == feature


class TestJson:
    def test_round_trip(self):
        net = load_reference_network("efficientnet_b0")
        clone = network_from_dict(network_to_dict(net))
        assert clone == net

    def test_field_names_are_contractual(self):
        data = network_to_dict(load_reference_network("mobilenet_v2"))
        assert set(data) == {"input_resolution", "input_channels", "layers"}
        first = data["layers"][0]
        assert {"kind", "in_ch", "out_ch", "k", "stride", "residual"} <= set(first)

    def test_missing_field_names_the_offender(self):
        with pytest.raises(ValueError, match="out_ch"):
            network_from_json(json.dumps({
                "input_resolution": 8, "input_channels": 3,
                "layers": [{"kind": "Conv", "in_ch": 3, "k": 1, "stride": 1}],
            }))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            network_from_dict({
                "input_resolution": 8, "input_channels": 3,
                "layers": [{"kind": "Attention", "in_ch": 3, "out_ch": 3,
                            "k": 1, "stride": 1}],
            })

    def test_per_layer_breakdowns_sum_to_totals(self):
        net = load_reference_network("resnet152")
        assert sum(per_layer_ops(net)) == count_ops(net)
        assert sum(per_layer_params(net)) == count_params(net)
