import math

import pytest

from edgesplit.hwmodel import (COST_CSV_HEADER, DEFAULT_MULTI_VIEW_HW,
                               DEFAULT_SINGLE_VIEW_HW, HardwareConfig, comm_latency,
                               compute_latency, cost_csv_row, evaluate,
                               hardware_from_dict, hardware_to_dict, peak_memory)
from edgesplit.netgraph import LayerDesc, NetworkIR, ShapeMismatchError, split_at
from edgesplit.baselines import load_reference_network

HW1 = DEFAULT_SINGLE_VIEW_HW
HW12 = DEFAULT_MULTI_VIEW_HW


class TestComputeLatency:
    def test_large_model_on_aggregator(self):
        # 11.5 GOP on the 1.25 TOP/s aggregator
        assert compute_latency(11.5e9, 1.25e12) == pytest.approx(9.21e-3, rel=0.02)

    def test_mobile_model_on_sensor(self):
        assert compute_latency(386e6, 125e9) == pytest.approx(3.09e-3, rel=0.01)

    def test_zero_ops(self):
        assert compute_latency(0, 125e9) == 0.0

    def test_positive_throughput_required(self):
        with pytest.raises(ValueError):
            compute_latency(1.0, 0.0)


class TestCommLatency:
    def test_raw_image_four_sensors(self):
        # 150528 B over a 37.5 MB/s slice of the shared bus
        assert comm_latency((3, 224), HW1) == pytest.approx(4.014e-3, rel=0.001)

    def test_deep_feature_twelve_sensors(self):
        assert comm_latency((512, 7), HW12) == pytest.approx(25088 / 12.5e6, rel=1e-9)
        assert comm_latency((512, 7), HW12) == pytest.approx(2.00e-3, rel=0.01)

    def test_compressed_feature_twelve_sensors(self):
        assert comm_latency((16, 6), HW12) == pytest.approx(0.0461e-3, rel=0.01)

    def test_linear_in_views_and_act_bits(self):
        base = comm_latency((32, 14), HW1)
        for v in (1, 2, 3, 8):
            hw = HardwareConfig(num_sensors=v)
            assert comm_latency((32, 14), hw) == pytest.approx(base * v / 4)
        for bits in (4, 8, 16, 32):
            hw = HardwareConfig(act_bits=bits)
            assert comm_latency((32, 14), hw) == pytest.approx(base * bits / 8)


class TestPeakMemory:
    def test_mobilenet_v2_full_network(self):
        net = load_reference_network("mobilenet_v2")
        assert peak_memory(net, HW1) == pytest.approx(5.90e6, rel=0.10)

    def test_distilled_head(self):
        head = load_reference_network("head_distill_resnet152_head")
        assert peak_memory(head, HW1) == pytest.approx(0.82e6, rel=0.10)

    def test_empty_head(self):
        assert peak_memory(NetworkIR((), 3, 224), HW1) == 0.0

    def test_monotone_under_appending(self):
        net = load_reference_network("mnasnet_1_0")
        previous = 0.0
        for i in range(len(net.layers) + 1):
            head, _, _ = split_at(net, i)
            peak = peak_memory(head, HW1)
            assert peak >= previous
            previous = peak

    def test_weights_plus_activations_decomposition(self):
        # one 1x1 conv: weights 8*4+8, live set input+output
        net = NetworkIR((LayerDesc("Conv", 4, 8, k=1),), 4, 10)
        expected = (4 * 8 + 2 * 8) + (4 * 100 + 8 * 100)
        assert peak_memory(net, HW1) == expected

    def test_stride2_depthwise_output_buffered_at_input_resolution(self):
        dw1 = NetworkIR((LayerDesc("DepthwiseConv", 8, 8, k=3, stride=1),), 8, 16)
        dw2 = NetworkIR((LayerDesc("DepthwiseConv", 8, 8, k=3, stride=2),), 8, 16)
        # both charge in + out with out allocated at the input grid
        assert peak_memory(dw1, HW1) == peak_memory(dw2, HW1)

    def test_residual_block_holds_skip_tensor(self):
        plain = NetworkIR((LayerDesc("MBConv", 8, 8, k=3, expansion=4.0),), 8, 10)
        skip = NetworkIR((LayerDesc("MBConv", 8, 8, k=3, expansion=4.0, residual=True),), 8, 10)
        assert peak_memory(skip, HW1) == peak_memory(plain, HW1) + 8 * 100


class TestEvaluate:
    def test_all_on_aggregator_mobilenet_v2(self):
        net = load_reference_network("mobilenet_v2")
        head, tail, _ = split_at(net, 0)
        report = evaluate(head, tail, HW1)
        assert report.overall == pytest.approx(4.25e-3, rel=0.01)
        assert report.t_sen == 0.0
        assert report.mem_ok

    def test_multiview_searched_small_row(self):
        from edgesplit.baselines import fixture_path
        from edgesplit.splitspace import (load_descriptor, load_space, materialize,
                                          split_boundary)
        space = load_space(fixture_path("space/multi_view_default.json"))
        desc = load_descriptor(fixture_path("descriptor/searched_multiview_small.json"))
        net = materialize(space, desc)
        head, tail, _ = split_at(net, split_boundary(space, desc))
        report = evaluate(head, tail, HW12, deployment="multi")
        assert report.overall == pytest.approx(0.39e-3, rel=0.10)

    def test_zero_layer_network_all_zero(self):
        empty = NetworkIR((), 3, 224)
        report = evaluate(empty, empty, HW1)
        assert report.overall == report.t_sen == report.t_comm == report.t_agg == 0.0
        assert report.mem_ok

    def test_sum_exactness(self):
        net = load_reference_network("efficientnet_b0")
        for i in (0, 3, 7, len(net.layers)):
            head, tail, _ = split_at(net, i)
            report = evaluate(head, tail, HW1)
            assert report.overall == report.t_sen + report.t_comm + report.t_agg

    def test_head_tail_shape_mismatch_rejected(self):
        net = load_reference_network("mobilenet_v2")
        head, _, _ = split_at(net, 3)
        _, tail, _ = split_at(net, 5)
        with pytest.raises(ShapeMismatchError):
            evaluate(head, tail, HW1)

    def test_multiview_tail_replays_per_view_layers(self):
        net = load_reference_network("vgg11_multiview")
        head, tail, _ = split_at(net, 0)
        report = evaluate(head, tail, HW12, deployment="multi")
        # aggregator runs all 12 views' backbones plus the fused classifier
        from edgesplit.netgraph import count_ops, per_layer_ops
        fuse = next(i for i, l in enumerate(net.layers) if l.kind == "ViewFuse")
        ops = per_layer_ops(net)
        assert report.tail_ops == 12 * sum(ops[:fuse]) + sum(ops[fuse:])
        assert report.t_agg == pytest.approx(73.2e-3, rel=0.05)

    def test_viewfuse_on_sensor_rejected(self):
        net = load_reference_network("vgg11_multiview")
        fuse = next(i for i, l in enumerate(net.layers) if l.kind == "ViewFuse")
        head, tail, _ = split_at(net, fuse + 1)
        with pytest.raises(ShapeMismatchError):
            evaluate(head, tail, HW12, deployment="multi")

    def test_view_count_must_match_hardware(self):
        net = load_reference_network("vgg11_multiview")
        head, tail, _ = split_at(net, 0)
        with pytest.raises(ShapeMismatchError):
            evaluate(head, tail, HW1, deployment="multi")

    def test_all_on_sensor_ships_logit_bytes(self):
        net = load_reference_network("mobilenet_v2")
        head, tail, _ = split_at(net, len(net.layers))
        report = evaluate(head, tail, HW1)
        assert report.comm_bytes == 1000.0
        assert report.t_comm == pytest.approx(1000 / 37.5e6)


class TestSerialization:
    def test_hardware_round_trip(self):
        clone = hardware_from_dict(hardware_to_dict(HW12))
        assert clone == HW12

    def test_hardware_unknown_field_rejected(self):
        with pytest.raises(ValueError, match="frequency"):
            hardware_from_dict({"comp_sen": 1.0, "frequency": 2.0})

    def test_hardware_validation(self):
        with pytest.raises(ValueError):
            HardwareConfig(comp_sen=-1)
        with pytest.raises(ValueError):
            HardwareConfig(num_sensors=0)

    def test_csv_row_column_order(self):
        net = load_reference_network("mobilenet_v2")
        head, tail, _ = split_at(net, 0)
        report = evaluate(head, tail, HW1)
        assert COST_CSV_HEADER.split(",") == [
            "t_sen_ms", "t_comm_ms", "t_agg_ms", "overall_ms", "peak_mem_bytes",
            "head_ops", "tail_ops", "comm_bytes", "mem_ok"]
        row = cost_csv_row(report).split(",")
        assert len(row) == 9
        assert float(row[3]) == pytest.approx(report.overall * 1e3)
        assert row[8] == "1"
