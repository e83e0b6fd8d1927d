import numpy as np
import pytest

from dmdgp import (
    DmdgpInstance,
    ParseError,
    demo7_edges,
    demo7_instance,
    extract_internal,
    generate,
    generate_from_topology,
    parse_document,
    parse_instance,
    penalty,
    random_internal_coords,
    realize,
    serialize_instance,
    validate,
)
from dmdgp.instance import MAX_DISTANCE, MIN_PAIR_DISTANCE, clique_pairs


def small_edges(n=4, **overrides):
    """A valid clique-only 4-vertex edge dict to perturb in tests."""
    inst, _ = generate(n, seed=11, long_edge_prob=0.0)
    edges = dict(inst.edges)
    edges.update(overrides)
    return edges


class TestConstruction:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            DmdgpInstance(4, {(2, 2): 1.0})

    def test_non_positive_weight_rejected(self):
        with pytest.raises(ValueError, match="non-positive"):
            DmdgpInstance(4, {(1, 2): -1.0})

    def test_out_of_range_vertex_rejected(self):
        with pytest.raises(ValueError, match="outside vertex range"):
            DmdgpInstance(4, {(1, 5): 1.0})

    def test_n_below_four_rejected(self):
        with pytest.raises(ValueError, match=">= 4"):
            DmdgpInstance(3, {})

    def test_edges_are_read_only(self):
        inst = DmdgpInstance(4, small_edges())
        with pytest.raises(TypeError):
            inst.edges[(1, 2)] = 2.0


class TestParse:
    def test_demo_document_shape(self):
        inst, gt = demo7_instance()
        text = serialize_instance(inst, gt)
        parsed = parse_instance(text)
        assert parsed.n == 7
        assert len(parsed.edges) == 16

    def test_invalid_json_reports_position(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_instance("{not json")

    def test_self_loop_document(self):
        with pytest.raises(ParseError, match="self-loop"):
            parse_instance('{"n": 4, "edges": [[2, 2, 1.0]]}')

    def test_reversed_endpoints_document(self):
        with pytest.raises(ParseError, match="u < v"):
            parse_instance('{"n": 4, "edges": [[3, 1, 1.0]]}')

    def test_negative_weight_document(self):
        with pytest.raises(ParseError, match="non-positive"):
            parse_instance('{"n": 4, "edges": [[1, 2, -1.0]]}')

    def test_duplicate_edge_document(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_instance('{"n": 4, "edges": [[1, 2, 1.0], [1, 2, 1.5]]}')

    def test_missing_field(self):
        with pytest.raises(ParseError, match="missing required field"):
            parse_instance('{"n": 4}')

    def test_bad_ground_truth_bits(self):
        inst, gt = generate(5, 1, 0.0)
        text = serialize_instance(inst, gt).replace('"bits": "', '"bits": "zz')
        with pytest.raises(ParseError):
            parse_document(text)


class TestRoundTrip:
    @pytest.mark.parametrize("n,seed,p", [(4, 0, 0.0), (7, 42, 1.0), (9, 3, 0.5)])
    def test_serialize_parse_identity(self, n, seed, p):
        inst, gt = generate(n, seed, p)
        text = serialize_instance(inst, gt)
        inst2, gt2 = parse_document(text)
        assert inst2 == inst
        assert gt2.bits == gt.bits
        assert np.array_equal(gt2.conformation.points, gt.conformation.points)
        assert serialize_instance(inst2, gt2) == text

    def test_weights_lossless(self):
        inst, _ = generate(8, 17, 0.7)
        inst2 = parse_instance(serialize_instance(inst))
        for key, w in inst.edges.items():
            assert inst2.edges[key] == w  # exact, not approximate

    def test_generate_is_deterministic(self):
        a = serialize_instance(*generate(7, 42, 1.0))
        b = serialize_instance(*generate(7, 42, 1.0))
        assert a == b


class TestValidate:
    def test_generated_instances_validate(self):
        for seed in range(5):
            inst, _ = generate(7, seed, 0.5)
            assert validate(inst).ok

    def test_missing_clique_edge(self):
        inst, _ = generate(7, 1, 0.0)
        edges = dict(inst.edges)
        del edges[(1, 4)]
        report = validate(DmdgpInstance(7, edges))
        assert not report.ok
        assert any(v.rule == "clique" and "i=4" in v.message for v in report.violations)

    def test_degenerate_triangle(self):
        edges = small_edges(4)
        edges[(1, 2)], edges[(2, 3)], edges[(1, 3)] = 2.0, 3.0, 5.0
        report = validate(DmdgpInstance(4, edges))
        assert not report.ok
        assert any(
            v.rule == "triangle" and "i=4" in v.message for v in report.violations
        )

    def test_weight_over_ceiling(self):
        edges = small_edges(4)
        edges[(1, 4)] = 6.5
        report = validate(DmdgpInstance(4, edges))
        assert any(v.rule == "weight-ceiling" for v in report.violations)

    def test_report_consistency(self):
        inst, _ = generate(6, 2, 0.3)
        report = validate(inst)
        assert report.ok == (len(report.violations) == 0)


class TestGenerate:
    def test_ground_truth_penalty_tiny(self):
        for n, seed in [(4, 0), (7, 42), (12, 9)]:
            inst, gt = generate(n, seed, 0.8)
            assert penalty(gt.conformation, inst) < 1e-10

    def test_weight_window(self):
        for seed in range(8):
            inst, _ = generate(9, seed, 1.0)
            for _, _, d in inst.edge_list():
                assert MIN_PAIR_DISTANCE <= d <= MAX_DISTANCE

    def test_n4_has_exactly_clique_edges(self):
        inst, _ = generate(4, 123, 1.0)
        assert sorted(inst.edges) == clique_pairs(4)

    def test_p_zero_gives_clique_only(self):
        inst, _ = generate(7, 7, 0.0)
        assert sorted(inst.edges) == clique_pairs(7)

    def test_ground_bits_match_drawn_signs(self):
        ic, bits = random_internal_coords(9, 55)
        inst, gt = generate(9, 55, 0.4)
        assert gt.bits == bits
        ext = extract_internal(inst)
        assert np.allclose(ext.bonds, ic.bonds, atol=1e-9)
        assert np.allclose(ext.angles, ic.angles, atol=1e-9)
        assert np.allclose(ext.torsion_cosines, ic.torsion_cosines, atol=1e-9)

    def test_realizing_ground_bits_recovers_conformation(self):
        inst, gt = generate(8, 21, 0.6)
        conf = realize(extract_internal(inst), gt.bits)
        assert np.allclose(conf.points, gt.conformation.points, atol=1e-9)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            generate(3, 0, 0.5)
        with pytest.raises(ValueError):
            generate(5, 0, 1.5)


class TestGenerateFromTopology:
    def test_demo_topology_has_16_edges(self):
        assert len(demo7_edges()) == 16
        inst, gt = demo7_instance()
        assert len(inst.edges) == 16
        assert gt.bits == "0101"
        assert validate(inst).ok

    def test_only_listed_edges_emitted(self):
        inst, _ = generate_from_topology(demo7_edges(), "0000", seed=1)
        assert sorted(inst.edges) == sorted(demo7_edges())

    def test_missing_clique_pair_rejected(self):
        edges = [e for e in demo7_edges() if e != (2, 5)]
        with pytest.raises(ValueError, match="missing clique"):
            generate_from_topology(edges, "0101", seed=1)

    def test_ground_truth_consistent(self):
        inst, gt = generate_from_topology(demo7_edges(), "1100", seed=9)
        assert penalty(gt.conformation, inst) < 1e-10
        assert validate(inst).ok
