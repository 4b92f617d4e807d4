import numpy as np
import pytest

from fuzzycfg.fuzzy import FuzzyRelation
from fuzzycfg.modelio import (
    BlockLayout,
    ModelParseError,
    fixture_model,
    layout_matrix,
    load_fixture,
    parse_model,
    render_result,
    reorder_blocks,
    result_from_dict,
    result_to_dict,
    serialize_model,
)
from fuzzycfg.pipeline import run_configuration

MINIMAL = """
format_version: 1
communities:
  functions:
    - {id: F1}
    - {id: F2}
  solutions:
    - {id: a1, function: F1, evaluation: 0.9}
    - {id: a2, function: F1, evaluation: 0.5}
    - {id: b1, function: F2, evaluation: 0.8}
"""


class TestParsing:
    def test_minimal_document(self):
        model = parse_model(MINIMAL)
        assert model.function_ids() == ["F1", "F2"]
        assert model.solutions[0].evaluation == 0.9
        assert model.rf is None and model.cs == {}

    def test_sparse_relation(self):
        text = MINIMAL + """
  requirements:
    - {id: R1}
relations:
  requirements_functions:
    default: 1.0
    cells:
      - [R1, F2, 0.3]
"""
        model = parse_model(text)
        assert model.rf.at("R1", "F1") == 1.0
        assert model.rf.at("R1", "F2") == 0.3

    def test_identity_internal_with_overrides(self):
        text = MINIMAL + """
internal_relations:
  functions:
    identity: true
    overrides:
      - [F1, F2, 1.0]
"""
        model = parse_model(text)
        rel = model.internal["functions"]
        assert rel.at("F1", "F2") == 1.0
        assert rel.at("F2", "F1") == 0.0
        assert rel.at("F1", "F1") == 1.0

    def test_out_of_range_entry_is_located(self):
        text = MINIMAL.replace("evaluation: 0.9", "evaluation: 1.5")
        with pytest.raises(ModelParseError) as exc:
            parse_model(text)
        assert any("1.5" in str(i) and "a1" in str(i) for i in exc.value.issues)

    def test_syntax_error_reports_line(self):
        with pytest.raises(ModelParseError) as exc:
            parse_model("communities:\n  functions: [\n")
        assert "syntax error" in str(exc.value.issues[0])
        assert exc.value.issues[0].line is not None

    def test_empty_document_rejected(self):
        with pytest.raises(ModelParseError, match="no communities"):
            parse_model("format_version: 1\n")

    def test_wrong_format_version(self):
        with pytest.raises(ModelParseError, match="format_version"):
            parse_model(MINIMAL.replace("format_version: 1", "format_version: 99"))

    def test_dangling_solution_slot_rejected(self):
        text = MINIMAL.replace("function: F2", "function: F9")
        with pytest.raises(ModelParseError, match="unknown function slot"):
            parse_model(text)

    def test_entries_shape_mismatch(self):
        text = MINIMAL + """
  requirements:
    - {id: R1}
relations:
  requirements_functions:
    entries: [[0.5]]
"""
        with pytest.raises(ModelParseError, match="shape"):
            parse_model(text)


class TestRoundTrip:
    def test_minimal_round_trip(self):
        model = parse_model(MINIMAL)
        assert parse_model(serialize_model(model)) == model

    def test_fixture_round_trips(self):
        for name in ("conveyor", "conveyor_tie"):
            model = fixture_model(name)
            assert parse_model(serialize_model(model)) == model


class TestFixtures:
    def test_conveyor_cardinalities(self):
        model = fixture_model("conveyor")
        assert len(model.requirements) == 24
        assert len(model.functions) == 14
        assert len(model.solutions) == 29

    def test_conveyor_slot_evaluations(self):
        model = fixture_model("conveyor")
        evals = {s.id: s.evaluation for s in model.solutions}
        assert evals["S1"] == 1.0 and evals["S2"] == 1.0 and evals["S9"] == 1.0
        assert evals["S12"] == 0.9 and evals["S13"] == 0.6 and evals["S14"] == 0.6
        assert evals["S28"] == 0.9 and evals["S29"] == 0.6
        slots = model.slot_solutions()
        assert slots["F8"] == ["S12", "S13", "S14"]
        assert slots["F13"] == ["S25", "S26", "S27"]
        assert slots["F14"] == ["S28", "S29"]

    def test_tie_fixture_declares_generalization_inputs(self):
        model = fixture_model("conveyor_tie")
        assert model.options.generalized
        assert model.internal["requirements"].at("R1", "R2") == 1.0
        assert model.cs["expert-review"].at("CE1", "S14") == 0.3
        assert model.rf.at("R1", "F8") == 1.0 and model.rf.at("R2", "F8") == 0.2

    def test_unknown_fixture_name(self):
        with pytest.raises(FileNotFoundError):
            load_fixture("nope")


class TestRendering:
    HEAD = "  S1 S2 S3 S5 S7 S9 S10 S12 S15 S18 S20 S23 S25 S28   (score 0.921429)"

    def test_conveyor_table_head(self):
        result = run_configuration(fixture_model("conveyor"))
        lines = render_result(result).splitlines()
        assert lines[0] == "Optimal configurations:"
        assert lines[1] == self.HEAD

    def test_tie_fixture_lists_four_optima(self):
        result = run_configuration(fixture_model("conveyor_tie"))
        lines = render_result(result).splitlines()
        rows = [l for l in lines[1:5]]
        assert len({r for r in rows}) == 4
        assert all("(score 0.878571)" in r for r in rows)

    def test_structured_round_trip(self):
        result = run_configuration(fixture_model("conveyor"))
        doc = result_to_dict(result)
        back = result_from_dict(doc)
        assert back.core() == result.core()

    def test_single_candidate_note(self):
        result = run_configuration(
            parse_model(
                """
format_version: 1
communities:
  functions: [{id: F1}]
  solutions: [{id: a1, function: F1, evaluation: 0.9}]
"""
            )
        )
        assert "omitted (single candidate" in render_result(result)

    def test_unknown_format_rejected(self):
        result = run_configuration(parse_model(MINIMAL))
        with pytest.raises(ValueError, match="unknown format"):
            render_result(result, format="csv")


class TestBlockLayout:
    def _outcome(self):
        from fuzzycfg.consensus import co_cluster

        sols = ["s1", "s2", "s3", "s4"]
        cfgs = ["g1", "g2", "g3", "g4"]
        arr = np.zeros((4, 4))
        arr[:2, :2] = 1.0
        arr[2:, 2:] = 1.0
        mu = FuzzyRelation(tuple(sols), tuple(cfgs), arr)
        return mu, co_cluster(sols, cfgs, mu)

    def test_blocks_are_contiguous_and_cover_everything(self):
        mu, outcome = self._outcome()
        layout = reorder_blocks(mu, outcome)
        assert sorted(layout.row_order) == sorted(mu.rows)
        assert sorted(layout.col_order) == sorted(mu.cols)
        ends = [span[0][1] for span in layout.block_spans]
        starts = [span[0][0] for span in layout.block_spans]
        assert starts == [0] + ends[:-1]

    def test_perfect_blocks_reorder_to_block_diagonal(self):
        mu, outcome = self._outcome()
        layout = reorder_blocks(mu, outcome)
        arr = layout_matrix(mu, layout)
        for (r0, r1), (c0, c1) in layout.block_spans:
            assert np.all(arr[r0:r1, c0:c1] == 1.0)
        mask = np.ones_like(arr, dtype=bool)
        for (r0, r1), (c0, c1) in layout.block_spans:
            mask[r0:r1, c0:c1] = False
        assert np.all(arr[mask] == 0.0)

    def test_partition_must_cover_columns(self):
        from fuzzycfg.consensus import ConsensusError

        mu, outcome = self._outcome()
        wider = FuzzyRelation(
            mu.rows, mu.cols + ("g5",), np.hstack([mu.entries, np.zeros((4, 1))])
        )
        with pytest.raises(ConsensusError, match="columns"):
            reorder_blocks(wider, outcome)
