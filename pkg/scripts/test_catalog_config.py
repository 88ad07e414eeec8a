#!/usr/bin/env python3
"""
Problem files, run configuration resolution and report writers.
"""

import json
import math

import pandas as pd
import pytest

from config.paths import LSIP_SETTINGS
from lib.catalog import (
    build_function, build_lsip, build_map, build_subdifferential, function_problem, list_problems,
    load_problem, map_problem, problem_from_dict,
)
from lib.errors import UsageError
from lib.jsonl_utils import load_jsonl, save_jsonl, to_jsonable, write_json, write_scale_csv
from lib.run_config import load_run_config


class TestProblemFiles:

    def test_invalid_json_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"kind": "function",\n "xbar": [0,]}', encoding='utf-8')
        with pytest.raises(UsageError, match=r"line 2, column"):
            load_problem(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError, match="not found"):
            load_problem(tmp_path / "absent.json")

    def test_unknown_kind(self):
        with pytest.raises(UsageError):
            problem_from_dict({'kind': 'game'})

    def test_non_object(self):
        with pytest.raises(UsageError):
            problem_from_dict([1, 2])

    def test_bundled_problems_all_parse(self, problems_dir):
        names = {spec.name for spec in list_problems(problems_dir)}
        assert {'power2', 'epigraph_x2', 'semicircle', 'power_penalty_domain', 'box_corner'} <= names

    def test_function_problem(self, problems_dir):
        f, xbar = function_problem(load_problem(problems_dir / "power2.json"))
        assert f(3.0) == pytest.approx(9.0)
        assert xbar.tolist() == [0.0]

    def test_map_problem_base(self, problems_dir):
        F, base = map_problem(load_problem(problems_dir / "epigraph_x2.json"))
        assert (F.n, F.m) == (1, 1)
        assert base.tolist() == [0.0, 0.0]

    def test_wrong_kind(self, problems_dir):
        with pytest.raises(UsageError, match="expected a map problem"):
            map_problem(load_problem(problems_dir / "power2.json"))


class TestFamilies:

    def test_integer_power_only(self):
        with pytest.raises(UsageError):
            build_function({'family': 'power', 'alpha': 1.5})

    def test_abs_power_is_even(self):
        f = build_function({'family': 'abs_power', 'alpha': 1.5})
        assert f(-4.0) == pytest.approx(8.0)

    def test_domain_power(self):
        f = build_function({'family': 'domain_power', 'alpha': 0.5})
        assert f(-1.0) == math.inf
        assert f(4.0) == pytest.approx(2.0)

    def test_odd_power_sublevel(self):
        f = build_function({'family': 'power', 'alpha': 3})
        assert f.sublevel(8.0).intervals.tolist() == [[-math.inf, pytest.approx(2.0)]]

    def test_domain_box(self):
        f = build_function({'family': 'linear', 'a': [1.0, 1.0], 'domain': [[0, None], [0, None]]}, 2)
        assert f([1.0, -1.0]) == math.inf
        assert f([1.0, 2.0]) == pytest.approx(3.0)

    def test_bad_domain_box(self):
        with pytest.raises(UsageError):
            build_function({'family': 'abs', 'domain': [[1.0, 0.0]]})

    def test_unknown_family(self):
        with pytest.raises(UsageError):
            build_function({'family': 'sinc'})

    def test_max_affine(self):
        f = build_function({'family': 'max_affine', 'pieces': [[[1.0], 0.0], [[-2.0], 0.0]]})
        assert f(-1.0) == pytest.approx(2.0)

    def test_sum_terms(self):
        f = build_function({'family': 'sum', 'terms': [{'family': 'abs'}, {'family': 'power', 'alpha': 2}]})
        assert f(2.0) == pytest.approx(6.0)

    def test_closed_form_subdifferential(self):
        sub = build_subdifferential({'family': 'abs'})
        assert sub.bounds(0.0) == (-1.0, 1.0)
        assert sub.bounds(-3.0) == (-1.0, -1.0)

    def test_domain_power_subdifferential_is_empty_off_domain(self):
        sub = build_subdifferential({'family': 'domain_power', 'alpha': 2.5})
        assert sub([-0.5]).is_empty
        assert sub.is_monotone()

    def test_explicit_linear_graph(self):
        F = build_map({'family': 'explicit_graph', 'rule': 'linear', 'matrix': [[2.0]]})
        assert F([1.5]).points[0, 0] == pytest.approx(3.0)

    def test_unknown_map_family(self):
        with pytest.raises(UsageError):
            build_map({'family': 'spiral'})


class TestLsipFiles:

    def test_parametric(self, problems_dir):
        problem = build_lsip(load_problem(problems_dir / "semicircle.json"))
        assert problem.N == 720 and problem.family.periodic
        assert problem.xbar.tolist() == [-1.0, 0.0]

    def test_grid_size_defaults_to_the_lsip_settings(self, monkeypatch):
        monkeypatch.setitem(LSIP_SETTINGS, 'default_N', 90)
        spec = problem_from_dict({'kind': 'lsip', 'n': 2, 'c': [1, 0],
                                  'family': {'kind': 'parametric', 'curve': 'circle'}})
        assert build_lsip(spec).N == 90

    @pytest.mark.parametrize("N", [1, 2.5, True, "720"])
    def test_bad_grid_size(self, N):
        spec = problem_from_dict({'kind': 'lsip', 'n': 2, 'c': [1, 0], 'N': N,
                                  'family': {'kind': 'parametric', 'curve': 'circle'}})
        with pytest.raises(UsageError):
            build_lsip(spec)

    def test_empty_finite_rows(self):
        spec = problem_from_dict({'kind': 'lsip', 'n': 1, 'c': [1], 'family': {'kind': 'finite', 'rows': []}})
        with pytest.raises(UsageError):
            build_lsip(spec)

    def test_unknown_family_kind(self):
        spec = problem_from_dict({'kind': 'lsip', 'n': 1, 'c': [1], 'family': {'kind': 'cone'}})
        with pytest.raises(UsageError):
            build_lsip(spec)


class TestRunConfig:

    def test_defaults(self, tmp_path):
        config = load_run_config(base_file=None)
        assert config.ladder_K == 20 and config.grid_size == 64
        assert len(config.ladder()) == 20

    def test_user_file_then_overrides(self, tmp_path):
        user = tmp_path / "user.json"
        user.write_text(json.dumps({'ladder_K': 8, 'parallel': 2}), encoding='utf-8')
        config = load_run_config(str(user), overrides={'parallel': 4, 'seed': None}, base_file=None)
        assert config.ladder_K == 8
        assert config.parallel == 4
        assert config.seed == 0

    def test_environment_variable(self, tmp_path, monkeypatch):
        user = tmp_path / "env.json"
        user.write_text(json.dumps({'grid_size': 16}), encoding='utf-8')
        monkeypatch.setenv("HOLDERREG_CONFIG", str(user))
        assert load_run_config(base_file=None).grid_size == 16

    def test_explicit_path_beats_environment(self, tmp_path, monkeypatch):
        env_file = tmp_path / "env.json"
        env_file.write_text(json.dumps({'grid_size': 16}), encoding='utf-8')
        cli_file = tmp_path / "cli.json"
        cli_file.write_text(json.dumps({'grid_size': 32}), encoding='utf-8')
        monkeypatch.setenv("HOLDERREG_CONFIG", str(env_file))
        assert load_run_config(str(cli_file), base_file=None).grid_size == 32

    def test_unknown_keys_are_ignored(self, tmp_path, caplog):
        user = tmp_path / "user.json"
        user.write_text(json.dumps({'colour': 'blue'}), encoding='utf-8')
        with caplog.at_level("WARNING"):
            load_run_config(str(user), base_file=None)
        assert "colour" in caplog.text

    @pytest.mark.parametrize("key, value", [('eps_pos', 0.0), ('ladder_K', 0), ('ladder_K', 1), ('radii_K', 1),
                                            ('seed', -1)])
    def test_invalid_values(self, key, value):
        with pytest.raises(UsageError):
            load_run_config(overrides={key: value}, base_file=None)

    def test_bad_ladder_ratio(self):
        config = load_run_config(overrides={'ladder_theta': 1.5}, base_file=None)
        with pytest.raises(UsageError):
            config.ladder()

    def test_missing_user_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_run_config(str(tmp_path / "nope.json"), base_file=None)


class TestReportWriters:

    def test_infinities_become_strings(self):
        data = to_jsonable({'a': math.inf, 'b': [-math.inf, 1.5], 'c': math.nan})
        assert data == {'a': "inf", 'b': ["-inf", 1.5], 'c': "nan"}

    def test_write_json_with_meta(self, tmp_path):
        path = write_json({'value': math.inf}, tmp_path / "report.json")
        assert json.loads(path.read_text(encoding='utf-8')) == {'value': "inf"}
        meta = json.loads((tmp_path / "report.meta.json").read_text(encoding='utf-8'))
        assert meta['report'] == "report.json" and 'written_at' in meta

    def test_report_body_is_deterministic(self, tmp_path):
        first = write_json({'x': [1.0, 2.0]}, tmp_path / "a.json").read_bytes()
        second = write_json({'x': [1.0, 2.0]}, tmp_path / "b.json").read_bytes()
        assert first == second

    def test_scale_csv(self, tmp_path):
        path = write_scale_csv([(0, 0.1, 1.0 / 3.0), (1, 0.05, math.inf)], tmp_path / "trace.csv")
        raw = path.read_bytes()
        assert raw.startswith(b"direction_index,t,value\n")
        assert b"\r\n" not in raw
        frame = pd.read_csv(path)
        assert frame['value'][0] == 1.0 / 3.0
        assert frame['value'][1] == math.inf

    def test_jsonl_round_trip(self, tmp_path):
        records = [{'property': 'P1', 'pass': True}, {'property': 'P2', 'value': math.inf}]
        save_jsonl(records, tmp_path / "results.jsonl")
        loaded = load_jsonl(tmp_path / "results.jsonl")
        assert loaded[1]['value'] == "inf"
        assert load_jsonl(tmp_path / "missing.jsonl") == []

    def test_malformed_jsonl_line(self, tmp_path):
        path = tmp_path / "results.jsonl"
        path.write_text('{"property_id": "a", "pass": true}\n\n{"property_id": \n', encoding='utf-8')
        with pytest.raises(UsageError, match="line 3"):
            load_jsonl(path)
