import json
from pathlib import Path

import pytest

from patchbench import harness, llm, replay
from patchbench.benchmarks import BENCHMARKS, CATEGORIES
from patchbench.harness import (
    ConfigError,
    EvalCounts,
    GenerationSample,
    RatingError,
    RatingRecord,
    load_config,
    merge_ratings,
    resolve_ratings,
    stable_seed,
)


def mini_corpus(tmp_path, benchmarks=("additive", "church-bell"), n=4):
    """A scaled-down replay corpus for fast harness tests."""
    dest = tmp_path / "corpus"
    full = replay.build_replay_corpus(dest)
    config = harness.RunConfig(
        categories=list(replay.CORPUS_CATEGORIES),
        benchmarks=list(benchmarks),
        n=n,
        k=[1, 3],
        mode="replay",
        seed=replay.CORPUS_SEED,
        workers=2,
        cache_dir=full.cache_dir,
    )
    return config


@pytest.fixture(scope="module")
def mini_run(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("mini")
    config = mini_corpus(tmp_path)
    runs_root = tmp_path / "runs"
    report = harness.run_experiment(config, runs_root=runs_root)
    return config, runs_root / config.run_id, report


class TestConfig:
    def test_unknown_category(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["klingon"], "n": 5})

    def test_unknown_benchmark(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["patchscript"], "benchmarks": ["tuba"]})

    def test_zero_n(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["patchscript"], "n": 0})

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["patchscript"], "mode": "psychic"})

    def test_k_beyond_n(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["patchscript"], "n": 2, "k": [1, 3]})

    def test_external_route_requires_runner(self):
        with pytest.raises(ConfigError):
            load_config({"categories": ["external-metaprog"]})

    def test_benchmarks_default_to_all(self):
        config = load_config({"categories": ["patchscript"]})
        assert config.benchmarks == list(BENCHMARKS)

    def test_run_id_is_derived_and_stable(self):
        a = load_config({"categories": ["patchscript"], "seed": 5})
        b = load_config({"categories": ["patchscript"], "seed": 5})
        c = load_config({"categories": ["patchscript"], "seed": 6})
        assert a.run_id == b.run_id != c.run_id

    def test_file_round_trip(self, tmp_path):
        config = mini_corpus(tmp_path)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config.to_json()))
        loaded = load_config(path)
        assert loaded.run_id == config.run_id
        assert loaded.categories == config.categories

    def test_model_env_var_is_default(self, monkeypatch):
        monkeypatch.setenv("LLM_MODEL", "env-model")
        assert load_config({"categories": ["patchscript"]}).model == "env-model"
        explicit = load_config({"categories": ["patchscript"], "model": "pinned"})
        assert explicit.model == "pinned"


class TestEvalCounts:
    def test_ordering_invariant(self):
        EvalCounts(n=10, c=3, w=5)
        with pytest.raises(ValueError):
            EvalCounts(n=10, c=6, w=5)  # c > w
        with pytest.raises(ValueError):
            EvalCounts(n=10, c=3, w=11)  # w > n


class TestStableSeed:
    def test_deterministic_and_distinct(self):
        a = stable_seed("run", "additive", 0)
        assert a == stable_seed("run", "additive", 0)
        assert a != stable_seed("run", "additive", 1)
        assert a != stable_seed("run", "am", 0)
        assert 0 <= a < 2**64


class TestPipeline:
    def test_record_counts(self, mini_run):
        config, run_dir, report = mini_run
        samples = list(harness.iter_samples(run_dir, config))
        assert len(samples) == len(config.categories) * len(config.benchmarks) * config.n

    def test_sample_invariants(self, mini_run):
        config, run_dir, _ = mini_run
        for sample in harness.iter_samples(run_dir, config):
            sample.check_invariants()
            if sample.wellformed == "yes":
                assert sample.node_count is not None
                assert (harness.sample_dir(run_dir, sample) / "patch.json").exists()
                assert (harness.sample_dir(run_dir, sample) / "render.wav").exists()
            else:
                assert sample.error is not None

    def test_specific_samples_get_oracle_verdicts(self, mini_run):
        config, run_dir, _ = mini_run
        for sample in harness.iter_samples(run_dir, config):
            if sample.wellformed != "yes":
                continue
            assert sample.verdict is not None
            if BENCHMARKS[sample.benchmark_id].kind == "specific":
                assert sample.verdict["status"] in ("pass", "fail")
                assert sample.verdict["rater"] == "oracle"
            else:
                assert sample.verdict["status"] == "needs-human"

    def test_cell_count_invariant(self, mini_run):
        _, _, report = mini_run
        for cell in report.cells:
            assert 0 <= cell["c"] <= cell["w"] <= cell["n"]

    def test_report_totals_are_sums(self, mini_run):
        config, _, report = mini_run
        for category_entry in report.categories:
            cells = [c for c in report.cells if c["category"] == category_entry["category"]]
            assert category_entry["totals"]["n"] == sum(c["n"] for c in cells)
            assert category_entry["totals"]["w"] == sum(c["w"] for c in cells)
            assert category_entry["totals"]["c"] == sum(c["c"] for c in cells)

    def test_report_files_written(self, mini_run):
        _, run_dir, _ = mini_run
        for name in ("report.json", "report.md", "report.csv"):
            assert (run_dir / name).exists()
        assert harness.ORACLE_NOTE in (run_dir / "report.md").read_text()

    def test_csv_columns(self, mini_run):
        _, run_dir, _ = mini_run
        header = (run_dir / "report.csv").read_text().splitlines()[0]
        assert header == (
            "category,benchmark,n,w,c,mean_nodes,pass1_std,pass1_wf,pass3_std,pass3_wf"
        )

    def test_run_is_reproducible(self, tmp_path):
        config1 = mini_corpus(tmp_path / "a", benchmarks=("am",), n=3)
        config2 = mini_corpus(tmp_path / "b", benchmarks=("am",), n=3)
        r1 = harness.run_experiment(config1, runs_root=tmp_path / "a" / "runs")
        r2 = harness.run_experiment(config2, runs_root=tmp_path / "b" / "runs")
        assert json.dumps(r1.to_json()) == json.dumps(r2.to_json())


class TestRatings:
    def test_two_agreeing_passes_count(self):
        ratings = [
            RatingRecord("s1", "alice", "pass"),
            RatingRecord("s1", "bob", "pass"),
        ]
        assert resolve_ratings(ratings)["s1"] == "pass"

    def test_disagreement_without_adjudication_pends(self):
        ratings = [
            RatingRecord("s1", "alice", "pass"),
            RatingRecord("s1", "bob", "fail"),
        ]
        assert resolve_ratings(ratings)["s1"] == "pending"

    def test_unsure_forces_adjudication(self):
        ratings = [
            RatingRecord("s1", "alice", "pass"),
            RatingRecord("s1", "bob", "unsure"),
        ]
        assert resolve_ratings(ratings)["s1"] == "pending"
        ratings.append(RatingRecord("s1", "team", "pass", adjudicated="pass"))
        assert resolve_ratings(ratings)["s1"] == "pass"

    def test_single_rating_pends(self):
        assert resolve_ratings([RatingRecord("s1", "alice", "pass")])["s1"] == "pending"

    def test_two_agreeing_fails(self):
        ratings = [
            RatingRecord("s1", "alice", "fail"),
            RatingRecord("s1", "bob", "fail"),
        ]
        assert resolve_ratings(ratings)["s1"] == "fail"

    def test_merge_unknown_sample(self, mini_run):
        config, run_dir, _ = mini_run
        with pytest.raises(RatingError) as err:
            merge_ratings(run_dir, config, [RatingRecord("ghost:additive:0", "a", "pass")])
        assert err.value.code == "unknown-sample"

    def test_agreement_increments_c(self, mini_run):
        config, run_dir, _ = mini_run
        base = harness.build_report(run_dir, config, ratings=[])
        needs_human = [
            s for s in harness.iter_samples(run_dir, config)
            if (s.verdict or {}).get("status") == "needs-human"
        ]
        target = needs_human[0]
        ratings = [
            RatingRecord(target.sample_id, "alice", "pass"),
            RatingRecord(target.sample_id, "bob", "pass"),
        ]
        updated = harness.build_report(run_dir, config, ratings=ratings)

        def total_c(report):
            return sum(c["c"] for c in report.cells)

        assert total_c(updated) == total_c(base) + 1

    def test_oracle_verdicts_immune_to_ratings(self, mini_run):
        config, run_dir, _ = mini_run
        specific = [
            s for s in harness.iter_samples(run_dir, config)
            if BENCHMARKS[s.benchmark_id].kind == "specific" and s.wellformed == "yes"
        ]
        target = specific[0]
        expected = "pass" if target.verdict["status"] == "pass" else "fail"
        ratings = [
            RatingRecord(target.sample_id, "alice", "fail"),
            RatingRecord(target.sample_id, "bob", "fail"),
        ]
        outcome = merge_ratings(run_dir, config, ratings)
        assert outcome[target.sample_id] == expected


class TestExternalRoute:
    def test_external_category_runs_via_stub(self, tmp_path):
        # stub runner: "compiles" PatchScript by running it with the packaged
        # interpreter and saving the maxpat equivalent
        runner = tmp_path / "runner.py"
        runner.write_text(
            "import sys\n"
            "from pathlib import Path\n"
            "from patchbench.script import parse_script, run_script\n"
            "from patchbench.codecs import emit_maxpat\n"
            "code = Path(sys.argv[1]).read_text()\n"
            "graph = run_script(parse_script(code), seed=0)\n"
            "Path(sys.argv[2]).write_bytes(emit_maxpat(graph))\n"
        )
        config = harness.RunConfig(
            categories=["external-metaprog"],
            benchmarks=["additive"],
            n=2,
            k=[1],
            mode="replay",
            seed=1,
            workers=1,
            runner_templates={"external-metaprog": f"python3 {runner} {{code}} {{out}}"},
            cache_dir=str(tmp_path / "cache"),
        )
        cache = llm.ResponseCache(config.cache_dir)
        assistant = llm.assistant_config_for(
            CATEGORIES["external-metaprog"], config.model, config.temperature
        )
        prompt = llm.build_prompt("external-metaprog", "additive")
        good = (
            'let mix = place("gain", 0.2)\nlet out = place("dac")\n'
            'let a = place("osc", 440)\nconnect(a.out[0], mix.in[0])\n'
            'connect(mix.out[0], out.in[0])\nemit()\n'
        )
        cache.put(llm.cache_key(assistant, prompt, 0), f"```\n{good}```")
        cache.put(llm.cache_key(assistant, prompt, 1), "no code here at all")
        report = harness.run_experiment(config, runs_root=tmp_path / "runs")
        cell = report.cells[0]
        assert cell["n"] == 2
        assert cell["w"] == 1
