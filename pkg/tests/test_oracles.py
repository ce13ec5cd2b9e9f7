import numpy as np
import pytest

from patchbench import fixtures
from patchbench.graph import build
from patchbench.oracles import UnknownBenchmarkError, judge_specific
from patchbench.render import PcmBuffer, render_graph


@pytest.fixture(scope="module")
def rendered():
    def _render(graph):
        return render_graph(graph, duration=2.0, seed=11)

    return _render


class TestReferenceFixtures:
    @pytest.mark.parametrize("benchmark", ["additive", "am", "fm", "lfo", "filtered-noise"])
    def test_reference_passes(self, benchmark, rendered):
        graph = fixtures.REFERENCE_GRAPHS[benchmark]()
        verdict = judge_specific(benchmark, rendered(graph), graph)
        assert verdict.status == "pass", (benchmark, verdict.evidence)
        assert verdict.rater == "oracle"
        assert verdict.evidence  # every pass carries machine evidence

    @pytest.mark.parametrize("benchmark", ["additive", "am", "fm", "lfo", "filtered-noise"])
    def test_wrong_fixture_fails(self, benchmark, rendered):
        graph = fixtures.WRONG_GRAPHS[benchmark]()
        verdict = judge_specific(benchmark, rendered(graph), graph)
        assert verdict.status == "fail", (benchmark, verdict.evidence)


class TestJudgeBehaviour:
    def test_additive_pass_evidence_lists_peaks(self, rendered):
        graph = fixtures.additive_reference()
        verdict = judge_specific("additive", rendered(graph), graph)
        checks = {e.check: e for e in verdict.evidence}
        assert checks["harmonic-peaks"].measured >= 4

    def test_bare_sine_fails_additive_on_peak_count(self, rendered):
        graph = fixtures.bare_sine()
        verdict = judge_specific("additive", rendered(graph), graph)
        checks = {e.check: e for e in verdict.evidence}
        assert checks["harmonic-peaks"].measured < 3

    def test_am_sidebands_reported(self, rendered):
        graph = fixtures.am_reference()
        verdict = judge_specific("am", rendered(graph), graph)
        checks = {e.check: e for e in verdict.evidence}
        assert checks["modulator-hz"].measured == pytest.approx(110, abs=6)

    def test_structural_check_gates_additive(self, rendered):
        # a convincing 4-peak buffer attached to a 1-oscillator patch
        buffer = rendered(fixtures.additive_reference())
        lone = fixtures.bare_sine()
        gated = judge_specific("additive", buffer, lone)
        assert gated.status == "fail"
        ungated = judge_specific("additive", buffer, lone, structural_checks=())
        assert ungated.status == "pass"

    def test_detuned_partials_still_pass(self):
        g = build(
            [
                ("osc", [440]),
                ("osc", [880 + 12]),
                ("osc", [1320 - 9]),
                ("osc", [1760 + 14]),
                ("gain", [0.2]),
                ("dac", []),
            ],
            [(i, 0, 4, 0) for i in range(4)] + [(4, 0, 5, 0), (4, 0, 5, 1)],
        )
        verdict = judge_specific("additive", render_graph(g), g)
        assert verdict.status == "pass"

    def test_creative_needs_human(self, rendered):
        graph = fixtures.additive_reference()
        verdict = judge_specific("church-bell", rendered(graph), graph)
        assert verdict.status == "needs-human"

    def test_unknown_benchmark(self, rendered):
        with pytest.raises(UnknownBenchmarkError):
            judge_specific("nonexistent", rendered(fixtures.beeper()), fixtures.beeper())

    def test_judging_is_deterministic(self, rendered):
        graph = fixtures.lfo_reference()
        buf = rendered(graph)
        assert judge_specific("lfo", buf, graph) == judge_specific("lfo", buf, graph)

    def test_slow_lfo_detected(self):
        g = fixtures.lfo_reference(rate=1.0)
        verdict = judge_specific("lfo", render_graph(g, duration=2.0), g)
        assert verdict.status == "pass", verdict.evidence

    def test_highpass_noise_passes_with_mode_awareness(self):
        g = build(
            [("noise", []), ("filter.highpass", [4000, 0.707]), ("gain", [0.5]), ("dac", [])],
            [(0, 0, 1, 0), (1, 0, 2, 0), (2, 0, 3, 0), (2, 0, 3, 1)],
        )
        verdict = judge_specific("filtered-noise", render_graph(g), g)
        assert verdict.status == "pass", verdict.evidence

    def test_silence_fails_every_specific_benchmark(self):
        silent = PcmBuffer(samples=np.zeros(88200))
        graph = fixtures.silence()
        for benchmark in ("additive", "am", "fm", "lfo", "filtered-noise"):
            assert judge_specific(benchmark, silent, graph).status == "fail"
