"""patchbench: evaluation toolkit for LLM-generated audio dataflow patches.

The pieces, bottom up:

- ``graph``: canonical patch IR, validation, node counting.
- ``codecs``: the two JSON patch dialects (Max-style with layout,
  layout-free wavir-style).
- ``script``: the PatchScript metaprogramming DSL whose programs build
  patches, with seeded randomness.
- ``render`` / ``oracles``: offline audio rendering and the spectral
  judges for the five specific benchmarks.
- ``llm``: chat-completions client with a deterministic replay cache.
- ``stats``: pass@k and the one-sided Wilcoxon signed-rank test.
- ``harness`` / ``review``: experiment orchestration, reports and the
  human-rating HTTP service.
"""

from .codecs import emit_maxpat, emit_wavir, parse_maxpat, parse_wavir
from .graph import (
    Edge,
    GraphError,
    Node,
    NodeKind,
    NotWellFormedError,
    PatchGraph,
    ValidationReport,
    Violation,
    build,
    has_cycle,
    node_count,
    validate,
)
from .harness import EvalCounts, RunConfig, load_config, run_experiment
from .llm import build_prompt, extract_code, generate
from .oracles import Verdict, judge_specific
from .render import PcmBuffer, compile, render, render_graph, spectrum
from .script import parse_script, pretty_print, run_external, run_script
from .stats import aggregate_pass_at_k, pass_at_k, wilcoxon_one_sided

__version__ = "0.1.0"

__all__ = [
    "Edge",
    "EvalCounts",
    "GraphError",
    "Node",
    "NodeKind",
    "NotWellFormedError",
    "PatchGraph",
    "PcmBuffer",
    "RunConfig",
    "ValidationReport",
    "Verdict",
    "Violation",
    "aggregate_pass_at_k",
    "build",
    "build_prompt",
    "compile",
    "emit_maxpat",
    "emit_wavir",
    "extract_code",
    "generate",
    "has_cycle",
    "judge_specific",
    "load_config",
    "node_count",
    "parse_maxpat",
    "parse_script",
    "parse_wavir",
    "pass_at_k",
    "pretty_print",
    "render",
    "render_graph",
    "run_experiment",
    "run_external",
    "run_script",
    "spectrum",
    "validate",
    "wilcoxon_one_sided",
    "__version__",
]
