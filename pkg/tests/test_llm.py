import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchbench.llm import (
    AssistantConfig,
    CacheMissError,
    LlmClient,
    LlmHttpError,
    PromptError,
    ResponseCache,
    build_prompt,
    cache_key,
    extract_code,
    extract_code_with_provenance,
    generate,
)


def make_config(**overrides):
    defaults = dict(
        category_id="patchscript",
        knowledge_document="You write PatchScript.",
        examples=(("beep", 'place("osc", 440)'),),
    )
    defaults.update(overrides)
    return AssistantConfig(**defaults)


class StubHandler(BaseHTTPRequestHandler):
    """Configurable chat-completions stub; records request bodies."""

    responses: list[tuple[int, str]] = []
    requests: list[dict] = []
    call_index = 0

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        type(self).requests.append(body)
        idx = min(type(self).call_index, len(type(self).responses) - 1)
        status, text = type(self).responses[idx]
        type(self).call_index += 1
        payload = json.dumps(
            {"choices": [{"message": {"role": "assistant", "content": text}}]}
        ).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), StubHandler)
    StubHandler.responses = [(200, "stub response")]
    StubHandler.requests = []
    StubHandler.call_index = 0
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1"
    server.shutdown()


class TestBuildPrompt:
    def test_max_family_template(self):
        prompt = build_prompt("json-maxpat", "additive")
        assert prompt == (
            "Based on the examples given, use JSON for a Max patch to write "
            "code that implements additive synthesis."
        )

    def test_webaudio_family_template(self):
        prompt = build_prompt("json-wavir", "fm")
        assert prompt == "Write JSON that implements FM synthesis."

    def test_rich_suffix(self):
        prompt = build_prompt("patchscript-rich", "church-bell")
        assert prompt == (
            "Based on the examples given, use PatchScript to write code that "
            "implements a church bell. Use for loops and/or random() in your code."
        )

    def test_rich_override(self):
        assert "for loops" in build_prompt("patchscript", "additive", rich=True)
        assert "for loops" not in build_prompt("patchscript-rich", "additive", rich=False)

    def test_unknown_benchmark(self):
        with pytest.raises(PromptError) as err:
            build_prompt("json-maxpat", "nonexistent")
        assert err.value.code == "unknown-benchmark"

    def test_unknown_category(self):
        with pytest.raises(PromptError) as err:
            build_prompt("nonexistent", "additive")
        assert err.value.code == "unknown-category"


class TestExtractCode:
    def test_single_fenced_block(self):
        raw = "Sure!\n```python\nx = 1\n```\nDone."
        assert extract_code(raw) == "x = 1"

    def test_last_of_two_blocks_wins(self):
        raw = "Example:\n```\nfirst\n```\nAnswer:\n```\nsecond\n```"
        assert extract_code(raw) == "second"

    def test_brace_balanced_json_in_prose(self):
        raw = 'The patch is {"patcher": {"boxes": []}} as requested.'
        assert extract_code(raw) == '{"patcher": {"boxes": []}}'

    def test_prose_only_returns_whole(self):
        raw = "I cannot generate that sound."
        assert extract_code(raw) == raw

    def test_script_with_loop_body_not_mangled(self):
        code = "for i in 0..3 {\n  let x = i\n}\nemit()"
        assert extract_code(code) == code

    def test_provenance_records_steps(self):
        _, steps = extract_code_with_provenance("```\ncode\n```")
        assert steps[0] == "fenced"

    def test_idempotent_on_fixtures(self):
        cases = [
            "plain text",
            "```\ncode block\n```",
            'prose {"a": [1, 2]} prose',
            "for i in 0..3 {\n  emit()\n}",
            "```\nouter with {\"inner\": 1} json\n```",
        ]
        for raw in cases:
            once = extract_code(raw)
            assert extract_code(once) == once

    @given(st.text(max_size=400))
    @settings(max_examples=300, deadline=None)
    def test_idempotent_property(self, raw):
        once = extract_code(raw)
        assert extract_code(once) == once

    @given(st.text(max_size=300))
    @settings(max_examples=100, deadline=None)
    def test_total_function(self, raw):
        assert isinstance(extract_code(raw), str)


class TestCache:
    def test_key_is_stable(self):
        config = make_config()
        key1 = cache_key(config, "prompt", 0)
        key2 = cache_key(make_config(), "prompt", 0)
        assert key1 == key2
        assert len(key1) == 64

    def test_key_varies_by_all_inputs(self):
        config = make_config()
        base = cache_key(config, "prompt", 0)
        assert cache_key(config, "prompt", 1) != base
        assert cache_key(config, "other", 0) != base
        assert cache_key(make_config(temperature=0.5), "prompt", 0) != base

    def test_round_trip(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.put("abc", "response text")
        assert cache.get("abc") == "response text"
        assert cache.get("missing") is None


class TestGenerate:
    def test_replay_from_cache(self, tmp_path):
        config = make_config()
        cache = ResponseCache(tmp_path)
        for i in range(10):
            cache.put(cache_key(config, "prompt", i), f"canned {i}")
        out = generate(config, "prompt", 10, mode="replay", cache=cache)
        assert out == [f"canned {i}" for i in range(10)]

    def test_replay_cache_miss(self, tmp_path):
        with pytest.raises(CacheMissError):
            generate(make_config(), "prompt", 1, mode="replay",
                     cache=ResponseCache(tmp_path))

    def test_live_stub_returns_fixed_text(self, stub_server, tmp_path):
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        out = generate(make_config(), "prompt", 3, mode="live",
                       cache=ResponseCache(tmp_path), client=client)
        assert out == ["stub response"] * 3

    def test_fresh_context_every_request(self, stub_server):
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        generate(make_config(), "the prompt", 3, mode="live", client=client)
        assert len(StubHandler.requests) == 3
        for body in StubHandler.requests:
            roles = [m["role"] for m in body["messages"]]
            assert roles == ["system", "user"]
            # no request may carry a previous sample's response
            for message in body["messages"]:
                assert "stub response" not in message["content"]

    def test_live_responses_populate_cache(self, stub_server, tmp_path):
        config = make_config()
        cache = ResponseCache(tmp_path)
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        generate(config, "prompt", 2, mode="live", cache=cache, client=client)
        assert cache.get(cache_key(config, "prompt", 0)) == "stub response"
        # replay afterwards needs no client at all
        out = generate(config, "prompt", 2, mode="replay", cache=cache)
        assert out == ["stub response"] * 2

    def test_server_errors_exhaust_retries(self, stub_server):
        StubHandler.responses = [(500, "boom")]
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        with pytest.raises(LlmHttpError) as err:
            generate(make_config(), "prompt", 1, mode="live", client=client)
        assert err.value.status == 500
        assert len(StubHandler.requests) == 5  # max attempts

    def test_rate_limit_then_success(self, stub_server):
        StubHandler.responses = [(429, ""), (429, ""), (200, "eventually")]
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        out = generate(make_config(), "prompt", 1, mode="live", client=client)
        assert out == ["eventually"]
        assert len(StubHandler.requests) == 3

    def test_non_retryable_status_fails_fast(self, stub_server):
        StubHandler.responses = [(401, "")]
        client = LlmClient(base_url=stub_server, backoff_base=0.001)
        with pytest.raises(LlmHttpError) as err:
            generate(make_config(), "prompt", 1, mode="live", client=client)
        assert err.value.status == 401
        assert len(StubHandler.requests) == 1

    def test_bad_n(self):
        with pytest.raises(ValueError):
            generate(make_config(), "prompt", 0)


class TestAssistantConfig:
    def test_empty_knowledge_document_rejected(self):
        with pytest.raises(ValueError):
            make_config(knowledge_document="   ")

    def test_system_prompt_contains_examples(self):
        text = make_config().system_prompt()
        assert "You write PatchScript." in text
        assert 'place("osc", 440)' in text

    def test_packaged_configs_nonempty(self):
        from patchbench.benchmarks import CATEGORIES
        from patchbench.llm import assistant_config_for

        for category in CATEGORIES.values():
            config = assistant_config_for(category)
            assert config.knowledge_document.strip()
