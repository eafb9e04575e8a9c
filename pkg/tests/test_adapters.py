from __future__ import annotations

import sys
import time

import pytest
import requests

from adapters.mocks import (
    OracleAfterClueQa,
    OracleQa,
    PhraseRewrite,
    ReplayStt,
    RiddleLocator,
    ScatterQa,
    StubTts,
)
from adapters.ports import AdapterError, AdapterSuite, QaRequest, checked_answers
from adapters.registry import build_qa_backend
from adapters.remote import HttpQaBackend, StdioQaBackend, parse_answers
from core.config import AppConfig
from core.http import build_retry
from core.validate import ConfigError
from riddles.synthetic import synthetic_dataset
from segmentation.classifier import RuleBaselineClassifier
from segmentation.events import TimedSegment


def _request(text: str, k: int = 3) -> QaRequest:
    return QaRequest(input_text=text, prompt="prompt", n_samples=k)


def test_locator_prefix_and_overlap(small_dataset, wave_riddle):
    locator = RiddleLocator(small_dataset)
    riddle, reached = locator.locate("I am a property of a periodic")
    assert riddle == wave_riddle and reached == 1
    riddle, reached = locator.locate(wave_riddle.clue_text(upto=2))
    assert riddle == wave_riddle and reached == 2
    riddle, reached = locator.locate("therefore i am a property of a wave")
    assert riddle == wave_riddle and reached == 2
    assert locator.locate("") == (None, 0)


def test_oracle_backends(small_dataset, wave_riddle):
    assert OracleQa(small_dataset).generate(_request("i am a group of cells")) == ["tissue"] * 3
    late = OracleAfterClueQa(small_dataset, from_clue=3, wrong_answer="wave")
    assert late.generate(_request(wave_riddle.clue_text(upto=2))) == ["wave"] * 3
    assert late.generate(_request(wave_riddle.clue_text())) == ["polarization"] * 3


def test_scatter_answers_are_distinct():
    answers = ScatterQa().generate(_request("x", 5)) + ScatterQa().generate(_request("y", 5))
    assert len(set(answers)) == 10


def test_checked_answers_enforces_count():
    class Short:
        concurrent_safe = True
        latency_s = 0.0

        def generate(self, request):
            return ["one"]

    class Crashing(Short):
        def generate(self, request):
            raise KeyError("boom")

    with pytest.raises(AdapterError):
        checked_answers(Short(), _request("x"))
    with pytest.raises(AdapterError):
        checked_answers(Crashing(), _request("x"))


def test_replay_stt_rewrites_and_substitutes_deterministically():
    chunk = TimedSegment("We begin with the first riddle now please", 0.0, 5.0, seq=4)
    clean = ReplayStt(rewrites=[PhraseRewrite("first riddle", "test riddle")]).transcribe(chunk)
    assert clean.text == "We begin with the test riddle now please"
    assert clean.latency_s == pytest.approx(0.94)

    noisy = ReplayStt(substitution_rate=0.5, seed=9)
    assert noisy.transcribe(chunk).text == noisy.transcribe(chunk).text
    assert len(noisy.transcribe(chunk).text.split()) == len(chunk.text.split())
    assert ReplayStt(substitution_rate=1.0, seed=9).transcribe(chunk).text != chunk.text
    with pytest.raises(ValueError):
        ReplayStt(substitution_rate=1.5)
    with pytest.raises(AdapterError):
        ReplayStt(fail_seqs=[4]).transcribe(chunk)


def test_stub_tts_records_speech():
    tts = StubTts()
    utterance = tts.synthesize("polarization")
    assert utterance.handle.startswith("tts://") and utterance.latency_s == pytest.approx(1.05)
    assert tts.spoken == ["polarization"]


def test_adapter_suite_needs_every_port():
    with pytest.raises(ValueError):
        AdapterSuite(stt=ReplayStt(), classifier=RuleBaselineClassifier(), qa=None, tts=StubTts())


def test_registry_selects_backends():
    dataset = synthetic_dataset(2)
    assert isinstance(build_qa_backend("oracle", dataset=dataset), OracleQa)
    assert isinstance(build_qa_backend("oracle_after_clue", dataset=dataset), OracleAfterClueQa)
    with pytest.raises(ConfigError):
        build_qa_backend("oracle")
    with pytest.raises(ConfigError):
        build_qa_backend("gpt")


def test_parse_answers_contract():
    assert parse_answers({"answers": ["a", "b"]}, 2) == ["a", "b"]
    with pytest.raises(AdapterError):
        parse_answers({"answers": ["a"]}, 2)
    with pytest.raises(AdapterError):
        parse_answers(["a", "b"], 2)


class _FakeClient:
    def __init__(self, reply=None, error=None):
        self.reply = reply
        self.error = error
        self.sent = []

    def post_json(self, url, payload):
        self.sent.append((url, payload))
        if self.error is not None:
            raise self.error
        return self.reply

    def close(self):
        pass


def test_http_backend_posts_wire_request():
    client = _FakeClient(reply={"answers": ["wave", "wave", "ion"]})
    backend = HttpQaBackend("http://qa.local/answer", config=AppConfig(), client=client)
    assert backend.generate(_request("i am a wave")) == ["wave", "wave", "ion"]
    url, payload = client.sent[0]
    assert url == "http://qa.local/answer"
    assert payload == {"input_text": "i am a wave", "prompt": "prompt", "n_samples": 3}


def test_http_backend_translates_transport_errors():
    client = _FakeClient(error=requests.ConnectionError("refused"))
    backend = HttpQaBackend("http://qa.local/answer", config=AppConfig(), client=client)
    with pytest.raises(AdapterError):
        backend.generate(_request("x"))


def test_http_backend_needs_endpoint():
    with pytest.raises(AdapterError):
        HttpQaBackend(config=AppConfig(qa_endpoint=""))


def test_http_client_retries_posts():
    retry = build_retry(AppConfig(http_max_retries=2, http_backoff_base=0.1))
    assert retry.total == 2
    assert "POST" in retry.allowed_methods
    assert 503 in retry.status_forcelist


ECHO_BACKEND = (
    "import json, sys\n"
    "for line in sys.stdin:\n"
    "    request = json.loads(line)\n"
    "    answers = [request['input_text']] * request['n_samples']\n"
    "    print(json.dumps({'answers': answers}), flush=True)\n"
)


def test_stdio_backend_exchanges_json_lines():
    backend = StdioQaBackend([sys.executable, "-c", ECHO_BACKEND], timeout=10.0)
    try:
        assert backend.generate(_request("gold")) == ["gold"] * 3
        assert backend.generate(_request("iron", k=2)) == ["iron", "iron"]
    finally:
        backend.close()


def test_stdio_backend_times_out_on_silent_process():
    backend = StdioQaBackend([sys.executable, "-c", "import time; time.sleep(30)"], timeout=0.5)
    started = time.monotonic()
    try:
        with pytest.raises(AdapterError, match="no reply"):
            backend.generate(_request("x"))
    finally:
        backend.close()
    assert time.monotonic() - started < 10.0
