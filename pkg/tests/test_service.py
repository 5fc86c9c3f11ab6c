import threading

from fastapi.testclient import TestClient

from convrec.errors import TransportError
from convrec.evalkit import RunConfig, run_session
from convrec.gateway import Gateway, ScriptedBackend
from convrec.service import create_app

from helpers import TurnPlan, make_gateway, make_sample, session_script


def scripted_app(script):
    gateway = Gateway(ScriptedBackend(script))
    return TestClient(create_app(gateway)), gateway


def interactive_script(sid="api1"):
    """Turn 1 ask, turn 2 recommend Heat; judge accepts on turn 2."""
    return {
        ("responder.ask", sid, 1): "What are you in the mood for?",
        ("responder.chat", sid, 1): "Lovely evening for a film.",
        ("responder.rec", sid, 1): "Maybe Fargo?\nRECOMMEND: Fargo",
        ("planner", sid, 1): "SELECTED: ask",
        ("reflect.info", sid, 1): "DEMAND:\n- genre: thriller\nHISTORY:",
        ("responder.ask", sid, 2): "Classic or modern?",
        ("responder.chat", sid, 2): "Crime capers are great.",
        ("responder.rec", sid, 2): "How about Heat? A slick heist film.\nRECOMMEND: Heat",
        ("planner", sid, 2): "SELECTED: recommend",
        ("reflect.info", sid, 2): "DEMAND:\n- genre: thriller\nHISTORY:\n- Heat",
        ("judge.acceptance", sid, 2): "ACCEPT: yes",
    }


def test_create_session_returns_first_response():
    client, _ = scripted_app(interactive_script())
    resp = client.post(
        "/sessions",
        json={"opening_utterance": "hi, I want a tense crime movie", "session_id": "api1"},
    )
    assert resp.status_code == 201
    body = resp.json()
    assert body["session_id"] == "api1"
    assert body["system"]["act"] == "ask"
    assert body["system"]["text"] == "What are you in the mood for?"
    assert body["terminal"] is False


def test_create_session_validations():
    client, _ = scripted_app(interactive_script())
    assert client.post("/sessions", json={"opening_utterance": "  "}).status_code == 400
    assert client.post("/sessions", json={"opening_utterance": "hi", "mode": "weird"}).status_code == 400
    resp = client.post("/sessions", json={"opening_utterance": "hi", "config": {"bogus_knob": 1}})
    assert resp.status_code == 400


def test_message_flow_to_terminal_success():
    client, _ = scripted_app(interactive_script())
    client.post("/sessions", json={"opening_utterance": "hi, I want a tense crime movie", "session_id": "api1"})
    resp = client.post("/sessions/api1/messages", params={"debug": 1}, json={"utterance": "something tense please"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["system"]["act"] == "recommend"
    assert body["system"]["recommendations"] == ["Heat"]
    assert body["terminal"] is False
    assert len(body["debug"]["candidates"]) == 3
    assert body["debug"]["profile"]["demand"] == {"genre": "thriller"}

    final = client.post("/sessions/api1/messages", json={"utterance": "yes, that's exactly it, thanks!"})
    assert final.status_code == 200
    assert final.json()["terminal"] is True
    assert final.json()["outcome"] == "success"

    # terminal session refuses further messages
    assert client.post("/sessions/api1/messages", json={"utterance": "hello?"}).status_code == 409


def test_unknown_session_404():
    client, _ = scripted_app({})
    assert client.post("/sessions/nope/messages", json={"utterance": "hi"}).status_code == 404
    assert client.get("/sessions/nope").status_code == 404


def test_get_session_view_reflects_state():
    client, _ = scripted_app(interactive_script())
    client.post("/sessions", json={"opening_utterance": "hi there, movie please", "session_id": "api1"})
    client.post("/sessions/api1/messages", json={"utterance": "something tense please"})
    view = client.get("/sessions/api1").json()
    assert view["acts"] == ["ask"]
    assert view["profile"]["demand"] == {"genre": "thriller"}  # latest info reflection output
    assert view["status"] == "active"
    assert len(view["turns"]) == 1


def test_healthz():
    client, _ = scripted_app({})
    body = client.get("/healthz").json()
    assert body["status"] == "ok"
    assert body["backend"] == {"kind": "ScriptedBackend", "reachable": True}


class FlakyBackend:
    """Delegates to a scripted table but fails the first planner call at turn 2."""

    def __init__(self, script):
        self.inner = ScriptedBackend(script)
        self.tripped = False

    def complete(self, messages, gen, key):
        if key.template_id == "planner" and key.turn_index == 2 and not self.tripped:
            self.tripped = True
            raise TransportError("synthetic outage")
        return self.inner.complete(messages, gen, key)


def test_turn_atomicity_on_backend_failure():
    gateway = Gateway(FlakyBackend(interactive_script()))
    client = TestClient(create_app(gateway))
    client.post("/sessions", json={"opening_utterance": "hi, movie please", "session_id": "api1"})
    failed = client.post("/sessions/api1/messages", json={"utterance": "something tense please"})
    assert failed.status_code == 503
    view = client.get("/sessions/api1").json()
    assert view["turns"] == []  # the turn was not half-applied
    assert view["status"] == "active"
    # retrying the same message succeeds and applies exactly one turn
    retried = client.post("/sessions/api1/messages", json={"utterance": "something tense please"})
    assert retried.status_code == 200
    assert len(client.get("/sessions/api1").json()["turns"]) == 1


def test_simulated_mode_judges_against_target_title():
    sid = "sim1"
    script = {
        ("responder.ask", sid, 1): "Era preference?",
        ("responder.chat", sid, 1): "Films are great.",
        ("responder.rec", sid, 1): "Try Golden Reel.\nRECOMMEND: Golden Reel",
        ("planner", sid, 1): "SELECTED: recommend",
        ("reflect.info", sid, 1): "DEMAND:\nHISTORY:",
    }
    client, _ = scripted_app(script)
    resp = client.post(
        "/sessions",
        json={
            "opening_utterance": "hi",
            "mode": "simulated",
            "session_id": sid,
            "config": {"target_title": "Golden Reel"},
        },
    )
    assert resp.status_code == 201
    done = client.post(f"/sessions/{sid}/messages", json={"utterance": "yes! exactly"})
    assert done.json()["terminal"] is True
    assert done.json()["outcome"] == "success"


def test_simulated_mode_requires_target():
    client, _ = scripted_app({})
    resp = client.post("/sessions", json={"opening_utterance": "hi", "mode": "simulated"})
    assert resp.status_code == 400


def test_interactive_and_benchmark_paths_share_engine_behavior():
    """Same scripted responses => same act sequence through both paths."""
    sample = make_sample("shared1", target_title="Heat")
    plans = [TurnPlan(act="ask"), TurnPlan(act="recommend", rec_title="Heat")]
    script = session_script(sample, plans)
    bench_record = run_session(sample, RunConfig(), make_gateway(script))
    bench_acts = [t.act for t in bench_record.turns]

    # the service consumes the same script, with judge calls instead of title matching
    api_script = dict(script)
    api_script[("judge.acceptance", "shared1", 2)] = "ACCEPT: yes"
    client, _ = scripted_app(api_script)
    client.post("/sessions", json={"opening_utterance": sample.first_utterance, "session_id": "shared1"})
    feedback1 = script[("simulator.user", "shared1", 1)]
    r1 = client.post("/sessions/shared1/messages", json={"utterance": feedback1})
    feedback2 = script[("simulator.user", "shared1", 2)]
    r2 = client.post("/sessions/shared1/messages", json={"utterance": feedback2})
    api_acts = client.get("/sessions/shared1").json()["acts"]
    assert api_acts == bench_acts == ["ask", "recommend"]
    assert r2.json()["outcome"] == "success"


def test_concurrent_second_message_gets_busy_409():
    import time

    sid = "busy1"
    script = interactive_script(sid)

    class SlowBackend:
        def __init__(self, script):
            self.inner = ScriptedBackend(script)

        def complete(self, messages, gen, key):
            if key.turn_index == 2 and key.template_id == "responder.ask":
                time.sleep(0.4)
            return self.inner.complete(messages, gen, key)

    client = TestClient(create_app(Gateway(SlowBackend(script))))
    client.post("/sessions", json={"opening_utterance": "hi, movie please", "session_id": sid})
    statuses = []

    def send():
        statuses.append(client.post(f"/sessions/{sid}/messages", json={"utterance": "tense please"}).status_code)

    threads = [threading.Thread(target=send) for _ in range(2)]
    for t in threads:
        t.start()
        import time as _t

        _t.sleep(0.05)
    for t in threads:
        t.join()
    assert sorted(statuses) == [200, 409]
