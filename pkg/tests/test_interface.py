"""CLI contract and HTTP service endpoints against desk-scale fixtures."""

import json

import pytest
from fastapi.testclient import TestClient

from crisis_scope.cli import main
from crisis_scope.config import load_config
from crisis_scope.corpus import EventCollection, dump_messages
from crisis_scope.queries import query_to_record
from crisis_scope.service import create_app
from crisis_scope.session import Session

from helpers import (
    build_alias_table,
    make_message,
    planted_queries,
    planted_test_corpus,
    planted_training_corpus,
    PLANT_SENTENCES,
)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Config, corpora, alias table and query files for CLI/service runs."""
    root = tmp_path_factory.mktemp("workbench")

    train = planted_training_corpus()
    test, planted, dup_pairs = planted_test_corpus()
    tiny = EventCollection(
        event_id="tinyevent",
        name="tinyevent",
        messages=tuple(
            make_message(
                f"tiny{i}", text, lang="aa", event_id="tinyevent", informative=True
            )
            for i, text in enumerate(PLANT_SENTENCES["Weather"])
        ),
    )
    for collection in (train, test, tiny):
        (root / f"{collection.event_id}.jsonl").write_text(
            dump_messages(collection), encoding="utf-8"
        )

    (root / "alias.json").write_text(json.dumps(build_alias_table()))

    queries_dir = root / "queries"
    queries_dir.mkdir()
    for name, query in planted_queries().items():
        (queries_dir / f"{name.lower()}.json").write_text(
            json.dumps(query_to_record(query))
        )

    config = {
        "seed": 3,
        "k": 100,
        "encoder": {"name": "mock", "dim": 48, "seed": 3,
                    "alias_path": str(root / "alias.json")},
        "generator": {"name": "lead"},
        "annotators": {"aa": "rule", "bb": "rule", "cc": "rule"},
        "model": {
            "embedding_dim": 48, "lstm_hidden": 16,
            "embedding_mlp": [32, 16], "text_mlp": [16, 8],
            "similarity_mlp": [16, 8], "dropout": 0.2,
            "batch_size": 16, "learning_rate": 0.01,
            "epochs": 10, "patience": 10,
        },
        "summary": {"budget": 40},
        "data": {
            "messages": [
                str(root / "stormtrain.jsonl"),
                str(root / "stormtest.jsonl"),
                str(root / "tinyevent.jsonl"),
            ],
            "queries_dir": str(queries_dir),
        },
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config))
    return {
        "root": root,
        "config": str(config_path),
        "planted": planted,
        "dup_pairs": dup_pairs,
    }


class TestCli:
    def test_unknown_command_exits_one(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_exits_one(self, workdir, capsys):
        code = main(["ingest", "--config", workdir["config"], "--frobnicate"])
        assert code == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_missing_input_file_exits_two(self, workdir, tmp_path):
        code = main(
            [
                "rank",
                "--config", workdir["config"],
                "--query", str(tmp_path / "nope.json"),
                "--event", "stormtest",
            ]
        )
        assert code == 2

    def test_unknown_event_exits_one(self, workdir):
        query = str(workdir["root"] / "queries" / "weather.json")
        code = main(
            ["rank", "--config", workdir["config"], "--query", query, "--event", "nope"]
        )
        assert code == 1

    def test_ingest_reports_counts(self, workdir, tmp_path):
        out = tmp_path / "stats.json"
        code = main(["ingest", "--config", workdir["config"], "--out", str(out)])
        assert code == 0
        stats = json.loads(out.read_text())
        by_id = {e["event_id"]: e for e in stats["events"]}
        assert by_id["stormtest"]["messages"] == 150
        assert by_id["stormtest"]["languages"] == ["aa", "bb", "cc"]

    def test_rank_writes_scored_candidates(self, workdir, tmp_path):
        out = tmp_path / "ranked.json"
        query = str(workdir["root"] / "queries" / "weather.json")
        code = main(
            [
                "rank",
                "--config", workdir["config"],
                "--query", query,
                "--event", "stormtest",
                "--k", "5",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["candidates"]) == 5
        scores = [c["score"] for c in payload["candidates"]]
        assert scores == sorted(scores, reverse=True)
        assert payload["seed"] == 3
        assert payload["encoder"].startswith("mock:48")

    def test_summarize_diversified_writes_summary_json(self, workdir, tmp_path):
        out = tmp_path / "s.json"
        query = str(workdir["root"] / "queries" / "weather.json")
        code = main(
            [
                "summarize",
                "--config", workdir["config"],
                "--mode", "diversified",
                "--query", query,
                "--event", "stormtest",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["mode"] == "diversified"
        assert payload["full_text"]
        sizes = [s["cluster_size"] for s in payload["segments"]]
        assert sizes == sorted(sizes, reverse=True)
        assert all(s["source_ids"] for s in payload["segments"])

    def test_train_and_classify_round_trip(self, workdir, tmp_path):
        toy = tmp_path / "toy.jsonl"
        records = []
        for i in range(24):
            positive = i % 2 == 0
            word = "alert" if positive else "hello"
            records.append(
                {
                    "id": f"t{i}",
                    "text": f"{word} message {i}",
                    "lang": "aa",
                    "event_id": "toy",
                    "informative": positive,
                }
            )
        toy.write_text("".join(json.dumps(r) + "\n" for r in records))

        config = json.loads((workdir["root"] / "config.json").read_text())
        config["data"] = {"messages": [str(toy)]}
        config_path = tmp_path / "toyconfig.json"
        config_path.write_text(json.dumps(config))

        model_path = tmp_path / "clf.pt"
        assert main(
            ["train-classifier", "--config", str(config_path), "--out", str(model_path)]
        ) == 0
        preds_path = tmp_path / "preds.jsonl"
        assert main(
            [
                "classify",
                "--config", str(config_path),
                "--model", str(model_path),
                "--messages", str(toy),
                "--out", str(preds_path),
            ]
        ) == 0
        lines = [json.loads(l) for l in preds_path.read_text().splitlines()]
        assert len(lines) == 24
        assert all(0.0 <= l["probability"] <= 1.0 for l in lines)

    def test_evaluate_lolo_emits_fold_rows(self, workdir, tmp_path):
        # two events x three languages, labeled both ways
        paths = []
        for e in range(2):
            records = []
            for lang in ("aa", "bb", "cc"):
                for j in range(8):
                    positive = j % 2 == 0
                    records.append(
                        {
                            "id": f"e{e}{lang}{j}",
                            "text": ("alert" if positive else "hello") + f" {j}",
                            "lang": lang,
                            "event_id": f"toyev{e}",
                            "informative": positive,
                        }
                    )
            path = tmp_path / f"toyev{e}.jsonl"
            path.write_text("".join(json.dumps(r) + "\n" for r in records))
            paths.append(str(path))
        config = json.loads((workdir["root"] / "config.json").read_text())
        config["data"] = {"messages": paths}
        config["model"]["epochs"] = 3
        config_path = tmp_path / "evalconfig.json"
        config_path.write_text(json.dumps(config))

        out = tmp_path / "results.csv"
        assert main(
            [
                "evaluate",
                "--config", str(config_path),
                "--protocol", "lolo",
                "--out", str(out),
            ]
        ) == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "event,language,acc,f1,auc,error"
        assert len(rows) == 1 + 6
        mirror = json.loads(out.with_suffix(".json").read_text())
        assert len(mirror["rows"]) == 6

    def test_seed_override_changes_meta(self, workdir, tmp_path):
        out = tmp_path / "stats.json"
        code = main(
            ["ingest", "--config", workdir["config"], "--seed", "99", "--out", str(out)]
        )
        assert code == 0
        assert json.loads(out.read_text())["seed"] == 99


class TestConfig:
    def test_env_var_overrides_default_path(self, workdir, monkeypatch):
        monkeypatch.setenv("CRISIS_SCOPE_CONFIG", workdir["config"])
        config = load_config()
        assert config.seed == 3
        assert config.encoder["dim"] == 48

    def test_unknown_backend_names_rejected(self, workdir):
        from crisis_scope.config import config_from_dict
        from crisis_scope.errors import ValidationError

        base = json.loads((workdir["root"] / "config.json").read_text())
        base["encoder"] = {"name": "nonexistent"}
        with pytest.raises(ValidationError, match="encoder"):
            config_from_dict(base)

    def test_unknown_config_fields_rejected(self, workdir):
        from crisis_scope.config import config_from_dict
        from crisis_scope.errors import SchemaError

        base = json.loads((workdir["root"] / "config.json").read_text())
        base["frobnicate"] = True
        with pytest.raises(SchemaError, match="frobnicate"):
            config_from_dict(base)

    def test_missing_data_path_rejected(self, workdir):
        from crisis_scope.config import config_from_dict
        from crisis_scope.errors import ValidationError

        base = json.loads((workdir["root"] / "config.json").read_text())
        base["data"]["messages"] = ["/nope/missing.jsonl"]
        with pytest.raises(ValidationError, match="missing.jsonl"):
            config_from_dict(base)


@pytest.fixture(scope="module")
def client(workdir):
    session = Session.from_config(load_config(workdir["config"]))
    return TestClient(create_app(session))


class TestService:
    def test_events_listing_matches_fixture(self, client):
        body = client.get("/events").json()
        events = {e["event_id"]: e for e in body["events"]}
        assert events["stormtest"]["messages"] == 150
        assert events["stormtest"]["informative"] == 150
        assert events["tinyevent"]["messages"] == 5
        assert body["meta"]["seed"] == 3

    def test_message_paging_and_filters(self, client):
        body = client.get(
            "/events/stormtest/messages", params={"lang": "aa", "limit": 10}
        ).json()
        assert body["limit"] == 10
        assert len(body["messages"]) == 10
        assert all(m["lang"] == "aa" for m in body["messages"])
        second = client.get(
            "/events/stormtest/messages",
            params={"lang": "aa", "limit": 10, "offset": 10},
        ).json()
        first_ids = {m["id"] for m in body["messages"]}
        assert first_ids.isdisjoint({m["id"] for m in second["messages"]})

    def test_unknown_event_is_404(self, client):
        assert client.get("/events/nope/messages").status_code == 404

    def test_query_upsert_and_schema_errors(self, client):
        response = client.post(
            "/queries",
            json={"category": "Weather", "keywords": ["storm"], "templates": [],
                  "prototypes": []},
        )
        assert response.status_code == 200
        assert response.json()["id"]
        # all components empty -> 400
        assert (
            client.post(
                "/queries",
                json={"category": "Weather", "keywords": [], "templates": [],
                      "prototypes": []},
            ).status_code
            == 400
        )
        # unknown category -> 400
        assert (
            client.post(
                "/queries", json={"category": "Gossip", "keywords": ["x"]}
            ).status_code
            == 400
        )
        # missing required field -> 400
        assert client.post("/queries", json={"keywords": ["x"]}).status_code == 400

    def test_rank_contract(self, client):
        response = client.post(
            "/rank", json={"query_id": "weather", "event_id": "stormtest", "k": 5}
        )
        assert response.status_code == 200
        body = response.json()
        candidates = body["candidates"]
        assert len(candidates) == 5
        scores = [c["score"] for c in candidates]
        assert scores == sorted(scores, reverse=True)
        assert set(candidates[0]["features"]) == {
            "kw_avg", "kw_max", "tpl_avg", "tpl_max", "proto_avg", "proto_max",
        }
        assert body["meta"]["encoder"].startswith("mock:48")

    def test_rank_unknown_ids_are_404(self, client):
        assert (
            client.post("/rank", json={"query_id": "nope", "event_id": "stormtest"})
            .status_code
            == 404
        )
        assert (
            client.post("/rank", json={"query_id": "weather", "event_id": "nope"})
            .status_code
            == 404
        )

    def test_identical_requests_return_identical_bodies(self, client):
        payload = {"query_id": "water", "event_id": "stormtest", "k": 7}
        first = client.post("/rank", json=payload)
        second = client.post("/rank", json=payload)
        assert first.content == second.content

    def test_summarize_regular_and_degenerate_equivalence(self, client):
        regular = client.post(
            "/summarize",
            json={"query_id": "weather", "event_id": "tinyevent", "mode": "regular"},
        )
        diversified = client.post(
            "/summarize",
            json={"query_id": "weather", "event_id": "tinyevent",
                  "mode": "diversified"},
        )
        assert regular.status_code == diversified.status_code == 200
        assert (
            regular.json()["summary"]["full_text"]
            == diversified.json()["summary"]["full_text"]
        )

    def test_summarize_diversified_structure(self, client):
        response = client.post(
            "/summarize",
            json={"query_id": "weather", "event_id": "stormtest",
                  "mode": "diversified", "budget": 60},
        )
        assert response.status_code == 200
        summary = response.json()["summary"]
        sizes = [s["cluster_size"] for s in summary["segments"]]
        assert sizes == sorted(sizes, reverse=True)
        returned_ids = {
            mid for segment in summary["segments"] for mid in segment["source_ids"]
        }
        ranked = client.post(
            "/rank", json={"query_id": "weather", "event_id": "stormtest"}
        ).json()["candidates"]
        assert returned_ids == {c["message_id"] for c in ranked}

    def test_bad_mode_is_400(self, client):
        assert (
            client.post(
                "/summarize",
                json={"query_id": "weather", "event_id": "tinyevent", "mode": "fancy"},
            ).status_code
            == 400
        )

    def test_saving_modified_query_changes_rank_output(self, client):
        payload = {"query_id": "casualties", "event_id": "stormtest", "k": 10}
        before = client.post("/rank", json=payload).json()["candidates"]
        # strengthen the query with an extra keyword taken from a filler text
        queries = client.get("/queries").json()["queries"]
        modified = dict(queries["casualties"])
        modified["keywords"] = list(modified["keywords"]) + ["hospital"]
        response = client.post("/queries", json={"id": "casualties", **modified})
        assert response.status_code == 200
        after = client.post("/rank", json=payload).json()["candidates"]
        assert before != after
