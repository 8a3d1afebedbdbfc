import json

import pytest
from click.testing import CliRunner

from nca.cli import main
from nca.studyio import reference_network, serialize_network, serialize_study


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def fixture_files(tmp_path):
    spec, study = reference_network()
    net = tmp_path / "plant.nca-net.json"
    stu = tmp_path / "plant.nca-study.json"
    net.write_bytes(serialize_network(spec))
    stu.write_bytes(serialize_study(study))
    return net, stu


class TestRun:
    def test_fixture_run_exits_one_with_report(self, runner, tmp_path):
        out = tmp_path / "report.csv"
        result = runner.invoke(main, ["run", "--fixture", "--out", str(out)])
        assert result.exit_code == 1
        text = out.read_text()
        assert text.startswith("bus_id,nominal_kv,voltage_pct,class\n")
        assert "y-winding-outage" in text
        assert "ranking" in result.output

    def test_file_inputs_match_fixture_flag(self, runner, tmp_path, fixture_files):
        net, stu = fixture_files
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        ra = runner.invoke(main, ["run", "--fixture", "--out", str(out_a)])
        rb = runner.invoke(
            main, ["run", "--network", str(net), "--study", str(stu), "--out", str(out_b)]
        )
        assert ra.exit_code == rb.exit_code == 1
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_empty_study_exits_zero_header_only(self, runner, tmp_path, fixture_files):
        net, _ = fixture_files
        stu = tmp_path / "empty.nca-study.json"
        stu.write_text(json.dumps({"contingencies": []}))
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main, ["run", "--network", str(net), "--study", str(stu), "--out", str(out)]
        )
        assert result.exit_code == 0
        assert out.read_bytes() == b"bus_id,nominal_kv,voltage_pct,class\n"

    def test_malformed_network_exits_three(self, runner, tmp_path, fixture_files):
        _, stu = fixture_files
        net = tmp_path / "bad.nca-net.json"
        net.write_text(json.dumps({"buses": [{"id": "a"}]}))
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main, ["run", "--network", str(net), "--study", str(stu), "--out", str(out)]
        )
        assert result.exit_code == 3
        assert "nominal_kv" in result.output

    def test_missing_file_exits_three(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["run", "--network", str(tmp_path / "nope.json"),
             "--study", str(tmp_path / "nope2.json"), "--out", str(tmp_path / "r.csv")],
        )
        assert result.exit_code == 3

    def test_json_format(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["run", "--fixture", "--out", str(out), "--format", "json"]
        )
        assert result.exit_code == 1
        doc = json.loads(out.read_text())
        assert {c["id"] for c in doc["contingencies"]} >= {"y-winding-outage"}
        assert doc["ranking"][0]["contingency"] == "y-winding-outage"
        ras = next(c for c in doc["contingencies"] if c["id"] == "y-winding-outage")["ras"]
        assert ras["cleared"] is True

    def test_byte_identical_across_worker_counts(self, runner, tmp_path):
        outputs = []
        for n, workers in enumerate(("1", "4", "4")):
            out = tmp_path / f"report{n}.csv"
            result = runner.invoke(
                main, ["run", "--fixture", "--out", str(out), "--workers", workers]
            )
            assert result.exit_code == 1
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]


class TestVerify:
    def test_fixture_ok(self, runner):
        result = runner.invoke(main, ["verify", "--fixture"])
        assert result.exit_code == 0
        assert "ok:" in result.output

    def test_schema_error_named(self, runner, tmp_path, fixture_files):
        _, stu = fixture_files
        net = tmp_path / "bad.json"
        net.write_text(json.dumps({"buses": [{"id": "a", "nominal_kv": 1.0, "zz": 1}]}))
        result = runner.invoke(
            main, ["verify", "--network", str(net), "--study", str(stu)]
        )
        assert result.exit_code == 3
        assert "zz" in result.output

    def test_requires_inputs_without_fixture(self, runner):
        result = runner.invoke(main, ["verify"])
        assert result.exit_code == 3


class TestServeLifecycle:
    def test_interrupt_preserves_history_and_sequence(self, tmp_path):
        import json as json_mod
        import signal
        import subprocess
        import time
        import urllib.request

        import socket

        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        history = tmp_path / "history.jsonl"
        cmd = ["python3", "-m", "nca.cli", "serve", "--fixture",
               "--port", str(port), "--cycle-ms", "150",
               "--history", str(history)]

        def wait_for_records(minimum, timeout=30.0):
            deadline = time.time() + timeout
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/api/history?from=0&to={2**60}",
                        timeout=2,
                    ) as response:
                        records = json_mod.loads(response.read())
                    if len(records) >= minimum:
                        return records
                except OSError:
                    pass
                time.sleep(0.1)
            raise AssertionError("service never produced enough cycles")

        proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        try:
            wait_for_records(3)
        finally:
            proc.send_signal(signal.SIGINT)
            proc.wait(timeout=15)

        lines = [l for l in history.read_text().splitlines() if l.strip()]
        assert len(lines) >= 3
        first_run_last_seq = max(json_mod.loads(l)["sequence"] for l in lines)

        proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        try:
            records = wait_for_records(len(lines) + 1)
        finally:
            proc.send_signal(signal.SIGINT)
            proc.wait(timeout=15)

        # Replay kept every pre-interrupt record and numbering continued.
        sequences = [r["sequence"] for r in records]
        assert sequences[: len(lines)] == sorted(
            json_mod.loads(l)["sequence"] for l in lines
        )
        assert max(sequences) > first_run_last_seq


class TestExportFixture:
    def test_written_files_parse(self, runner, tmp_path):
        result = runner.invoke(main, ["export-fixture", "--dir", str(tmp_path)])
        assert result.exit_code == 0
        spec, study = reference_network()
        net = (tmp_path / "reference.nca-net.json").read_bytes()
        stu = (tmp_path / "reference.nca-study.json").read_bytes()
        assert net == serialize_network(spec)
        assert stu == serialize_study(study)
