import json
import shutil

import pytest

from gsn_forge.dataset import DatasetIncomplete, load_dataset
from gsn_forge.gateway import EchoBackend, Gateway, MockBackend, ModelSpec, RetryableError, TranscriptStore
from gsn_forge.prompts import experiment
from gsn_forge.runner import (
    LOOCV,
    METRIC_NAMES,
    EvaluationReport,
    RunMatrix,
    emit_report,
    load_report,
    render_table,
    run_matrix,
)

SE = [f"E{i}" for i in range(2, 10)]
FOUR = ["acas_xu", "bluerov2", "gpca", "im_software"]
FIVE = sorted(FOUR + ["deepmind"])
MODELS = [ModelSpec("gpt-4o"), ModelSpec("gpt-4-turbo")]


def matrix(experiments=SE, systems=FOUR, **kw):
    return RunMatrix(systems=systems, models=MODELS, experiments=[experiment(e) for e in experiments], **kw)


def test_echo_fixed_point_and_accounting(tmp_path, dataset):
    report = run_matrix(matrix(), dataset, Gateway(EchoBackend(dataset)), tmp_path)
    assert len(report.cells) == 4 * 2 * 8
    assert all(v == 1.0 for c in report.cells for v in c.median.values())
    assert all(v == 0.0 for c in report.cells for v in c.stddev.values())
    assert TranscriptStore(tmp_path / "runs").count() == 320
    assert report.verify()
    cell = report.cells[0]
    assert (tmp_path / cell.transcript).is_file()
    assert list((tmp_path / "parsed").rglob("*.gsnt"))


def test_baseline_systems(tmp_path, dataset):
    m = matrix(["E1", "E2"], baseline_systems=FIVE)
    report = run_matrix(m, dataset, Gateway(EchoBackend(dataset)), tmp_path)
    e1 = [c for c in report.cells if c.experiment == "E1"]
    assert {c.system for c in e1} == set(FIVE)
    assert TranscriptStore(tmp_path / "runs").count() == (5 + 4) * 2 * 5


def _emit_all(report, out):
    paths = []
    for fmt in ("csv", "json", "markdown"):
        paths += emit_report(report, fmt, out)
    return {p.name: p.read_bytes() for p in paths}


def test_resumable_byte_identical(tmp_path, dataset):
    m = matrix(["E2", "E9"])
    full = run_matrix(m, dataset, Gateway(EchoBackend(dataset)), tmp_path / "a")
    partial = run_matrix(m, dataset, Gateway(EchoBackend(dataset)), tmp_path / "b", cell_limit=5)
    assert partial.partial and len(partial.cells) == 5

    calls = []
    def counting(bundle, spec, run):
        calls.append(run)
        return dataset[bundle.system_name].groundtruth_text

    resumed = run_matrix(m, dataset, Gateway(MockBackend(counting)), tmp_path / "b")
    assert len(calls) == (16 - 5) * 5
    assert _emit_all(full, tmp_path / "ra") == _emit_all(resumed, tmp_path / "rb")
    assert TranscriptStore(tmp_path / "b" / "runs").count() == 16 * 5


def test_interrupted_cell_transcripts_reset(tmp_path, dataset):
    m = matrix(["E9"], systems=["acas_xu"], k=3)
    store = TranscriptStore(tmp_path / "runs")
    (tmp_path / "runs").mkdir()
    stale = store.path("E9", "acas_xu", "gpt-4o")
    stale.parent.mkdir(parents=True)
    stale.write_text('{"half": "written"}\n')
    run_matrix(m, dataset, Gateway(EchoBackend(dataset)), tmp_path)
    assert store.count() == 2 * 3
    assert len(store.read("E9", "acas_xu", "gpt-4o")) == 3


def test_failures_score_zero(tmp_path, dataset):
    def flaky(bundle, spec, run):
        if run == 2:
            raise RetryableError("HTTP 503")
        return dataset[bundle.system_name].groundtruth_text

    gw = Gateway(MockBackend(flaky), retries=1, sleep=lambda s: None)
    report = run_matrix(matrix(["E9"], systems=["gpca"], k=5), dataset, gw, tmp_path)
    for cell in report.cells:
        failed = [r for r in cell.runs if r.error]
        assert len(failed) == 1 and failed[0].scores == {m: 0.0 for m in METRIC_NAMES}
        assert len(cell.runs) == 5
        assert cell.median["ExactMatch"] == 1.0
    assert report.verify()


def test_unparseable_output_is_flagged(tmp_path, dataset):
    gw = Gateway(MockBackend(lambda b, s, i: "I cannot help with that."))
    report = run_matrix(matrix(["E9"], systems=["gpca"], k=2), dataset, gw, tmp_path)
    run = report.cells[0].runs[0]
    assert run.error is None
    assert 0.0 <= run.scores["ExactMatch"] < 0.5


def test_lenient_llm_output_scores_in_range(tmp_path, dataset):
    def noisy(bundle, spec, run):
        text = dataset[bundle.system_name].groundtruth_text
        return "Sure! Here it is:\n\n" + text.replace("Solution", "Evidence", 1) + "\nLet me know.\n"

    report = run_matrix(matrix(["E9"], systems=["acas_xu"], k=2), dataset, Gateway(MockBackend(noisy)), tmp_path)
    cell = report.cells[0]
    assert all(r.parsed and r.anomalies >= 1 for r in cell.runs)
    assert all(0.8 < v <= 1.0 for v in cell.median.values())


def test_loocv_shape(tmp_path, dataset):
    m = RunMatrix(systems=FIVE, models=MODELS, experiments=[experiment("E2")], example_system=LOOCV)
    report = run_matrix(m, dataset, Gateway(EchoBackend(dataset)), tmp_path)
    columns, rows = report.table("ExactMatch")
    assert columns == FIVE
    for model in ("gpt-4o", "gpt-4-turbo"):
        nulls = [(s, c) for s, mod, values in rows if mod == model for c in columns if values[c] is None]
        assert nulls == [(s, s) for s in FIVE]
    assert TranscriptStore(tmp_path / "runs").count() == 5 * 4 * 2 * 5
    assert (tmp_path / "runs" / "E2-example-deepmind").is_dir()
    markdown = render_table(report, "Bleu", "markdown")
    assert markdown.count("Null") == 10


def test_loocv_skips_experiments_without_example(dataset):
    m = RunMatrix(systems=FIVE, models=MODELS[:1], experiments=[experiment("E1"), experiment("E3")], example_system=LOOCV)
    assert m.cells() == []


def test_json_round_trip(tmp_path, dataset):
    report = run_matrix(matrix(["E2"], systems=["gpca"], k=2), dataset, Gateway(EchoBackend(dataset)), tmp_path)
    (path,) = emit_report(report, "json", tmp_path / "out")
    assert load_report(path) == report
    assert EvaluationReport.from_dict(json.loads(path.read_text())) == report


def test_verify_detects_tampering(tmp_path, dataset):
    report = run_matrix(matrix(["E2"], systems=["gpca"], k=2), dataset, Gateway(EchoBackend(dataset)), tmp_path)
    report.cells[0].median["Bleu"] = 0.5
    assert not report.verify()


def test_e1_only_single_column(tmp_path, dataset):
    report = run_matrix(matrix(["E1"], systems=FIVE, k=1), dataset, Gateway(EchoBackend(dataset)), tmp_path)
    text = render_table(report, "CosineSim", "markdown")
    assert "| System | Model | E1 |" in text
    assert text.count("**1.0000 (0.0000)**") == 10
    csv_text = render_table(report, "CosineSim", "csv")
    assert csv_text.splitlines()[0] == "system,model,E1,E1_sd"


def test_dataset_incomplete(tmp_path, dataset):
    shutil.copytree(dataset.root, tmp_path / "ds")
    (tmp_path / "ds" / "gpca" / "domain.txt").unlink()
    with pytest.raises(DatasetIncomplete) as info:
        load_dataset(tmp_path / "ds")
    assert info.value.missing == ["gpca/domain.txt"]
    partial = load_dataset(tmp_path / "ds", systems=["acas_xu"])
    with pytest.raises(DatasetIncomplete):
        run_matrix(matrix(["E9"]), partial, Gateway(EchoBackend(partial)), tmp_path / "out")


def test_matrix_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"systems": ["gpca"], "models": ["gpt-4o"], "experiments": ["E2"], "k": 3}))
    m = RunMatrix.load(path)
    assert m.k == 3 and m.example_system == "deepmind" and not m.loocv
    with pytest.raises(ValueError):
        RunMatrix(["gpca"], MODELS, [experiment("E2")], k=0)
