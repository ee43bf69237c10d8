import math
from collections import Counter

import pytest

from beg import BegTriple, OmegaElement, PsiMap, check_compatibility
from core_groups import AbelianLGroup
from matrix_models import SampleConfig
from measures import MeasureParams
from montecarlo import (
    ComparisonReport,
    Thresholds,
    TripleHistogram,
    _z,
    acceptance_failures,
    compare,
    conditional_frequencies,
    convergence_diagnostic,
    estimate_moment,
    histogram_tv,
    run_experiment,
)
from pipeline import SampleOutcome, decode_key, encode_key, key_group, process_sample
from services.report_service import (
    gerar_pdf_relatorio,
    histogram_record,
    ler_json,
    load_histogram,
    save_histogram,
    save_report,
)


@pytest.fixture(scope="module")
def small_run():
    cfg = SampleConfig(3, 1, 4, K=9, seed=7, samples=300)
    return run_experiment(cfg, "linear", workers=1)


def _cyclic(n=1):
    group = AbelianLGroup(3, (1,))
    return BegTriple(group, n, OmegaElement.zero(group, n), PsiMap(group, n, ((1,),)))


def test_key_round_trip():
    t = _cyclic()
    key = encode_key(t)
    assert key == "c|3|1|1||1"
    assert decode_key(key) == (t, False)
    assert key_group(key) == AbelianLGroup(3, (1,))
    trivial = BegTriple.trivial(3, 2)
    assert decode_key(encode_key(trivial, coarse=True)) == (trivial, True)


def test_malformed_keys():
    with pytest.raises(ValueError):
        decode_key("c|3|1")
    with pytest.raises(ValueError):
        decode_key("x|3|1|1||1")


def test_process_sample_is_deterministic():
    cfg = SampleConfig(3, 1, 3, K=8, seed=4, t=1)
    assert process_sample(cfg, "linear", 5) == process_sample(cfg, "linear", 5)


def test_histogram_bookkeeping(small_run):
    h = small_run
    h.check()
    assert h.total == 300
    assert sum(h.counts.values()) + h.unresolved == h.total
    for key in h.counts:
        triple, coarse = decode_key(key)
        assert not coarse
        assert check_compatibility(triple.group, triple.omega, triple.psi)


def test_inconsistent_histogram_is_detected():
    h = TripleHistogram(Counter({"c|3|1|||": 2}), total=3, unresolved=0)
    with pytest.raises(ValueError):
        h.check()


def test_unresolved_outcomes_are_counted_apart():
    h = TripleHistogram()
    h.add(SampleOutcome(None, escalations=3))
    h.add(SampleOutcome("c|3|1|||"))
    assert (h.total, h.unresolved, h.resolved, h.escalations) == (2, 1, 1, 3)
    assert h.frequency("c|3|1|||") == 1.0


def test_same_seed_same_histogram(small_run):
    again = run_experiment(SampleConfig(3, 1, 4, K=9, seed=7, samples=300), "linear", workers=1)
    assert again.counts == small_run.counts
    assert histogram_record(again)["fingerprint"] == histogram_record(small_run)["fingerprint"]


def test_parallel_run_matches_serial():
    cfg = SampleConfig(3, 1, 3, K=8, seed=3, samples=40)
    serial = run_experiment(cfg, "linear", workers=1)
    parallel = run_experiment(cfg, "linear", workers=2)
    assert serial.counts == parallel.counts
    assert serial.total == parallel.total


def test_empty_experiment():
    h = run_experiment(SampleConfig(3, 1, 2, samples=0), "linear", workers=1)
    assert h.total == 0 and not h.counts


def test_unknown_model():
    with pytest.raises(ValueError):
        run_experiment(SampleConfig(3, 1, 2, samples=1), "quadratic", workers=1)


def test_histogram_file_round_trip(small_run, tmp_path):
    path = save_histogram(small_run, str(tmp_path / "h"))
    assert path.endswith(".json")
    assert load_histogram(path) == small_run


def test_comparison_report(small_run):
    p = MeasureParams(3, 1, 0)
    report = compare(small_run, p, 27)
    assert isinstance(report, ComparisonReport)
    assert 0.0 <= report.tv <= 1.0
    assert 0.0 <= report.p_value <= 1.0
    assert 0.0 < report.support_mass <= 1.0
    assert report.resolved == small_run.resolved
    assert sum(row.expected for row in report.rows) == pytest.approx(report.support_mass, abs=1e-8)
    assert sum(row.observed for row in report.rows) <= report.resolved
    # no limite folgado, um experimento pequeno passa nos critérios
    assert not acceptance_failures(report, Thresholds(z_max=1e9, alpha=0.0, max_unresolved=1.0))


def test_z_scores():
    assert _z(5, 0.5, 10) == 0.0
    assert _z(1, 0.0, 10) == math.inf
    assert _z(0, 0.0, 10) == 0.0
    assert _z(3, 0.5, 0) == 0.0


def test_moment_estimates(small_run):
    trivial = estimate_moment(small_run, BegTriple.trivial(3, 1))
    assert trivial.mean == 1.0 and trivial.exact
    est = estimate_moment(small_run, _cyclic())
    assert est.low <= est.mean <= est.high
    assert est.stderr >= 0.0
    # E #Surj(*, (Z/3, 0, (1))) = 1/3 sob μ; margem larga com poucas amostras
    assert abs(est.mean - 1 / 3) < 6 * est.stderr + 0.1


def test_histogram_tv_and_conditionals(small_run):
    assert histogram_tv(small_run, small_run) == 0.0
    empty = TripleHistogram()
    empty.add(SampleOutcome(encode_key(BegTriple.trivial(3, 1))))
    assert 0.0 <= histogram_tv(small_run, empty) <= 1.0
    rows = conditional_frequencies(small_run, AbelianLGroup(3, (1,)))
    if rows:
        assert sum(r.frequency for r in rows) == pytest.approx(1.0)


def test_report_files(small_run, reports_dir):
    report = compare(small_run, MeasureParams(3, 1, 0), 27)
    path = save_report(report, "relatorio", ["χ² = 1.00"], histogram_record(small_run)["fingerprint"])
    data = ler_json(path)
    assert data["acceptance"]["passed"] is False
    assert len(data["rows"]) == len(report.rows)
    pdf = gerar_pdf_relatorio(report, "relatorio", ["χ² = 1.00"])
    assert pdf == str(reports_dir / "relatorio.pdf")
    with open(pdf, "rb") as f:
        assert f.read(4) == b"%PDF"


def test_convergence_diagnostic_reports_each_g():
    cfg = SampleConfig(3, 1, 1, K=8, seed=1, samples=30)
    out = convergence_diagnostic(cfg, "linear", [1, 2], MeasureParams(3, 1, 0), 9, workers=1)
    assert [g for g, _ in out] == [1, 2]
    assert all(0.0 <= tv <= 1.0 for _, tv in out)
