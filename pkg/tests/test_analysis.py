from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dep_jar_from_corpus, make_jar
from gavstamp.analysis import (
    AnnotationIndex,
    LoadEvent,
    classify_detection,
    entry_to_binary_name,
    introspect,
    parse_load_log,
    scan_annotations,
    size_overhead,
    verify_completeness,
    write_runtime_csv,
)
from gavstamp.archive import merge_archives, process_jar
from gavstamp.coordinates import GavCoordinate
from gavstamp.depmanifest import parse_csv_manifest, parse_dependency_list
from gavstamp.errors import UntriggeredNotSubset, ZeroBaseline

GAV_A = GavCoordinate("org.example.alpha", "alpha-lib", "1.0.0")
GAV_B = GavCoordinate("org.example.beta", "beta-lib", "2.1.3")
GAV_C = GavCoordinate("com.example.gamma", "gamma-util", "0.9")


def _annotated_jar(tmp_path, corpus, name, gav, class_names):
    pristine = dep_jar_from_corpus(tmp_path / f"{name}-pristine.jar", corpus, class_names)
    out = tmp_path / f"{name}.jar"
    process_jar(pristine, out, gav)
    return out


# -- scanning --------------------------------------------------------------------

def test_scan_processed_jar(tmp_path, corpus):
    jar = _annotated_jar(tmp_path, corpus, "alpha", GAV_A,
                         ["empty_v52.class", "plain_v52.class", "constants_v52.class"])
    index = scan_annotations([jar])
    assert set(index.by_class.values()) == {GAV_A}
    assert len(index.by_class) == 3
    assert not index.unannotated
    assert "fix.v52.Plain52" in index.by_class


def test_scan_pristine_jar(tmp_path, corpus):
    jar = dep_jar_from_corpus(tmp_path / "p.jar", corpus, ["plain_v52.class"])
    index = scan_annotations([jar])
    assert not index.by_class
    assert index.unannotated == {"fix.v52.Plain52"}


def test_scan_merged_archive_partitions(tmp_path, corpus):
    jars = [
        _annotated_jar(tmp_path, corpus, "a", GAV_A, ["plain_v52.class"]),
        _annotated_jar(tmp_path, corpus, "b", GAV_B, ["plain_v53.class"]),
        _annotated_jar(tmp_path, corpus, "c", GAV_C, ["plain_v54.class"]),
    ]
    merged = tmp_path / "uber.jar"
    merge_archives(jars, merged)
    index = scan_annotations([merged])
    assert index.gavs() == {GAV_A, GAV_B, GAV_C}
    groups: dict[GavCoordinate, set[str]] = {}
    for cls, gav in index.by_class.items():
        groups.setdefault(gav, set()).add(cls)
    assert len(groups) == 3


def test_scan_excludes_module_descriptor(tmp_path, corpus):
    jar = make_jar(tmp_path / "m.jar", {
        "module-info.class": corpus["module-info_v53.class"],
        "fix/v52/Plain52.class": corpus["plain_v52.class"],
    })
    index = scan_annotations([jar])
    assert index.class_total == 1


def test_scan_is_deterministic_across_order(tmp_path, corpus):
    a = _annotated_jar(tmp_path, corpus, "a", GAV_A, ["plain_v52.class"])
    b = _annotated_jar(tmp_path, corpus, "b", GAV_B, ["plain_v53.class"])
    assert scan_annotations([a, b]).by_class == scan_annotations([b, a]).by_class


def test_entry_to_binary_name():
    assert entry_to_binary_name("org/apache/X.class") == "org.apache.X"
    assert entry_to_binary_name("META-INF/versions/11/org/apache/X.class") == "org.apache.X"
    assert entry_to_binary_name("a/B$C.class") == "a.B$C"


# -- completeness -----------------------------------------------------------------

def test_verify_complete(tmp_path, corpus):
    jar = _annotated_jar(tmp_path, corpus, "alpha", GAV_A, ["plain_v52.class"])
    manifest = parse_csv_manifest("org.example.alpha,alpha-lib,1.0.0\n")
    result = verify_completeness(scan_annotations([jar]), manifest)
    assert (result.dep_found, result.dep_expected) == (1, 1)
    assert (result.class_annotated, result.class_total) == (1, 1)
    assert result.complete
    assert not result.missing_gavs and not result.extra_gavs


def test_verify_test_scope_excluded(tmp_path, corpus):
    jar = _annotated_jar(tmp_path, corpus, "alpha", GAV_A, ["plain_v52.class"])
    manifest = parse_dependency_list(
        "org.example.alpha:alpha-lib:jar:1.0.0:compile\n"
        "org.example.testonly:mock-kit:jar:5.0:test\n")
    result = verify_completeness(scan_annotations([jar]), manifest)
    assert result.dep_expected == 1
    assert result.complete


def test_verify_empty_index(tmp_path):
    manifest = parse_csv_manifest("g,a,1\ng,b,2\n")
    result = verify_completeness(AnnotationIndex(), manifest)
    assert (result.dep_found, result.dep_expected) == (0, 2)
    assert result.missing_gavs == frozenset(manifest.gavs())


# -- load logs ---------------------------------------------------------------------

def test_parse_unified_format():
    line = "[0.123s][info][class,load] org.apache.pdfbox.Loader source: file:/app/app.jar"
    parsed = parse_load_log(line)
    assert parsed.events == [LoadEvent("org.apache.pdfbox.Loader", "file:/app/app.jar")]
    assert parsed.ignored_lines == 0


def test_parse_legacy_format():
    parsed = parse_load_log("[Loaded picocli.CommandLine from file:/app/app.jar]")
    assert parsed.events == [LoadEvent("picocli.CommandLine", "file:/app/app.jar")]


def test_parse_ignores_noise():
    text = ("starting up...\n"
            "[0.1s][info][class,load] a.B source: jrt:/java.base\n"
            "some stdout chatter\n"
            "\n"
            "[Loaded c.D from file:/x.jar]\n"
            "done\n")
    parsed = parse_load_log(text)
    assert [e.class_name for e in parsed.events] == ["a.B", "c.D"]
    assert parsed.ignored_lines == 3


def test_parse_keeps_input_order_and_duplicates():
    text = ("[0.1s][info][class,load] a.B source: f\n"
            "[0.2s][info][class,load] a.B source: f\n")
    assert len(parse_load_log(text).events) == 2


# -- introspection -----------------------------------------------------------------

def _index(mapping: dict[str, GavCoordinate]) -> AnnotationIndex:
    return AnnotationIndex(by_class=dict(mapping))


def test_introspect_dedup_and_order():
    index = _index({"a.One": GAV_A, "a.Two": GAV_A, "b.One": GAV_B})
    events = [LoadEvent("a.One"), LoadEvent("b.One"), LoadEvent("a.Two"), LoadEvent("a.One")]
    deps = introspect(events, index)
    assert deps.gavs == (GAV_A, GAV_B)
    assert not deps.unattributed


def test_introspect_platform_classes_unattributed():
    deps = introspect([LoadEvent("java.lang.String")], _index({"a.One": GAV_A}))
    assert deps.gavs == ()
    assert deps.unattributed == {"java.lang.String"}


def test_introspect_never_fabricates():
    index = _index({"a.One": GAV_A})
    deps = introspect([LoadEvent("a.One"), LoadEvent("ghost.X")], index)
    assert set(deps.gavs) <= set(index.by_class.values())


@given(st.permutations(["a.One", "b.One", "c.One", "a.Two", "java.lang.X"]))
def test_introspect_set_is_order_insensitive(order):
    index = _index({"a.One": GAV_A, "a.Two": GAV_A, "b.One": GAV_B, "c.One": GAV_C})
    deps = introspect([LoadEvent(n) for n in order], index)
    assert set(deps.gavs) == {GAV_A, GAV_B, GAV_C}
    assert len(deps.gavs) == 3


def test_introspect_monotone_under_appends():
    index = _index({"a.One": GAV_A, "b.One": GAV_B})
    events = [LoadEvent("a.One")]
    before = set(introspect(events, index).gavs)
    events.append(LoadEvent("b.One"))
    after = set(introspect(events, index).gavs)
    assert before <= after


# -- CSV emission ------------------------------------------------------------------

def test_write_csv_single_row():
    deps = introspect([LoadEvent("p.C")], _index({"p.C": GavCoordinate("info.picocli", "picocli", "4.7.6")}))
    assert write_runtime_csv(deps) == "info.picocli,picocli,4.7.6\n"


def test_write_csv_empty():
    deps = introspect([], _index({}))
    assert write_runtime_csv(deps) == ""


def test_write_csv_sorted_flag():
    index = _index({"b.One": GAV_B, "a.One": GAV_A})
    deps = introspect([LoadEvent("b.One"), LoadEvent("a.One")], index)
    rows = write_runtime_csv(deps, sort=True).splitlines()
    assert rows == sorted(rows)


def test_csv_round_trip_with_manifest_parser():
    index = _index({"a.One": GAV_A, "b.One": GAV_B, "c.One": GAV_C})
    deps = introspect([LoadEvent(n) for n in index.by_class], index)
    manifest = parse_csv_manifest(write_runtime_csv(deps))
    assert set(manifest.gavs()) == set(deps.gavs)


# -- confusion arithmetic --------------------------------------------------------------

def _gavs(prefix: str, n: int) -> set[GavCoordinate]:
    return {GavCoordinate(f"g.{prefix}", f"{prefix}-{i}", "1.0") for i in range(n)}


def test_classify_partial_detection_with_untriggered():
    ground_truth = _gavs("dep", 4)
    detected = set(list(ground_truth)[:3])
    untriggered = ground_truth - detected
    report = classify_detection(detected, ground_truth, untriggered)
    assert (report.tp, report.fp, report.tn, report.fn) == (3, 0, 1, 0)


def test_classify_exact_detection():
    ground_truth = _gavs("dep", 5)
    report = classify_detection(ground_truth, ground_truth, set())
    assert (report.tp, report.fp, report.tn, report.fn) == (5, 0, 0, 0)


def test_classify_false_positive():
    ground_truth = _gavs("dep", 2)
    detected = ground_truth | {GavCoordinate("x", "outsider", "9")}
    report = classify_detection(detected, ground_truth, set())
    assert report.fp == 1


def test_classify_unadjudicated_without_untriggered():
    report = classify_detection(_gavs("d", 1), _gavs("d", 2))
    assert report.tn is None and report.fn is None
    assert not report.adjudicated


def test_classify_untriggered_must_be_subset():
    with pytest.raises(UntriggeredNotSubset):
        classify_detection(set(), _gavs("d", 1), _gavs("other", 1))


@given(detected_n=st.integers(0, 6), total=st.integers(0, 8))
def test_classify_full_adjudication_yields_no_false_negatives(detected_n, total):
    ground_truth = _gavs("dep", total)
    detected = set(list(ground_truth)[: min(detected_n, total)])
    untriggered = ground_truth - detected
    report = classify_detection(detected, ground_truth, untriggered)
    assert report.fn == 0
    assert report.tp + report.tn == len(ground_truth)


# -- size overhead -------------------------------------------------------------------

def test_size_overhead_basic():
    assert size_overhead(100, 112) == 12.0


def test_size_overhead_zero_growth():
    assert size_overhead(100, 100) == 0.0


def test_size_overhead_rounding():
    assert size_overhead(3, 4) == 33.3


def test_size_overhead_zero_baseline():
    with pytest.raises(ZeroBaseline):
        size_overhead(0, 10)


def test_size_overhead_of_processed_jar(tmp_path, corpus):
    pristine = dep_jar_from_corpus(tmp_path / "p.jar", corpus,
                                   ["plain_v52.class", "constants_v52.class"])
    report = process_jar(pristine, tmp_path / "out.jar", GAV_A)
    assert size_overhead(report.bytes_before, report.bytes_after) > 0
