import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from falldetect.errors import ConfigError, EmptyRecordingError, ParseError
from falldetect.ingest import (
    DEFAULT_SENSORS,
    Label,
    RawRecording,
    RecordingMeta,
    SensorSpec,
    calibrate,
    generate_synthetic,
    label_from_name,
    parse_recording,
    quantize,
    scan_corpus,
    serialize_recording,
    write_synthetic_corpus,
)

META = RecordingMeta("D01", "SA01", 1, Label.ADL, "x.txt")


def test_label_from_name_fall():
    m = label_from_name("F01_SE06_R02.txt")
    assert (m.activity_code, m.subject_code, m.trial, m.label) == ("F01", "SE06", 2, Label.FALL)


def test_label_from_name_adl():
    m = label_from_name("D05_SA11_R03.txt")
    assert (m.activity_code, m.subject_code, m.trial, m.label) == ("D05", "SA11", 3, Label.ADL)


@pytest.mark.parametrize("name", ["notes.md", "Readme.txt", "F01_SE06.txt", "F01_SE06_R00.txt"])
def test_label_from_name_rejects(name):
    with pytest.raises(ParseError, match=name.split(".")[0]):
        label_from_name(name)


def test_scan_two_files(tmp_path):
    (tmp_path / "D01_SA01_R01.txt").write_text("0,0,0,0,0,0,0,0,0;\n")
    sub = tmp_path / "SE06"
    sub.mkdir()
    (sub / "F01_SE06_R02.txt").write_text("0,0,0,0,0,0,0,0,0;\n")
    (tmp_path / "Readme.txt").write_text("about the dataset")
    res = scan_corpus(tmp_path)
    assert [m.activity_code for m in res.entries] == ["D01", "F01"]
    assert res.counts == {Label.FALL: 1, Label.ADL: 1}
    assert len(res.skipped) == 1


def test_scan_empty(tmp_path):
    assert scan_corpus(tmp_path).entries == []


def test_scan_missing_root(tmp_path):
    with pytest.raises(FileNotFoundError):
        scan_corpus(tmp_path / "nope")


def test_scan_ordering_is_lexicographic(tmp_path):
    names = ["F02_SA01_R01.txt", "D10_SA01_R01.txt", "D02_SA01_R01.txt"]
    for n in names:
        (tmp_path / n).write_text("1,1,1,1,1,1,1,1,1\n")
    assert [os.path.basename(m.source_path) for m in scan_corpus(tmp_path).entries] == sorted(names)


def test_parse_single_line():
    raw = parse_recording(b"9,-239,1024,0,0,0,36,-956,4096;", META)
    assert raw.n_samples == 1
    assert raw.channels[:, 0].tolist() == [9, -239, 1024, 0, 0, 0, 36, -956, 4096]


def test_parse_blank_lines_and_crlf():
    raw = parse_recording(b"1,2,3,4,5,6,7,8,9;\r\n\r\n  \r\n", META)
    assert raw.n_samples == 1


def test_parse_preserves_order():
    raw = parse_recording("1,0,0,0,0,0,0,0,0\n2,0,0,0,0,0,0,0,0\n3,0,0,0,0,0,0,0,0;\n", META)
    assert raw.channels[0].tolist() == [1, 2, 3]


def test_parse_wrong_field_count_names_line():
    with pytest.raises(ParseError) as exc:
        parse_recording("1,2,3,4,5,6,7,8,9;\n1,2,3;\n", META)
    assert exc.value.line == 2


def test_parse_non_integer():
    with pytest.raises(ParseError):
        parse_recording("1,2,3,4,5,6,7,8,x;\n", META)


def test_parse_empty():
    with pytest.raises(EmptyRecordingError):
        parse_recording("\n\n", META)


def test_scale_formula():
    assert DEFAULT_SENSORS[0].scale == 32 / 8192 == 1 / 256
    assert DEFAULT_SENSORS[1].scale == 4000 / 65536


def test_calibrate_values():
    ch = np.zeros((9, 2), dtype=np.int64)
    ch[0, 1] = 256
    ch[3, 1] = 16384
    rec = calibrate(RawRecording(META, ch))
    assert rec.channels[0, 1] == 1.0
    assert rec.channels[3, 1] == 1000.0
    assert np.all(rec.channels[:, 0] == 0.0)
    assert rec.n_samples == 2


def test_calibrate_spec_mismatch():
    raw = RawRecording(META, np.zeros((9, 1), dtype=np.int64))
    with pytest.raises(ConfigError):
        calibrate(raw, DEFAULT_SENSORS[:2])


@pytest.mark.parametrize("bits", [7, 33])
def test_sensor_spec_bits_range(bits):
    with pytest.raises(ConfigError):
        SensorSpec("s", "accelerometer", 2.0, bits)


def test_sensor_spec_range_positive():
    with pytest.raises(ConfigError):
        SensorSpec("s", "gyroscope", 0.0, 16)


rows_strategy = st.lists(
    st.lists(st.integers(-(2**15), 2**15 - 1), min_size=9, max_size=9), min_size=1, max_size=40
)


@given(rows_strategy)
def test_parse_serialize_round_trip(rows):
    raw = RawRecording(META, np.array(rows, dtype=np.int64).T.copy())
    back = parse_recording(serialize_recording(raw), META)
    assert np.array_equal(back.channels, raw.channels)


@given(rows_strategy, st.integers(-8, 8))
def test_calibration_is_linear(rows, k):
    base = np.array(rows, dtype=np.int64).T.copy()
    a = calibrate(RawRecording(META, base * k)).channels
    b = k * calibrate(RawRecording(META, base)).channels
    assert np.array_equal(a, b)


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.sampled_from([Label.FALL, Label.ADL]))
def test_synthetic_quantize_round_trip(seed, label):
    rec = generate_synthetic(label, 2.0, seed)
    raw = quantize(rec)
    back = parse_recording(serialize_recording(raw), rec.meta)
    assert np.array_equal(back.channels, raw.channels)
    assert calibrate(back).n_samples == rec.n_samples


def _accel_magnitudes(rec):
    return [np.linalg.norm(rec.sensor(i), axis=0) for i in (0, 2)]


def test_synthetic_adl_near_gravity():
    rec = generate_synthetic(Label.ADL, 10.0, 42)
    for mag in _accel_magnitudes(rec):
        assert np.max(np.abs(mag - 1.0)) < 0.5


def test_synthetic_fall_has_impact():
    rec = generate_synthetic(Label.FALL, 10.0, 42)
    for mag in _accel_magnitudes(rec):
        assert mag.max() >= 3.0


def test_synthetic_deterministic():
    a = generate_synthetic("FALL", 10.0, 42)
    b = generate_synthetic("FALL", 10.0, 42)
    assert a.channels.tobytes() == b.channels.tobytes()
    assert a.n_samples == 2000


def test_synthetic_rejects_bad_duration():
    with pytest.raises(ValueError):
        generate_synthetic(Label.ADL, 0.0, 1)


def test_synthetic_corpus_scans(tmp_path):
    write_synthetic_corpus(tmp_path, 10, seed=3, duration_s=1.0)
    res = scan_corpus(tmp_path)
    assert res.counts == {Label.FALL: 10, Label.ADL: 10}
    for meta in res.entries:
        raw = parse_recording(open(meta.source_path, "rb").read(), meta)
        assert raw.channels.shape == (9, 200)
