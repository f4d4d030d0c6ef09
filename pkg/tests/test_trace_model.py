import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proto_tqtl.trace import (
    FrameRecord,
    Label,
    PrototypeMeta,
    Trace,
    TraceInvariantError,
    TraceParseError,
    read_trace,
    write_trace,
)

CAT2 = (PrototypeMeta(0, Label.REAL), PrototypeMeta(1, Label.FAKE))


def make_trace(rows, ground_truth=Label.FAKE, predicted=Label.FAKE, catalog=CAT2, video_id="v"):
    frames = tuple(FrameRecord(i, tuple(r)) for i, r in enumerate(rows))
    return Trace(video_id, frames, ground_truth, predicted, catalog)


def test_minimal_file_roundtrip(tmp_path):
    t = make_trace([[0.5, 0.25]])
    path = tmp_path / "t.trace"
    write_trace(t, path)
    assert read_trace(path) == t


def test_arity_mismatch_rejected(tmp_path):
    t = make_trace([[0.5, 0.25]])
    path = tmp_path / "t.trace"
    write_trace(t, path)
    lines = path.read_text().splitlines()
    lines[1] = '{"frame_index": 0, "similarities": [0.5, 0.25, 0.75]}'
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceInvariantError, match="similarity arity mismatch"):
        read_trace(path)


def test_score_out_of_range_rejected_before_writing(tmp_path):
    bad = make_trace([[1.5, 0.25]])
    path = tmp_path / "t.trace"
    with pytest.raises(TraceInvariantError, match="similarity out of range"):
        write_trace(bad, path)
    assert not path.exists()


def test_zero_score_rejected():
    with pytest.raises(TraceInvariantError, match="similarity out of range"):
        make_trace([[0.0, 0.5]]).validate()


def test_empty_trace_rejected(tmp_path):
    with pytest.raises(TraceInvariantError, match="trace length"):
        write_trace(make_trace([]), tmp_path / "t.trace")


def test_frame_order_rejected():
    frames = (FrameRecord(0, (0.5, 0.5)), FrameRecord(2, (0.5, 0.5)))
    with pytest.raises(TraceInvariantError, match="frame index order"):
        Trace("v", frames, Label.REAL, Label.REAL, CAT2).validate()


def test_catalog_ids_must_be_contiguous():
    cat = (PrototypeMeta(0, Label.REAL), PrototypeMeta(2, Label.FAKE))
    with pytest.raises(TraceInvariantError, match="catalog ids"):
        make_trace([[0.5, 0.5]], catalog=cat).validate()


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "t.trace"
    t = make_trace([[0.5, 0.25], [0.5, 0.25]])
    write_trace(t, path)
    lines = path.read_text().splitlines()
    lines[2] = "{not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceParseError, match="line 3"):
        read_trace(path)


def test_header_t_v_must_match(tmp_path):
    path = tmp_path / "t.trace"
    write_trace(make_trace([[0.5, 0.25], [0.5, 0.25]]), path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join([lines[0], lines[1]]) + "\n")
    with pytest.raises(TraceInvariantError, match="trace length"):
        read_trace(path)


def test_write_is_canonical(tmp_path):
    t = make_trace([[0.2, 1.0], [0.1, 2.0 / 3.0]])
    a, b = tmp_path / "a", tmp_path / "b"
    write_trace(t, a)
    write_trace(read_trace(a), b)
    assert a.read_bytes() == b.read_bytes()


@st.composite
def traces(draw):
    m = draw(st.integers(1, 5))
    length = draw(st.integers(1, 6))
    catalog = tuple(PrototypeMeta(i, draw(st.sampled_from(list(Label)))) for i in range(m))
    score = st.floats(min_value=0.0, max_value=1.0, exclude_min=True, allow_nan=False)
    rows = draw(st.lists(st.lists(score, min_size=m, max_size=m), min_size=length, max_size=length))
    return make_trace(
        rows,
        ground_truth=draw(st.sampled_from(list(Label))),
        predicted=draw(st.sampled_from(list(Label))),
        catalog=catalog,
        video_id=draw(st.text(alphabet=st.characters(categories=("L", "N")), max_size=12)),
    )


@given(traces())
@settings(max_examples=100)
def test_roundtrip_is_bit_exact(tmp_path_factory, t):
    path = tmp_path_factory.mktemp("traces") / "t.trace"
    write_trace(t, path)
    back = read_trace(path)
    assert back == t  # dataclass equality compares every float exactly


def test_roundtrip_100_random_traces(tmp_path):
    rng = random.Random(2024)
    for i in range(100):
        m = rng.randint(1, 4)
        rows = [
            [rng.uniform(1e-9, 1.0) for _ in range(m)] for _ in range(rng.randint(1, 7))
        ]
        catalog = tuple(PrototypeMeta(j, rng.choice(list(Label))) for j in range(m))
        t = make_trace(rows, catalog=catalog, video_id=f"v{i}")
        path = tmp_path / f"{i}.trace"
        write_trace(t, path)
        assert read_trace(path) == t
        # canonical: a second write of the parsed trace is byte-identical
        path2 = tmp_path / f"{i}b.trace"
        write_trace(read_trace(path), path2)
        assert path.read_bytes() == path2.read_bytes()
