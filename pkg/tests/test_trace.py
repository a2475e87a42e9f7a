"""Codec and stream-validation tests."""

import io
import random

import pytest

from aiwc.errors import MalformedEvent
from aiwc.trace import (
    Barrier,
    Branch,
    Instruction,
    KernelBegin,
    KernelEnd,
    Memory,
    RULE_BARRIER_DIVERGENCE,
    RULE_KERNEL_END,
    RULE_OUTSIDE_SEGMENT,
    RULE_RESUME,
    RULE_WI_ID,
    RULE_WI_NESTING,
    WorkGroupBegin,
    WorkGroupEnd,
    WorkItemBegin,
    WorkItemEnd,
    WorkItemId,
    WorkItemResume,
    decode_event,
    encode_event,
    iter_trace,
    read_trace,
    validate_stream,
    write_trace,
)

from generators import random_event_objects, random_events

WI0 = WorkItemId((0, 0, 0), (0, 0, 0), (0, 0, 0))
WI1 = WorkItemId((1, 0, 0), (1, 0, 0), (0, 0, 0))


def simple_stream(body):
    return [
        KernelBegin("k", 0, (2, 1, 1), (2, 1, 1)),
        WorkGroupBegin((0, 0, 0)),
        *body,
        WorkGroupEnd((0, 0, 0)),
        KernelEnd(),
    ]


class TestEncode:
    def test_barrier_payload_free(self):
        assert encode_event(Barrier()) == '{"ev":"barrier"}'

    def test_instruction_fields(self):
        assert encode_event(Instruction("fmul", 4)) == '{"ev":"instr","opcode":"fmul","width":4}'

    def test_memory_fields(self):
        assert encode_event(Memory("load", 4096)) == '{"ev":"mem","op":"load","addr":4096}'

    def test_branch_fields(self):
        assert encode_event(Branch(7, True)) == '{"ev":"branch","site":7,"taken":true}'

    def test_single_line(self):
        for ev in random_event_objects(random.Random(1), 100):
            assert "\n" not in encode_event(ev)


class TestDecode:
    def test_round_trip_examples(self):
        assert decode_event('{"ev":"instr","opcode":"fmul","width":4}') == Instruction("fmul", 4)

    def test_round_trip_random(self):
        rng = random.Random(42)
        for ev in random_event_objects(rng, 500):
            assert decode_event(encode_event(ev)) == ev

    def test_width_zero_rejected(self):
        with pytest.raises(MalformedEvent, match="width"):
            decode_event('{"ev":"instr","opcode":"add","width":0}')

    def test_unknown_variant_rejected(self):
        with pytest.raises(MalformedEvent, match="unknown event tag"):
            decode_event('{"ev":"warp_vote"}')

    def test_missing_field_rejected(self):
        with pytest.raises(MalformedEvent, match="missing"):
            decode_event('{"ev":"mem","op":"load"}')

    def test_unknown_key_rejected(self):
        with pytest.raises(MalformedEvent, match="unknown field"):
            decode_event('{"ev":"barrier","cycles":3}')

    def test_bad_json_rejected(self):
        with pytest.raises(MalformedEvent, match="syntax"):
            decode_event("{not json")

    def test_non_object_rejected(self):
        with pytest.raises(MalformedEvent):
            decode_event("[1,2]")

    def test_negative_addr_rejected(self):
        with pytest.raises(MalformedEvent):
            decode_event('{"ev":"mem","op":"load","addr":-1}')

    def test_addr_overflow_rejected(self):
        with pytest.raises(MalformedEvent):
            decode_event('{"ev":"mem","op":"load","addr":%d}' % (1 << 64))

    def test_bool_is_not_an_int(self):
        with pytest.raises(MalformedEvent):
            decode_event('{"ev":"instr","opcode":"add","width":true}')

    def test_taken_must_be_bool(self):
        with pytest.raises(MalformedEvent):
            decode_event('{"ev":"branch","site":1,"taken":1}')

    def test_atomic_ops_decode(self):
        ev = decode_event('{"ev":"mem","op":"atomic_store","addr":8}')
        assert ev == Memory("atomic_store", 8)

    def test_line_number_in_error(self):
        with pytest.raises(MalformedEvent, match="line 12"):
            decode_event("{", line_no=12)


class TestTraceIO:
    def test_file_round_trip(self):
        events = random_events(random.Random(3), 600)
        buf = io.StringIO()
        write_trace(events, buf)
        buf.seek(0)
        assert read_trace(buf) == events

    def test_comments_skipped(self):
        text = '# header comment\n{"ev":"barrier"}\n# tail\n'
        assert read_trace(io.StringIO(text)) == [Barrier()]

    def test_blank_line_rejected(self):
        with pytest.raises(MalformedEvent, match="blank"):
            read_trace(io.StringIO('{"ev":"barrier"}\n\n'))

    def test_iter_reports_line_numbers(self):
        stream = io.StringIO('{"ev":"barrier"}\n{"ev":"nope"}\n')
        with pytest.raises(MalformedEvent, match="line 2"):
            list(iter_trace(stream))

    def test_encoding_is_canonical(self):
        events = random_events(random.Random(9), 400)
        a, b = io.StringIO(), io.StringIO()
        write_trace(events, a)
        write_trace(list(events), b)
        assert a.getvalue() == b.getvalue()


class TestValidate:
    def test_well_formed_single_item(self):
        body = [WorkItemBegin(WI0), Instruction("add", 1), WorkItemEnd(WI0)]
        assert validate_stream(simple_stream(body)).ok

    def test_generated_streams_validate(self):
        rng = random.Random(7)
        for _ in range(25):
            assert validate_stream(random_events(rng, 2000)).ok

    def test_memory_outside_segment(self):
        body = [
            WorkItemBegin(WI0), WorkItemEnd(WI0),
            Memory("load", 64),
            WorkItemBegin(WI1), WorkItemEnd(WI1),
        ]
        report = validate_stream(simple_stream(body))
        assert [v.rule for v in report.violations] == [RULE_OUTSIDE_SEGMENT]

    def test_barrier_divergence_flagged(self):
        # two work-items, only one emits a barrier: counts cannot agree
        body = [
            WorkItemBegin(WI0), Instruction("barrier", 1), Barrier(),
            WorkItemBegin(WI1), WorkItemEnd(WI1),
            WorkItemResume(WI0), WorkItemEnd(WI0),
        ]
        report = validate_stream(simple_stream(body))
        assert RULE_BARRIER_DIVERGENCE in [v.rule for v in report.violations]

    def test_resume_without_barrier(self):
        body = [
            WorkItemBegin(WI0), WorkItemEnd(WI0),
            WorkItemResume(WI0), WorkItemEnd(WI0),
        ]
        report = validate_stream(simple_stream(body))
        assert RULE_RESUME in [v.rule for v in report.violations]

    def test_interleaved_segments_flagged(self):
        body = [
            WorkItemBegin(WI0), Instruction("add", 1),
            WorkItemBegin(WI1),  # WI0's segment is still open
            WorkItemEnd(WI1), WorkItemEnd(WI0),
        ]
        report = validate_stream(simple_stream(body))
        assert RULE_WI_NESTING in [v.rule for v in report.violations]

    def test_id_arithmetic_checked(self):
        bad = WorkItemId((5, 0, 0), (1, 0, 0), (0, 0, 0))  # 5 != 0*2 + 1
        body = [WorkItemBegin(bad), WorkItemEnd(bad)]
        report = validate_stream(simple_stream(body))
        assert RULE_WI_ID in [v.rule for v in report.violations]

    def test_local_id_out_of_range(self):
        bad = WorkItemId((3, 0, 0), (3, 0, 0), (0, 0, 0))  # local_size is 2
        body = [WorkItemBegin(bad), WorkItemEnd(bad)]
        report = validate_stream(simple_stream(body))
        assert RULE_WI_ID in [v.rule for v in report.violations]

    def test_truncated_stream(self):
        events = [KernelBegin("k", 0, (1, 1, 1), (1, 1, 1))]
        report = validate_stream(events)
        assert RULE_KERNEL_END in [v.rule for v in report.violations]

    def test_unfinished_work_item(self):
        body = [WorkItemBegin(WI0), Instruction("add", 1), Instruction("barrier", 1), Barrier()]
        report = validate_stream(simple_stream(body))
        rules = [v.rule for v in report.violations]
        assert "wi.unfinished" in rules

    def test_violations_carry_event_index(self):
        body = [Memory("load", 4)]
        report = validate_stream(simple_stream(body))
        assert report.violations[0].event_index == 2
