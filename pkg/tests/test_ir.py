"""Kernel IR parser tests."""

import pytest

from aiwc.errors import MissingTerminator, ParseError, UndefinedLabel, UseBeforeDef
from aiwc.ir import BasicBlock, Compute, CondBr, Load, Ret, Store, parse_kernel


def test_minimal_kernel():
    prog = parse_kernel("kernel k()\nentry:\n  add r0, gid0, 1\n  ret\n")
    assert prog.name == "k"
    assert prog.params == ()
    assert len(prog.blocks) == 1
    assert len(prog.blocks[0].instructions) == 2
    assert isinstance(prog.blocks[0].instructions[1], Ret)


def test_source_lines_recorded():
    prog = parse_kernel("kernel k()\nentry:\n  add r0, 1, 2\n  ret\n")
    add = prog.blocks[0].instructions[0]
    assert add.line == 3


def test_width_suffix():
    prog = parse_kernel("kernel k()\nentry:\n  fmul.x4 r2, 3, 5\n  ret\n")
    instr = prog.blocks[0].instructions[0]
    assert isinstance(instr, Compute)
    assert (instr.opcode, instr.base, instr.width) == ("fmul", "mul", 4)


def test_memory_syntax():
    prog = parse_kernel(
        "kernel k(a)\nentry:\n  load r1, buf[a][gid0]\n  store buf[a][gid0], r1\n  ret\n"
    )
    ld, st = prog.blocks[0].instructions[:2]
    assert isinstance(ld, Load) and ld.buffer == "a" and not ld.atomic
    assert isinstance(st, Store) and st.buffer == "a"


def test_atomic_mnemonics():
    prog = parse_kernel(
        "kernel k(a)\nentry:\n  aload r1, buf[a][0]\n  astore buf[a][0], r1\n  ret\n"
    )
    ld, st = prog.blocks[0].instructions[:2]
    assert ld.atomic and ld.opcode == "aload"
    assert st.atomic and st.opcode == "astore"


def test_branch_targets_resolved():
    src = """kernel k()
entry:
  mov r0, gid0
  br r0, yes, no
yes:
  ret
no:
  ret
"""
    prog = parse_kernel(src)
    br = prog.blocks[0].instructions[1]
    assert isinstance(br, CondBr)
    assert (br.then_label, br.else_label) == ("yes", "no")
    assert br.line == 4


def test_undefined_label():
    with pytest.raises(UndefinedLabel, match="loop2"):
        parse_kernel("kernel k()\nentry:\n  mov r0, 1\n  br r0, loop2, entry\n")


def test_missing_terminator():
    with pytest.raises(MissingTerminator):
        parse_kernel("kernel k()\nentry:\n  add r0, 1, 2\n")


def test_use_before_def():
    with pytest.raises(UseBeforeDef, match="r5"):
        parse_kernel("kernel k()\nentry:\n  add r0, r5, 1\n  ret\n")


def test_builtins_always_defined():
    prog = parse_kernel("kernel k()\nentry:\n  add r0, gid0, lsz2\n  ret\n")
    assert prog.num_registers == 1


def test_duplicate_label():
    with pytest.raises(ParseError, match="duplicate label"):
        parse_kernel("kernel k()\nentry:\n  ret\nentry:\n  ret\n")


def test_unknown_opcode():
    with pytest.raises(ParseError, match="warp_shuffle"):
        parse_kernel("kernel k()\nentry:\n  warp_shuffle r0, r0\n  ret\n")


def test_unreachable_code_rejected():
    with pytest.raises(ParseError, match="unreachable"):
        parse_kernel("kernel k()\nentry:\n  ret\n  add r0, 1, 2\n")


def test_missing_header():
    with pytest.raises(ParseError, match="kernel header"):
        parse_kernel("entry:\n  ret\n")


def test_unknown_buffer_rejected():
    with pytest.raises(ParseError, match="not a kernel parameter"):
        parse_kernel("kernel k(a)\nentry:\n  load r0, buf[b][0]\n  ret\n")


def test_comments_and_blanks():
    src = """; leading comment
kernel k(a)   ; trailing
entry:
    mov r0, 7 ; note

    ret
"""
    prog = parse_kernel(src)
    assert prog.params == ("a",)
    assert len(prog.blocks[0].instructions) == 2


def test_negative_immediates():
    prog = parse_kernel("kernel k()\nentry:\n  add r0, -1, 5\n  ret\n")
    instr = prog.blocks[0].instructions[0]
    assert instr.srcs[0].value == -1


def test_instruction_before_label():
    with pytest.raises(ParseError, match="before the first label"):
        parse_kernel("kernel k()\n  ret\n")


def test_zero_width_rejected():
    with pytest.raises(ParseError, match="width"):
        parse_kernel("kernel k()\nentry:\n  add.x0 r0, 1, 2\n  ret\n")


def test_mad_three_sources():
    prog = parse_kernel("kernel k()\nentry:\n  mad r0, 2, 3, 4\n  ret\n")
    assert len(prog.blocks[0].instructions[0].srcs) == 3


def test_register_cap():
    with pytest.raises(ParseError, match="register index"):
        parse_kernel("kernel k()\nentry:\n  mov r99999, 0\n  ret\n")


def test_label_index_property():
    prog = parse_kernel("kernel k()\nentry:\n  jmp out\nout:\n  ret\n")
    assert prog.label_index == {"entry": 0, "out": 1}
    assert isinstance(prog.blocks[0], BasicBlock)
