"""Declarative buffer initializers for reproducible launches.

A buffer spec is a small colon-separated expression:

    zeros                all elements 0
    iota                 0, 1, 2, ...
    const:V              all elements V
    bernoulli:P          0/1 drawn i.i.d. with P(1) = P
    file:PATH            whitespace-separated integers read from PATH

`zeros`, `iota`, `const` and `bernoulli` accept `len=N` to override the
default length (the launch's work-item count) and `bernoulli` accepts
`seed=S` to override the run seed.  Values are reduced to 64-bit lanes.
"""

from __future__ import annotations

import random

_MASK = (1 << 64) - 1


class BufferSpecError(ValueError):
    pass


def make_buffer(spec: str, default_len: int, seed: int = 0) -> list[int]:
    """Build buffer contents from a spec string."""
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        if not path:
            raise BufferSpecError("file: spec needs a path")
        with open(path, "r", encoding="utf-8") as fp:
            return [int(tok, 0) & _MASK for tok in fp.read().split()]

    parts = spec.split(":")
    kind = parts[0]
    length = default_len
    buf_seed = seed
    positional: list[str] = []
    for part in parts[1:]:
        if part.startswith("len="):
            length = int(part[4:])
        elif part.startswith("seed="):
            buf_seed = int(part[5:])
        else:
            positional.append(part)
    if length < 0:
        raise BufferSpecError("buffer length must be non-negative")

    if kind == "zeros":
        if positional:
            raise BufferSpecError("zeros takes no arguments")
        return [0] * length
    if kind == "iota":
        if positional:
            raise BufferSpecError("iota takes no arguments")
        return list(range(length))
    if kind == "const":
        if len(positional) != 1:
            raise BufferSpecError("const needs one value, e.g. const:42")
        return [int(positional[0], 0) & _MASK] * length
    if kind == "bernoulli":
        if len(positional) != 1:
            raise BufferSpecError("bernoulli needs a probability, e.g. bernoulli:0.5")
        p = float(positional[0])
        if not 0.0 <= p <= 1.0:
            raise BufferSpecError("bernoulli probability must be in [0, 1]")
        rng = random.Random(buf_seed)
        return [1 if rng.random() < p else 0 for _ in range(length)]
    raise BufferSpecError(f"unknown buffer spec kind {kind!r}")
