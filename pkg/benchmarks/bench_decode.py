"""Throughput comparison of the two bytecode-decode kernels.

The decode kernel (raw opcode stream -> (byte, pc, immediate) triples) is the
only hot loop that runs over every byte of every artifact, so it is the part
shipped as a compiled extension. This script measures both implementations on
the synthetic contract corpus plus random byte blobs and prints the speedup.

Run:  python3 benchmarks/bench_decode.py
"""

import random
import statistics
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import fixtures  # noqa: E402  (test-corpus builders)

from sleepscan._core import BACKEND, decode_py  # noqa: E402

try:
    from sleepscan._core import _decode_c
except ImportError:
    _decode_c = None


def corpus_payloads() -> list[bytes]:
    with tempfile.TemporaryDirectory() as tmp:
        fixtures.write_corpus(Path(tmp))
        payloads = [bytes.fromhex(p.read_text().strip())
                    for p in sorted(Path(tmp).rglob("*.bin-runtime"))]
    rng = random.Random(0xBE7C)
    payloads += [rng.randbytes(size) for size in (1 << 10, 16 << 10, 256 << 10)]
    return payloads


def bench(fn, payloads, repeats=7, rounds=50) -> float:
    times = []
    for _ in range(repeats):
        started = time.perf_counter()
        for _ in range(rounds):
            for payload in payloads:
                fn(payload)
        times.append(time.perf_counter() - started)
    return min(times)


def main() -> None:
    payloads = corpus_payloads()
    total = sum(map(len, payloads))
    print(f"backend selected at import: {BACKEND}")
    print(f"{len(payloads)} payloads, {total} bytes total, best of 7 x 50 rounds\n")

    py_seconds = bench(decode_py.decode_raw, payloads)
    print(f"pure python : {py_seconds:8.4f} s   "
          f"{total * 50 / py_seconds / 1e6:7.1f} MB/s")

    if _decode_c is None:
        print("compiled    : not built (pip install -e . --no-build-isolation)")
        return

    c_seconds = bench(_decode_c.decode_raw, payloads)
    print(f"compiled    : {c_seconds:8.4f} s   "
          f"{total * 50 / c_seconds / 1e6:7.1f} MB/s")
    print(f"\nspeedup: {py_seconds / c_seconds:.1f}x")

    sample = payloads[0]
    assert _decode_c.decode_raw(sample) == decode_py.decode_raw(sample)
    print("outputs agree on a sample payload")


if __name__ == "__main__":
    main()
