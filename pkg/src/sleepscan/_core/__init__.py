"""Decode kernel selection: compiled extension when available, else pure Python."""

try:
    from sleepscan._core._decode_c import decode_raw

    BACKEND = "c"
except ImportError:  # pragma: no cover - depends on build environment
    from sleepscan._core.decode_py import decode_raw

    BACKEND = "python"

__all__ = ["decode_raw", "BACKEND"]
