# cython: language_level=3, boundscheck=False, wraparound=False
"""C fast path for raw instruction decoding."""


def decode_raw(bytes code):
    cdef const unsigned char[:] view = code
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n = view.shape[0]
    cdef int op, width
    out = []
    while i < n:
        op = view[i]
        if 0x60 <= op <= 0x7F:
            width = op - 0x5F
            if i + 1 + width > n:
                return out, i
            out.append((i, op, code[i + 1:i + 1 + width]))
            i += 1 + width
        else:
            out.append((i, op, b""))
            i += 1
    return out, -1
