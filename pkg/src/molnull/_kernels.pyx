# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API and layout as ``molnull._kernels_py``."""

from libc.stdint cimport uint64_t, int32_t, int8_t


cdef class SplitMix64:
    cdef public uint64_t state

    def __init__(self, seed):
        self.state = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)

    cpdef uint64_t next_u64(self):
        cdef uint64_t z
        self.state += 0x9E3779B97F4A7C15ULL
        z = self.state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        return z ^ (z >> 31)

    cpdef bint coin(self):
        return (self.next_u64() >> 63) == 1


cdef void _evaluate(const int32_t[:] kind, const int32_t[:] local, const int32_t[:] path_start,
                    const int32_t[:] path_fail, const int32_t[:] ev_start, const int32_t[:] ev_slot,
                    int8_t[:] env, int8_t[:] out) noexcept nogil:
    cdef Py_ssize_t e, p, k
    cdef int p0, p1, status, v, dep, loc
    cdef bint all_fail, all_ok
    for e in range(kind.shape[0]):
        p0 = path_start[e]
        p1 = path_start[e + 1]
        if kind[e] == 1:
            dep = 0
            for p in range(p0, p1):
                for k in range(ev_start[p], ev_start[p + 1]):
                    if env[ev_slot[k]] >= 1:
                        dep = 1
            loc = local[e]
            out[e] = loc if loc >= dep else dep
            continue
        if p0 == p1:
            out[e] = 0
            continue
        all_fail = True
        all_ok = True
        for p in range(p0, p1):
            if path_fail[p]:
                status = 2
            else:
                status = 0
                for k in range(ev_start[p], ev_start[p + 1]):
                    v = env[ev_slot[k]]
                    if v > status:
                        status = v
            if status != 2:
                all_fail = False
            if status != 0:
                all_ok = False
        out[e] = 2 if all_fail else (0 if all_ok else 1)


def evaluate_entries(kind, local, path_start, path_fail, ev_start, ev_slot, env, out):
    _evaluate(kind, local, path_start, path_fail, ev_start, ev_slot, env, out)


def sweep(kind, local, path_start, path_fail, ev_start, ev_slot, entry_slot, env, impl_cls):
    cdef const int32_t[:] slot = entry_slot
    cdef int8_t[:] envv = env
    cdef int8_t[:] impl = impl_cls
    cdef Py_ssize_t n = slot.shape[0], e, s
    cdef int changed = 0
    out_buf = bytearray(n)
    cdef int8_t[:] out = memoryview(out_buf).cast("b")
    _evaluate(kind, local, path_start, path_fail, ev_start, ev_slot, envv, out)
    with nogil:
        for e in range(n):
            if out[e] > impl[e]:
                impl[e] = out[e]
                changed += 1
        for s in range(envv.shape[0]):
            envv[s] = 2
        for e in range(n):
            s = slot[e]
            if impl[e] < envv[s]:
                envv[s] = impl[e]
    return changed
