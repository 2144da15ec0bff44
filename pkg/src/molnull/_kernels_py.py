"""Pure-Python kernels; the reference twin of the compiled ``_kernels`` extension.

Both modules expose the same functions with the same array layout, documented
in :mod:`molnull.kernels`.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """64-bit splitmix generator (Steele, Lea & Flood; Vigna's reference constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def coin(self) -> bool:
        return (self.next_u64() >> 63) == 1


def evaluate_entries(kind, local, path_start, path_fail, ev_start, ev_slot, env, out):
    n_entries = len(kind)
    for e in range(n_entries):
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


def sweep(kind, local, path_start, path_fail, ev_start, ev_slot, entry_slot, env, impl_cls):
    n_entries = len(kind)
    out = [0] * n_entries
    evaluate_entries(kind, local, path_start, path_fail, ev_start, ev_slot, env, out)
    changed = 0
    for e in range(n_entries):
        if out[e] > impl_cls[e]:
            impl_cls[e] = out[e]
            changed += 1
    for s in range(len(env)):
        env[s] = 2
    for e in range(n_entries):
        s = entry_slot[e]
        if impl_cls[e] < env[s]:
            env[s] = impl_cls[e]
    return changed
