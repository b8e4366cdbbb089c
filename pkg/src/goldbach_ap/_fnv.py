import numba
import numpy as np

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)


@numba.njit(cache=True)
def _fnv(data, offset, prime):
    h = offset
    for byte in data:
        h ^= np.uint64(byte)
        h *= prime
    return h


def fnv1a64_bytes(data: np.ndarray) -> int:
    return int(_fnv(data, FNV_OFFSET, FNV_PRIME))
