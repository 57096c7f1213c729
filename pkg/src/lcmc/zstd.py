"""Minimal Zstandard (RFC 8878) frame compressor bound to the system libzstd.

Only the one-shot simple API is used; output frames carry the content size
in the frame header, which `decompress` relies on.
"""

import ctypes
import ctypes.util

from .errors import PayloadDecodeError

_CANDIDATES = ["libzstd.so.1", "libzstd.so", "libzstd.1.dylib", "libzstd.dylib"]


def _load():
    found = ctypes.util.find_library("zstd")
    names = ([found] if found else []) + _CANDIDATES
    for name in names:
        try:
            return ctypes.CDLL(name)
        except OSError:
            continue
    raise OSError("libzstd shared library not found")


_lib = _load()

_lib.ZSTD_compressBound.restype = ctypes.c_size_t
_lib.ZSTD_compressBound.argtypes = [ctypes.c_size_t]
_lib.ZSTD_compress.restype = ctypes.c_size_t
_lib.ZSTD_compress.argtypes = [
    ctypes.c_void_p, ctypes.c_size_t,
    ctypes.c_void_p, ctypes.c_size_t,
    ctypes.c_int,
]
_lib.ZSTD_decompress.restype = ctypes.c_size_t
_lib.ZSTD_decompress.argtypes = [
    ctypes.c_void_p, ctypes.c_size_t,
    ctypes.c_void_p, ctypes.c_size_t,
]
_lib.ZSTD_isError.restype = ctypes.c_uint
_lib.ZSTD_isError.argtypes = [ctypes.c_size_t]
_lib.ZSTD_getErrorName.restype = ctypes.c_char_p
_lib.ZSTD_getErrorName.argtypes = [ctypes.c_size_t]
_lib.ZSTD_getFrameContentSize.restype = ctypes.c_ulonglong
_lib.ZSTD_getFrameContentSize.argtypes = [ctypes.c_void_p, ctypes.c_size_t]

_CONTENTSIZE_UNKNOWN = 2**64 - 1
_CONTENTSIZE_ERROR = 2**64 - 2

#: Hard cap on accepted decompressed sizes; all codec payloads are far smaller.
MAX_DECOMPRESSED_SIZE = 1 << 24

DEFAULT_LEVEL = 19


def compress(data: bytes, level: int = DEFAULT_LEVEL) -> bytes:
    """Compress `data` into a single Zstandard frame."""
    bound = _lib.ZSTD_compressBound(len(data))
    dst = ctypes.create_string_buffer(bound)
    n = _lib.ZSTD_compress(dst, bound, data, len(data), level)
    if _lib.ZSTD_isError(n):
        raise PayloadDecodeError(
            "zstd compress failed: %s" % _lib.ZSTD_getErrorName(n).decode()
        )
    return dst.raw[:n]


def decompress(data: bytes) -> bytes:
    """Decompress a single Zstandard frame produced by `compress`."""
    size = _lib.ZSTD_getFrameContentSize(data, len(data))
    if size in (_CONTENTSIZE_UNKNOWN, _CONTENTSIZE_ERROR):
        raise PayloadDecodeError("zstd frame header missing or corrupt")
    if size > MAX_DECOMPRESSED_SIZE:
        raise PayloadDecodeError("zstd frame declares implausible content size")
    dst = ctypes.create_string_buffer(int(size) or 1)
    n = _lib.ZSTD_decompress(dst, int(size), data, len(data))
    if _lib.ZSTD_isError(n):
        raise PayloadDecodeError(
            "zstd decompress failed: %s" % _lib.ZSTD_getErrorName(n).decode()
        )
    if n != size:
        raise PayloadDecodeError("zstd frame truncated")
    return dst.raw[:n]
