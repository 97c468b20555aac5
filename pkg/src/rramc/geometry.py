"""Dimensional bookkeeping for an RRAM instance.

An array has ``M = 2**Y`` rows and ``N = B * 2**X`` columns, grouped into
``2**X`` word columns of ``B`` bits each. All addresses are zero-based.
"""
from __future__ import annotations

from dataclasses import dataclass


class GeometryError(ValueError):
    """Base class for rejected dimensions."""


class NonPowerOfTwo(GeometryError):
    pass


class InvalidColumnCount(GeometryError):
    pass


class InvalidWordWidth(GeometryError):
    pass


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class MemoryGeometry:
    M: int
    N: int
    B: int
    X: int
    Y: int

    @property
    def word_columns(self) -> int:
        return 1 << self.X

    @property
    def word_count(self) -> int:
        return 1 << (self.X + self.Y)

    @property
    def capacity_bits(self) -> int:
        return self.M * self.N

    def column(self, x: int, bit: int) -> int:
        """Physical column of bit ``bit`` of word column ``x``."""
        return x * self.B + bit

    def check_address(self, x: int, y: int) -> None:
        if not 0 <= x < self.word_columns:
            raise IndexError(f"x address {x} outside 0..{self.word_columns - 1}")
        if not 0 <= y < self.M:
            raise IndexError(f"y address {y} outside 0..{self.M - 1}")

    def __str__(self) -> str:
        return f"{self.M}x{self.N}/B{self.B}"


def validate_geometry(M: int, N: int, B: int) -> MemoryGeometry:
    for name, v in (("M", M), ("N", N), ("B", B)):
        if int(v) != v or v < 1:
            raise GeometryError(f"{name} must be a positive integer, got {v!r}")
    M, N, B = int(M), int(N), int(B)
    if not is_power_of_two(M) or M < 2:
        raise NonPowerOfTwo(f"M must be a power of two >= 2, got {M}")
    if not is_power_of_two(B):
        raise InvalidWordWidth(f"B must be a power of two, got {B}")
    if N % B:
        raise InvalidColumnCount(f"N/B must be an integer power of two >= 2, got {N}/{B}")
    words = N // B
    if not is_power_of_two(words) or words < 2:
        raise InvalidColumnCount(
            f"N/B must be an integer power of two >= 2, got {N}/{B} = {words}"
        )
    return MemoryGeometry(M=M, N=N, B=B, X=words.bit_length() - 1, Y=M.bit_length() - 1)


def worst_case_write_address(g: MemoryGeometry) -> tuple[int, int]:
    # second-to-last word column of the top row
    return g.word_columns - 2, g.M - 1


def worst_case_read_address(g: MemoryGeometry) -> tuple[int, int]:
    # last word column of the top row
    return g.word_columns - 1, g.M - 1
