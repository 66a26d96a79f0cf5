"""Sparse expansion of the degeneracy-counting generating function.

One bracket per level k multiplies the running polynomial by

    sum_{n=0}^{R} X^n * prod_{q in S} prod_{k'} Y_{q,k'}^(n * T_q[k mod q, k']),

and after every bracket all terms whose X power exceeds the particle budget
are dropped.  A term key is the X power plus the concatenated signed exponent
blocks of the kept sectors; its coefficient counts the configurations in that
degeneracy class.  Keys are packed into single integers (one bit field per
coordinate) so the hot loop is a bigint add and a dict update.

Tables serialize to a versioned binary format with zig-zag varint coordinates
and are cached/checkpointed per level prefix, so expansions resume and extend
instead of recomputing.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .cache import TableCache

from .cyclotomic import divisors, totient, transfer_matrix

MAGIC = b"MBCT"
FORMAT_VERSION = 1


@dataclass
class ExpandStats:
    """Instrumentation for complexity assertions: one touch per produced term."""

    term_touches: int = 0
    cache_hits: int = 0
    levels_resumed: int = 0


class _KeyLayout:
    """Bit-field packing of (particles, invariant exponents) into one integer.

    Fields are ordered so integer comparison equals lexicographic comparison
    of (particles, coords).  Coordinates carry an offset so partial sums stay
    non-negative; the offset cancels in deltas because it is already part of
    the base key.
    """

    def __init__(self, n_max: int, sectors: tuple[int, ...]):
        self.n_max = n_max
        self.sectors = sectors
        self.phis = tuple(totient(q) for q in sectors)
        self.dim = sum(self.phis)
        max_t = max(
            (transfer_matrix(q).max_abs_entry() for q in sectors), default=1
        )
        self.offset = n_max * max_t
        self.width = max((2 * self.offset).bit_length(), n_max.bit_length(), 1)
        # particles field is most significant, then coords left to right
        self.shifts = tuple(
            self.width * (self.dim - 1 - pos) for pos in range(self.dim)
        )
        self.particle_shift = self.width * self.dim
        self.mask = (1 << self.width) - 1
        self.base = sum(self.offset << s for s in self.shifts)

    def pack(self, particles: int, coords: Sequence[int]) -> int:
        key = particles << self.particle_shift
        for c, s in zip(coords, self.shifts):
            key |= (c + self.offset) << s
        return key

    def unpack(self, key: int) -> tuple[int, tuple[int, ...]]:
        particles = key >> self.particle_shift
        coords = tuple(
            ((key >> s) & self.mask) - self.offset for s in self.shifts
        )
        return particles, coords

    def particles_of(self, key: int) -> int:
        return key >> self.particle_shift

    def level_delta(self, L: int, level: int) -> int:
        """Packed exponent step contributed by one particle on `level`."""
        delta = 1 << self.particle_shift
        pos = 0
        for q, phi in zip(self.sectors, self.phis):
            row = transfer_matrix(q).row(level % q)
            for j in range(phi):
                delta += row[j] << self.shifts[pos]
                pos += 1
        return delta


def _normalize_sectors(L: int, sectors: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(q) for q in sectors), reverse=True))
    divs = set(divisors(L))
    for q in out:
        if q == 1:
            raise ValueError("sector q=1 is implicit (particle count); drop it from S")
        if q not in divs:
            raise ValueError(f"sector {q} does not divide L={L}")
    return out


class CoefficientTable:
    """Degeneracy counts indexed by particle number and kept-sector invariants."""

    def __init__(
        self,
        L: int,
        n_max: int,
        restriction: int,
        sectors: tuple[int, ...],
        level_range: tuple[int, int],
        counts: dict[int, int],
        layout: _KeyLayout,
    ):
        self.L = L
        self.n_max = n_max
        self.restriction = restriction
        self.sectors = sectors
        self.level_range = level_range
        self._counts = counts
        self._layout = layout
        self._dense: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # -- construction ---------------------------------------------------

    @classmethod
    def empty(
        cls,
        L: int,
        n_max: int,
        restriction: int,
        sectors: Iterable[int],
        level_range: tuple[int, int] = (0, 0),
    ) -> "CoefficientTable":
        """The empty-product table: a single unit term with no particles."""
        secs = _normalize_sectors(L, sectors)
        layout = _KeyLayout(n_max, secs)
        return cls(
            L, n_max, restriction, secs, level_range, {layout.base: 1}, layout
        )

    # -- basic queries ----------------------------------------------------

    @property
    def n_keys(self) -> int:
        return len(self._counts)

    def items(self) -> Iterator[tuple[tuple[int, tuple[int, ...]], int]]:
        unpack = self._layout.unpack
        for key in sorted(self._counts):
            yield unpack(key), self._counts[key]

    def get(self, particles: int, coords: Sequence[int]) -> int:
        return self._counts.get(self._layout.pack(particles, coords), 0)

    def n_keys_with(self, particles: int) -> int:
        p_of = self._layout.particles_of
        return sum(1 for k in self._counts if p_of(k) == particles)

    def total_multiplicity(self, particles: int) -> int:
        p_of = self._layout.particles_of
        return sum(c for k, c in self._counts.items() if p_of(k) == particles)

    def slice_arrays(self, particles: int) -> tuple[np.ndarray, np.ndarray]:
        """Invariant matrix and counts for one particle number (cached)."""
        if particles not in self._dense:
            keys = sorted(
                k for k in self._counts
                if self._layout.particles_of(k) == particles
            )
            coords = np.zeros((len(keys), self._layout.dim), dtype=np.int64)
            counts = np.zeros(len(keys), dtype=np.int64)
            for i, k in enumerate(keys):
                _, c = self._layout.unpack(k)
                coords[i] = c
                counts[i] = self._counts[k]
            self._dense[particles] = (coords, counts)
        return self._dense[particles]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoefficientTable):
            return NotImplemented
        return (
            self.header_tuple() == other.header_tuple()
            and self._counts == other._counts
        )

    def header_tuple(self) -> tuple:
        return (
            self.L,
            self.restriction,
            self.n_max,
            self.sectors,
            self.level_range,
        )

    # -- algebra ----------------------------------------------------------

    def multiply_level(self, level: int, stats: ExpandStats | None = None) -> None:
        """Multiply in the bracket of one level, truncating at the particle budget."""
        lay = self._layout
        deltas = [n * lay.level_delta(self.L, level) for n in range(self.restriction + 1)]
        budget = self.n_max
        shift = lay.particle_shift
        new: dict[int, int] = {}
        touches = 0
        for key, cnt in self._counts.items():
            room = budget - (key >> shift)
            top = min(self.restriction, room)
            for n in range(top + 1):
                k2 = key + deltas[n]
                new[k2] = new.get(k2, 0) + cnt
            touches += top + 1
        if stats is not None:
            stats.term_touches += touches
        self._counts = new
        self._dense = {}

    def drop_sector(self, q: int) -> "CoefficientTable":
        """Re-aggregate counts with one sector's invariant block deleted."""
        if q not in self.sectors:
            raise ValueError(f"sector {q} is not kept by this table")
        remaining = tuple(s for s in self.sectors if s != q)
        out = CoefficientTable.empty(
            self.L, self.n_max, self.restriction, remaining, self.level_range
        )
        out._counts.clear()
        block = self.sectors.index(q)
        start = sum(self.phis_list()[:block])
        width = self.phis_list()[block]
        acc = out._counts
        pack = out._layout.pack
        for (particles, coords), cnt in self.items():
            trimmed = coords[:start] + coords[start + width:]
            k = pack(particles, trimmed)
            acc[k] = acc.get(k, 0) + cnt
        return out

    def phis_list(self) -> list[int]:
        return list(self._layout.phis)

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(struct.pack("<I", FORMAT_VERSION))
        lo, hi = self.level_range
        buf.write(
            struct.pack(
                "<6I", self.L, self.restriction, self.n_max, lo, hi, len(self.sectors)
            )
        )
        for q, phi in zip(self.sectors, self._layout.phis):
            buf.write(struct.pack("<2I", q, phi))
        buf.write(struct.pack("<Q", len(self._counts)))
        unpack = self._layout.unpack
        for key in sorted(self._counts):
            particles, coords = unpack(key)
            _write_varint(buf, particles)
            for c in coords:
                _write_varint(buf, _zigzag(c))
            _write_varint(buf, self._counts[key])
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CoefficientTable":
        buf = io.BytesIO(data)
        if buf.read(4) != MAGIC:
            raise ValueError("not a coefficient table (bad magic)")
        (version,) = struct.unpack("<I", buf.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported table format version {version}")
        L, R, n_max, lo, hi, n_sec = struct.unpack("<6I", buf.read(24))
        sectors = []
        for _ in range(n_sec):
            q, phi = struct.unpack("<2I", buf.read(8))
            if phi != totient(q):
                raise ValueError(f"corrupt header: phi({q}) != {phi}")
            sectors.append(q)
        (n_entries,) = struct.unpack("<Q", buf.read(8))
        table = cls.empty(L, n_max, R, tuple(sectors), (lo, hi))
        table._counts.clear()
        dim = table._layout.dim
        pack = table._layout.pack
        for _ in range(n_entries):
            particles = _read_varint(buf)
            coords = tuple(_unzigzag(_read_varint(buf)) for _ in range(dim))
            count = _read_varint(buf)
            table._counts[pack(particles, coords)] = count
        return table

    def write(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def read(cls, path) -> "CoefficientTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


# -- varint / zigzag helpers ---------------------------------------------


def _zigzag(n: int) -> int:
    return (n << 1) if n >= 0 else ((-n << 1) - 1)


def _unzigzag(z: int) -> int:
    return (z >> 1) if (z & 1) == 0 else -((z + 1) >> 1)


def _write_varint(buf, n: int) -> None:
    if n < 0:
        raise ValueError("varint must be non-negative")
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            buf.write(bytes((b | 0x80,)))
        else:
            buf.write(bytes((b,)))
            return


def _read_varint(buf) -> int:
    out = 0
    shift = 0
    while True:
        raw = buf.read(1)
        if not raw:
            raise ValueError("truncated varint")
        b = raw[0]
        out |= (b & 0x7F) << shift
        if not b & 0x80:
            return out
        shift += 7


# -- expansion, merging, bounds -------------------------------------------


def expand(
    L: int,
    n_max: int,
    restriction: int,
    sectors: Iterable[int],
    level_range: tuple[int, int] | None = None,
    stats: ExpandStats | None = None,
    cache: TableCache | None = None,
    checkpoint_every: int = 1,
) -> CoefficientTable:
    """Expand the level brackets of the generating function left to right.

    With a cache, finished prefixes are recorded after every
    `checkpoint_every` levels and the longest usable prefix is resumed.
    """
    if n_max < 0 or restriction < 0:
        raise ValueError("n_max and restriction must be non-negative")
    lo, hi = level_range if level_range is not None else (0, L)
    if not 0 <= lo <= hi <= L:
        raise ValueError(f"invalid level range {lo}..{hi} for L={L}")
    secs = _normalize_sectors(L, sectors)

    table = None
    start = lo
    if cache is not None:
        hit = cache.lookup(L, n_max, restriction, secs, (lo, hi))
        if hit is not None:
            if stats is not None:
                stats.cache_hits += 1
            return hit
        table, start = cache.best_prefix(L, n_max, restriction, secs, lo, hi)
        if table is not None and stats is not None:
            stats.levels_resumed += start - lo
    if table is None:
        table = CoefficientTable.empty(L, n_max, restriction, secs, (lo, lo))

    for level in range(start, hi):
        table.multiply_level(level, stats=stats)
        table.level_range = (lo, level + 1)
        done = level + 1 == hi
        if cache is not None and (done or (level + 1 - lo) % checkpoint_every == 0):
            cache.store(table)
    if table.level_range != (lo, hi):  # empty range: nothing multiplied
        table.level_range = (lo, hi)
        if cache is not None:
            cache.store(table)
    return table


def merge(a: CoefficientTable, b: CoefficientTable) -> CoefficientTable:
    """Polynomial product of two expansions over disjoint level ranges."""
    if (a.L, a.restriction, a.n_max, a.sectors) != (
        b.L,
        b.restriction,
        b.n_max,
        b.sectors,
    ):
        raise ValueError("tables have different layouts; cannot merge")
    if a.level_range[1] == b.level_range[0]:
        level_range = (a.level_range[0], b.level_range[1])
    elif b.level_range[1] == a.level_range[0]:
        level_range = (b.level_range[0], a.level_range[1])
    else:
        ra, rb = a.level_range, b.level_range
        if max(ra[0], rb[0]) < min(ra[1], rb[1]):
            raise ValueError(f"level ranges {ra} and {rb} overlap")
        level_range = (min(ra[0], rb[0]), max(ra[1], rb[1]))
    out = CoefficientTable.empty(a.L, a.n_max, a.restriction, a.sectors, level_range)
    out._counts.clear()
    acc = out._counts
    base = a._layout.base
    shift = a._layout.particle_shift
    budget = a.n_max
    # bucket the smaller table by particle count
    small, big = (a, b) if a.n_keys <= b.n_keys else (b, a)
    buckets: dict[int, list[tuple[int, int]]] = {}
    for k, c in small._counts.items():
        buckets.setdefault(k >> shift, []).append((k, c))
    for kb, cb in big._counts.items():
        room = budget - (kb >> shift)
        kb_off = kb - base
        for p in range(room + 1):
            for ks, cs in buckets.get(p, ()):
                k2 = kb_off + ks
                acc[k2] = acc.get(k2, 0) + cb * cs
    return out


def term_count_bound(L: int, restriction: int, sectors: Iterable[int]) -> int:
    """Worst-case work bound: ((kept invariants) * (R+1)) ** L."""
    n_inv = sum(totient(int(q)) for q in sectors)
    return (n_inv * (restriction + 1)) ** L


def _expand_chunk(args: tuple) -> bytes:
    L, n_max, restriction, sectors, lo, hi = args
    return expand(L, n_max, restriction, sectors, level_range=(lo, hi)).to_bytes()


def expand_parallel(
    L: int,
    n_max: int,
    restriction: int,
    sectors: Iterable[int],
    workers: int,
) -> CoefficientTable:
    """Fork the level product into contiguous chunks and join them with merge.

    Produces exactly the serial table (merge is the same polynomial product);
    worth it only when chunks stay small, i.e. heavily truncated sector sets.
    """
    import concurrent.futures

    workers = max(1, min(workers, L))
    if workers == 1:
        return expand(L, n_max, restriction, sectors)
    bounds = [round(i * L / workers) for i in range(workers + 1)]
    jobs = [
        (L, n_max, restriction, tuple(sectors), lo, hi)
        for lo, hi in zip(bounds, bounds[1:])
        if lo < hi
    ]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = [CoefficientTable.from_bytes(b) for b in pool.map(_expand_chunk, jobs)]
    table = chunks[0]
    for nxt in chunks[1:]:
        table = merge(table, nxt)
    return table


__all__ = [
    "CoefficientTable",
    "ExpandStats",
    "expand",
    "merge",
    "term_count_bound",
    "MAGIC",
    "FORMAT_VERSION",
]
