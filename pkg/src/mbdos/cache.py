"""Persistent, checksummed cache for universal tables.

Artifacts are keyed by a content hash of their parameters and recorded in a
JSON manifest next to the data files.  Checksums are verified on every load;
a mismatch quarantines the entry instead of returning bad data.  Version
mismatches are rejected, never migrated.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

from .genfunc import FORMAT_VERSION, CoefficientTable

MANIFEST_NAME = "manifest.json"
ENV_CACHE_DIR = "MBDOS_CACHE"


class CacheCorruptionError(Exception):
    """A cached artifact failed its checksum or structural validation."""


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def params_hash(kind: str, params: dict) -> str:
    canon = json.dumps({"kind": kind, **params}, sort_keys=True, separators=(",", ":"))
    return _sha256(canon.encode())[:32]


@dataclass
class CacheEntry:
    kind: str
    params: dict
    file: str
    checksum: str
    version: int
    pinned: bool = False

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "file": self.file,
            "checksum": self.checksum,
            "version": self.version,
            "pinned": self.pinned,
        }


class CacheManifest:
    """Entry registry persisted as JSON; entries point at files in the same dir."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.entries: dict[str, CacheEntry] = {}
        self.quarantined: list[str] = []
        self._load()

    def _manifest_path(self) -> Path:
        return self.directory / MANIFEST_NAME

    def _load(self) -> None:
        path = self._manifest_path()
        if not path.exists():
            return
        raw = json.loads(path.read_text())
        if raw.get("version") != 1:
            raise CacheCorruptionError(
                f"manifest version {raw.get('version')} not supported"
            )
        for key, e in raw.get("entries", {}).items():
            self.entries[key] = CacheEntry(**e)

    def save(self) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        payload = {
            "version": 1,
            "entries": {k: e.to_jsonable() for k, e in sorted(self.entries.items())},
        }
        tmp = self._manifest_path().with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=1, sort_keys=True))
        os.replace(tmp, self._manifest_path())

    # -- storage ----------------------------------------------------------

    def put(self, kind: str, params: dict, data: bytes, pinned: bool = False) -> str:
        key = params_hash(kind, params)
        fname = f"{kind}-{key}.bin"
        self.directory.mkdir(parents=True, exist_ok=True)
        (self.directory / fname).write_bytes(data)
        self.entries[key] = CacheEntry(
            kind=kind,
            params=params,
            file=fname,
            checksum=_sha256(data),
            version=FORMAT_VERSION,
            pinned=pinned,
        )
        self.save()
        return key

    def get(self, kind: str, params: dict) -> bytes | None:
        """Verified artifact bytes, or None on miss.  Corruption quarantines."""
        key = params_hash(kind, params)
        entry = self.entries.get(key)
        if entry is None:
            return None
        if entry.version != FORMAT_VERSION:
            raise CacheCorruptionError(
                f"entry {key} has version {entry.version}, expected {FORMAT_VERSION}"
            )
        path = self.directory / entry.file
        if not path.exists():
            del self.entries[key]
            self.save()
            return None
        data = path.read_bytes()
        if _sha256(data) != entry.checksum:
            self.quarantine(key)
            return None
        return data

    def quarantine(self, key: str) -> None:
        entry = self.entries.pop(key, None)
        if entry is not None:
            path = self.directory / entry.file
            if path.exists():
                os.replace(path, path.with_suffix(path.suffix + ".quarantined"))
            self.quarantined.append(key)
            self.save()

    # -- garbage collection --------------------------------------------------

    def gc(self, max_age_days: float | None = None, max_total_bytes: int | None = None) -> list[str]:
        """Drop unpinned entries per age/size policy; returns removed keys."""
        removed = []
        now = time.time()
        # verify checksums first so corrupt entries never survive a gc
        for key in list(self.entries):
            entry = self.entries[key]
            path = self.directory / entry.file
            if not path.exists() or _sha256(path.read_bytes()) != entry.checksum:
                self.quarantine(key)
                removed.append(key)
        if max_age_days is not None:
            cutoff = now - max_age_days * 86400.0
            for key in list(self.entries):
                entry = self.entries[key]
                if entry.pinned:
                    continue
                if (self.directory / entry.file).stat().st_mtime < cutoff:
                    self._drop(key)
                    removed.append(key)
        if max_total_bytes is not None:
            sized = []
            for key, entry in self.entries.items():
                st = (self.directory / entry.file).stat()
                sized.append((st.st_mtime, st.st_size, key))
            total = sum(s for _, s, _ in sized)
            for mtime, size, key in sorted(sized):
                if total <= max_total_bytes:
                    break
                if self.entries[key].pinned:
                    continue
                self._drop(key)
                removed.append(key)
                total -= size
        self.save()
        return removed

    def _drop(self, key: str) -> None:
        entry = self.entries.pop(key)
        path = self.directory / entry.file
        if path.exists():
            path.unlink()


class TableCache:
    """Coefficient-table view of a manifest: lookup, prefix resume, store."""

    KIND = "coeff-table"

    def __init__(self, directory: Path | str):
        self.manifest = CacheManifest(Path(directory))
        self.hits = 0
        self.misses = 0

    @staticmethod
    def _params(L, n_max, restriction, sectors, level_range) -> dict:
        return {
            "L": L,
            "n_max": n_max,
            "restriction": restriction,
            "sectors": list(sectors),
            "levels": list(level_range),
        }

    def lookup(self, L, n_max, restriction, sectors, level_range) -> CoefficientTable | None:
        data = self.manifest.get(
            self.KIND, self._params(L, n_max, restriction, sectors, level_range)
        )
        if data is None:
            self.misses += 1
            return None
        self.hits += 1
        return CoefficientTable.from_bytes(data)

    def best_prefix(
        self, L, n_max, restriction, sectors, lo, hi
    ) -> tuple[CoefficientTable | None, int]:
        """Longest cached expansion over levels lo..j with j < hi, if any."""
        best_j = None
        for entry in self.manifest.entries.values():
            if entry.kind != self.KIND:
                continue
            p = entry.params
            if (
                p["L"] == L
                and p["n_max"] == n_max
                and p["restriction"] == restriction
                and p["sectors"] == list(sectors)
                and p["levels"][0] == lo
                and lo < p["levels"][1] < hi
            ):
                if best_j is None or p["levels"][1] > best_j:
                    best_j = p["levels"][1]
        if best_j is None:
            return None, lo
        table = self.lookup(L, n_max, restriction, sectors, (lo, best_j))
        if table is None:  # quarantined on read
            return None, lo
        return table, best_j

    def store(self, table: CoefficientTable, pinned: bool = False) -> None:
        self.manifest.put(
            self.KIND,
            self._params(
                table.L,
                table.n_max,
                table.restriction,
                table.sectors,
                table.level_range,
            ),
            table.to_bytes(),
            pinned=pinned,
        )
