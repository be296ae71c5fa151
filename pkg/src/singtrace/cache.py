"""Content-addressed cache for spectra and zero tables.

Entries are keyed by the SHA-256 of their canonical builder parameters;
payload integrity is protected by a stored digest over the array bytes,
so tampered entries are detected and silently recomputed.  Writes are
atomic (temp file + rename).  An unwritable cache root degrades to an
in-memory store with a warning.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile

import numpy as np

log = logging.getLogger("singtrace.cache")


def params_key(params: dict) -> str:
    return hashlib.sha256(
        json.dumps(params, sort_keys=True).encode()).hexdigest()


def _arrays_digest(arrays: dict) -> str:
    h = hashlib.sha256()
    for name in sorted(arrays):
        h.update(name.encode())
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


class CacheStore:
    def __init__(self, root):
        self.root = root
        self.memory = {}
        self.writable = True
        if root is not None:
            try:
                os.makedirs(root, exist_ok=True)
                probe = os.path.join(root, ".probe")
                with open(probe, "w") as fh:
                    fh.write("ok")
                os.remove(probe)
            except OSError as exc:
                log.warning("cache root %s unwritable (%s); "
                            "falling back to memory", root, exc)
                self.writable = False
        else:
            self.writable = False

    def _path(self, key: str) -> str:
        return os.path.join(self.root, key[:2], key + ".npz")

    def get(self, params: dict):
        """Arrays dict for these parameters, or None."""
        key = params_key(params)
        if not self.writable:
            return self.memory.get(key)
        path = self._path(key)
        if not os.path.exists(path):
            return self.memory.get(key)
        try:
            with np.load(path, allow_pickle=False) as npz:
                arrays = {k: npz[k] for k in npz.files
                          if k not in ("_digest", "_params")}
                stored = str(npz["_digest"])
                if _arrays_digest(arrays) != stored:
                    raise ValueError("digest mismatch")
                return arrays
        except (OSError, ValueError, KeyError) as exc:
            log.warning("cache entry %s corrupt (%s); recomputing", key, exc)
            try:
                os.remove(path)
            except OSError:
                pass
            return None

    def put(self, params: dict, arrays: dict):
        key = params_key(params)
        if not self.writable:
            self.memory[key] = dict(arrays)
            return
        path = self._path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        digest = _arrays_digest(arrays)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".npz")
        os.close(fd)
        try:
            np.savez(tmp, _digest=np.str_(digest),
                     _params=np.str_(json.dumps(params, sort_keys=True)),
                     **arrays)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                try:
                    os.remove(tmp)
                except OSError:
                    pass

    def scan_params(self):
        """All stored parameter dicts (for prefix reuse across cutoffs)."""
        found = []
        if not self.writable:
            return found
        for sub in os.listdir(self.root):
            d = os.path.join(self.root, sub)
            if not os.path.isdir(d):
                continue
            for fn in os.listdir(d):
                if not fn.endswith(".npz"):
                    continue
                try:
                    with np.load(os.path.join(d, fn),
                                 allow_pickle=False) as npz:
                        found.append(json.loads(str(npz["_params"])))
                except (OSError, ValueError, KeyError):
                    continue
        return found
