"""Versioned binary container for model files: magic + version + pickled payload."""

import pickle
import struct

from .errors import ModelFormatError, UnsupportedVersionError


def write_versioned(path, magic, version, payload):
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack(">I", version))
        pickle.dump(payload, f, protocol=4)


def read_versioned(path, magic, current_version):
    with open(path, "rb") as f:
        head = f.read(len(magic))
        if head != magic:
            raise ModelFormatError(
                "{}: bad magic {!r}, expected {!r}".format(path, head, magic)
            )
        raw = f.read(4)
        if len(raw) < 4:
            raise ModelFormatError("{}: truncated header".format(path))
        (version,) = struct.unpack(">I", raw)
        if version > current_version:
            raise UnsupportedVersionError(
                "{}: format version {} is newer than supported version {}".format(
                    path, version, current_version
                )
            )
        try:
            payload = pickle.load(f)
        except Exception as exc:
            raise ModelFormatError("{}: corrupt payload ({})".format(path, exc)) from exc
    return version, payload
