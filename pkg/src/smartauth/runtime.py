"""Server-side state, identity validation, and the replay database.

Both schemes share this plumbing: the server keeps its master secret, the
card-shared secret, its own identity, and a per-user map of the last
recovered client nonce.  The map is what turns a verbatim resend of a
login message into a replay rejection, and it can be snapshotted to a
small line-oriented text format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .hashing import Digest

MAX_ID_BYTES = 64
MAX_SECRET_BYTES = 64

SNAPSHOT_HEADER = "smartauth-replaydb v1"


class Reason(str, Enum):
    """Why a run stopped; distinguishable so tests can assert which check fired."""

    BAD_ID_FORMAT = "format"
    BIOMETRIC_MISMATCH = "biometric"
    WRONG_PASSWORD = "wrong-password"
    NONCE_TAG_MISMATCH = "nonce-tag"
    CHECKSUM_MISMATCH = "checksum"
    REPLAY = "replay"
    SERVER_AUTH_FAILED = "server-auth"
    SERVER_NONCE_TAG_MISMATCH = "server-nonce-tag"
    SERVER_CHECKSUM_MISMATCH = "server-checksum"


# Rejections raised by the card itself, before anything reaches the wire.
LOCAL_REASONS = frozenset({Reason.BIOMETRIC_MISMATCH, Reason.WRONG_PASSWORD})


class Rejected(Exception):
    """A protocol check failed; ``reason`` identifies the check."""

    def __init__(self, reason: Reason, detail: str = "") -> None:
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)

    @property
    def local(self) -> bool:
        return self.reason in LOCAL_REASONS


def check_id_format(identity: bytes) -> bool:
    """True iff the identity is 1..64 bytes of printable 7-bit, no whitespace."""
    if not 1 <= len(identity) <= MAX_ID_BYTES:
        return False
    return all(0x21 <= b <= 0x7E for b in identity)


def check_credentials(user_id: bytes, password: bytes, biometric: bytes) -> None:
    """Validate registration inputs; raises on malformed values."""
    if not check_id_format(user_id):
        raise Rejected(Reason.BAD_ID_FORMAT, "identity fails the format check")
    check_password(password)
    if not biometric:
        raise ValueError("biometric sample must be non-empty")


def check_password(password: bytes) -> None:
    if not 1 <= len(password) <= MAX_SECRET_BYTES:
        raise ValueError(f"password must be 1..{MAX_SECRET_BYTES} bytes")


@dataclass(frozen=True)
class RegistrationCenter:
    """The trusted enrolment party; holds only the two long-term secrets."""

    master_secret: Digest
    shared_secret: Digest


@dataclass
class ServerState:
    """One authentication server.

    ``master_secret`` and ``shared_secret`` never leave this process:
    they appear in no message and no transcript.  ``replay_db`` maps a
    user identity to the client nonce recovered from that user's last
    accepted login.
    """

    master_secret: Digest
    shared_secret: Digest
    server_id: bytes
    replay_db: dict[bytes, Digest] = field(default_factory=dict)


def replay_check_and_store(server: ServerState, user_id: bytes, nonce: Digest) -> bool:
    """Record the recovered nonce; False means a verbatim replay.

    No entry or a different entry counts as fresh and the entry is
    stored or replaced; an identical entry leaves the database unchanged.
    """
    seen = server.replay_db.get(user_id)
    if seen is not None and seen == nonce:
        return False
    server.replay_db[user_id] = nonce
    return True


class SnapshotError(ValueError):
    """Malformed replay-database snapshot; carries the offending line number."""

    def __init__(self, line_no: int, message: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def _escape_id(identity: bytes) -> str:
    out = []
    for b in identity:
        if 0x21 <= b <= 0x7E and b != 0x5C:
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02x}")
    return "".join(out)


def _unescape_id(text: str, line_no: int) -> bytes:
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 3 >= len(text) or text[i + 1] != "x":
                raise SnapshotError(line_no, "bad identity escape")
            try:
                out.append(int(text[i + 2 : i + 4], 16))
            except ValueError:
                raise SnapshotError(line_no, "bad identity escape") from None
            i += 4
        else:
            out.append(ord(ch))
            i += 1
    return bytes(out)


def save_replay_db(server: ServerState, path: "str | Path") -> None:
    """Write the replay database as sorted ``identity<TAB>nonce-hex`` lines."""
    lines = [SNAPSHOT_HEADER]
    for user_id in sorted(server.replay_db):
        lines.append(f"{_escape_id(user_id)}\t{server.replay_db[user_id].hex()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_replay_db(path: "str | Path") -> dict[bytes, Digest]:
    """Parse a snapshot back into a replay map; strict, with line numbers."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise SnapshotError(1, f"expected header {SNAPSHOT_HEADER!r}")
    entries: dict[bytes, Digest] = {}
    width: int | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            raise SnapshotError(line_no, "blank line")
        if line.count("\t") != 1:
            raise SnapshotError(line_no, "expected identity<TAB>hex")
        id_text, hex_text = line.split("\t")
        user_id = _unescape_id(id_text, line_no)
        try:
            raw = bytes.fromhex(hex_text)
        except ValueError:
            raise SnapshotError(line_no, "bad nonce hex") from None
        if not raw:
            raise SnapshotError(line_no, "empty nonce")
        if width is None:
            width = len(raw)
        elif len(raw) != width:
            raise SnapshotError(line_no, "inconsistent nonce width")
        if user_id in entries:
            raise SnapshotError(line_no, "duplicate identity")
        entries[user_id] = Digest(raw)
    return entries
