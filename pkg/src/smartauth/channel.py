"""Transcript recording and the in-memory adversarial message channel.

Every message between client and server passes through the channel, which
records a send and a receive event and applies the active adversary
policy.  The passive policy delivers messages untouched and in order;
tamper flips one bit of one named field; drop swallows a message; replay
and inject re-deliver a captured or crafted message on demand.  Every
adversary action lands in the transcript.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dataclass_fields, replace

from .hashing import Digest

EVENT_KINDS = (
    "send",
    "receive",
    "verify",
    "reject",
    "accept",
    "adversary-action",
    "key-derived",
)


@dataclass(frozen=True)
class Event:
    """One transcript record; fields are (name, hex) pairs sorted by name."""

    step: int
    actor: str
    kind: str
    fields: tuple[tuple[str, str], ...] = ()
    verdict: str = ""

    def render(self) -> str:
        parts = [f"step={self.step} actor={self.actor} kind={self.kind}"]
        parts.extend(f"{name}={value}" for name, value in self.fields)
        parts.append(f"verdict={self.verdict or '-'}")
        return " ".join(parts)


def _to_hex(value: "bytes | Digest") -> str:
    return value.hex() if isinstance(value, Digest) else bytes(value).hex()


def message_fields(message: object) -> tuple[tuple[str, str], ...]:
    """Hex-encode a wire message's dataclass fields, name-sorted."""
    pairs = [
        (f.name, _to_hex(getattr(message, f.name))) for f in dataclass_fields(message)
    ]
    return tuple(sorted(pairs))


class Transcript:
    """Append-only event log; renders to stable one-line-per-event text."""

    def __init__(self) -> None:
        self.events: list[Event] = []

    def add(
        self,
        actor: str,
        kind: str,
        fields: tuple[tuple[str, str], ...] = (),
        verdict: str = "",
    ) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        event = Event(len(self.events), actor, kind, tuple(sorted(fields)), verdict)
        self.events.append(event)
        return event

    def render(self) -> str:
        return "\n".join(event.render() for event in self.events) + "\n"

    @property
    def final(self) -> Event:
        return self.events[-1]


@dataclass(frozen=True)
class Tamper:
    """Flip ``bit_index`` of ``field`` on the first in-flight message that has it."""

    field: str
    bit_index: int


@dataclass(frozen=True)
class Drop:
    """Swallow the nth transmitted message (0-based)."""

    index: int = 0


def flip_bit(data: bytes, bit_index: int) -> bytes:
    if not 0 <= bit_index < len(data) * 8:
        raise ValueError(f"bit index {bit_index} out of range for {len(data)} bytes")
    out = bytearray(data)
    out[bit_index // 8] ^= 1 << (bit_index % 8)
    return bytes(out)


def tamper_message(message, field: str, bit_index: int):
    """Return a copy of the message with one bit of one field flipped."""
    value = getattr(message, field)
    if isinstance(value, Digest):
        flipped: "Digest | bytes" = Digest(flip_bit(value.value, bit_index))
    else:
        flipped = flip_bit(value, bit_index)
    return replace(message, **{field: flipped})


class AdversarialChannel:
    """Synchronous channel between the actors, with one adversary policy.

    ``sent`` counts every message placed on the wire, including replays
    and injections.  ``captured`` keeps each transmitted message (as the
    sender offered it) so replay scenarios can resend one verbatim.
    """

    def __init__(self, transcript: Transcript, policy: "Tamper | Drop | None" = None) -> None:
        self.transcript = transcript
        self.policy = policy
        self.captured: list = []
        self.action_log: list[str] = []
        self.sent = 0

    def transmit(self, sender: str, receiver: str, message):
        """Carry one message; returns what arrives (None if dropped)."""
        index = len(self.captured)
        self.sent += 1
        self.captured.append(message)
        self.transcript.add(sender, "send", message_fields(message))
        delivered = message
        if isinstance(self.policy, Drop) and self.policy.index == index:
            self._act(f"drop:{index}")
            return None
        if isinstance(self.policy, Tamper) and hasattr(message, self.policy.field):
            delivered = tamper_message(message, self.policy.field, self.policy.bit_index)
            self._act(f"tamper:{self.policy.field}:bit{self.policy.bit_index}")
            self.policy = None  # one flip per scenario
        self.transcript.add(receiver, "receive", message_fields(delivered))
        return delivered

    def replay(self, index: int, receiver: str):
        """Adversary re-delivers a previously captured message verbatim."""
        message = self.captured[index]
        self.sent += 1
        self._act(f"replay:{index}")
        self.transcript.add(receiver, "receive", message_fields(message))
        return message

    def inject(self, message, receiver: str):
        """Adversary delivers a message of its own making."""
        self.sent += 1
        self._act("inject")
        self.transcript.add(receiver, "receive", message_fields(message))
        return message

    def _act(self, action: str) -> None:
        self.action_log.append(action)
        self.transcript.add("adversary", "adversary-action", verdict=action)
