"""Coordinator-model protocols with bit-exact transcripts.

Players exchange messages only with the coordinator; the channel API makes
other edges unrepresentable.  Protocol randomness is an explicit shared
tape of 32-bit words, so fixing the coins means fixing the tape, and a
run is deterministic given (inputs, tape).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random

from .errors import ProtocolStateError, RoundLimitError

COORDINATOR = "coordinator"


def player_name(i: int) -> str:
    return f"p{i}"


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    bits: str

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise ValueError("messages are bit strings")
        if COORDINATOR not in (self.sender, self.receiver):
            raise ValueError("only player-coordinator edges are allowed")


@dataclass(frozen=True)
class Transcript:
    messages: tuple[Message, ...]
    output: object

    @property
    def total_bits(self) -> int:
        return sum(len(m.bits) for m in self.messages)

    def bits_touching(self, player: int) -> int:
        name = player_name(player)
        return sum(len(m.bits) for m in self.messages
                   if m.sender == name or m.receiver == name)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps({"from": m.sender, "to": m.receiver, "bits": m.bits})
                         for m in self.messages) + ("\n" if self.messages else "")


class RandomTape:
    """Finite shared-randomness tape of 32-bit words with a read cursor."""

    def __init__(self, words):
        self.words = tuple(int(w) & 0xFFFFFFFF for w in words)
        self.cursor = 0

    @classmethod
    def fresh(cls, length: int, rng: Random) -> "RandomTape":
        return cls(rng.getrandbits(32) for _ in range(length))

    def word(self) -> int:
        if self.cursor >= len(self.words):
            raise ProtocolStateError("random tape exhausted")
        w = self.words[self.cursor]
        self.cursor += 1
        return w

    def below(self, bound: int) -> int:
        """Word reduced mod bound; bias is < bound / 2^32, fine at desk scale."""
        return self.word() % bound

    def event(self, num: int, den: int) -> bool:
        """True with probability num/den (exact for den dividing 2^32)."""
        return self.word() % den < num


class Channel:
    """Message router enforcing the star topology and a message budget."""

    def __init__(self, players: int, message_limit: int):
        self.players = players
        self.message_limit = message_limit
        self.messages: list[Message] = []
        self.output = None
        self.finished = False

    def _push(self, msg: Message):
        if len(self.messages) >= self.message_limit:
            raise RoundLimitError(f"exceeded {self.message_limit} messages")
        self.messages.append(msg)

    def to_coordinator(self, player: int, bits: str):
        self._push(Message(player_name(player), COORDINATOR, bits))

    def to_player(self, player: int, bits: str):
        self._push(Message(COORDINATOR, player_name(player), bits))

    def finish(self, output):
        if self.finished:
            raise ProtocolStateError("output already produced")
        self.output = output
        self.finished = True


@dataclass(frozen=True)
class Protocol:
    """A runnable coordinator-model protocol.

    run(channel, inputs, tape) drives the whole interaction; tape_words
    declares how much shared randomness one run consumes.
    """

    name: str
    players: int
    run: object
    tape_words: int = 0
    message_limit: int = 4096


def run_with_tape(protocol: Protocol, inputs, tape: RandomTape) -> Transcript:
    if len(inputs) != protocol.players:
        raise ValueError(f"{protocol.players} inputs expected")
    channel = Channel(protocol.players, protocol.message_limit)
    protocol.run(channel, tuple(inputs), tape)
    if not channel.finished:
        raise ProtocolStateError("protocol ended without output")
    return Transcript(tuple(channel.messages), channel.output)


def run_coordinator(protocol: Protocol, inputs, rng: Random) -> Transcript:
    """Run with a fresh tape drawn from rng; deterministic given the draw."""
    return run_with_tape(protocol, inputs, RandomTape.fresh(protocol.tape_words, rng))


def _encode(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


# ---------------------------------------------------------------------------
# protocol constructors used by the experiments


def send_everything_protocol(problem, s: int) -> Protocol:
    """Every player ships its input's index; coordinator outputs the class."""
    width = max(1, (len(problem.group.elements) - 1).bit_length())
    index = problem.group.index

    def run(channel, inputs, tape):
        decoded = []
        for i, x in enumerate(inputs):
            channel.to_coordinator(i, _encode(index[x], width))
            decoded.append(x)
        product = problem.group.product(decoded)
        channel.finish(problem.classify(product))

    return Protocol(f"send-everything[{problem.name},s={s}]", s, run)


def variable_length_protocol(problem, s: int) -> Protocol:
    """Input-dependent message lengths: index sent in minimal binary."""
    index = problem.group.index

    def run(channel, inputs, tape):
        for i, x in enumerate(inputs):
            idx = index[x]
            channel.to_coordinator(i, format(idx, "b"))
        product = problem.group.product(inputs)
        channel.finish(problem.classify(product))

    width = max(1, (len(problem.group.elements) - 1).bit_length())
    return Protocol(f"variable-length[{problem.name},s={s}]", s, run,
                    message_limit=max(64, s * width * 4))


def constant_protocol(s: int, value) -> Protocol:
    def run(channel, inputs, tape):
        channel.finish(value)

    return Protocol(f"constant[{value!r}]", s, run)


def noisy_class_protocol(problem, flip) -> Protocol:
    """Two-player exact class computation with an injected flip rate.

    flip is a (num, den) pair or a mapping class-value -> (num, den); a
    firing flip moves the output to the next class value cyclically, so
    the emitted answer is wrong exactly when the flip fires.
    """
    width = max(1, (len(problem.group.elements) - 1).bit_length())
    index = problem.group.index
    values = problem.class_values

    def flip_for(value):
        if isinstance(flip, dict):
            return flip.get(value, (0, 1))
        return flip

    def run(channel, inputs, tape):
        for i, x in enumerate(inputs):
            channel.to_coordinator(i, _encode(index[x], width))
        value = problem.classify(problem.group.product(inputs))
        num, den = flip_for(value)
        fire = tape.event(num, den)
        if fire and value is not None:
            pos = values.index(value)
            value = values[(pos + 1) % len(values)]
        channel.finish(value)

    return Protocol(f"noisy-class[{problem.name}]", 2, run, tape_words=1)


def rerandomized_protocol(problem, family, base: Protocol) -> Protocol:
    """Composite that maps the input by a random family member, then runs base.

    The family index comes off the shared tape, so a coin fixing freezes
    the map along with the base protocol's coins; communication cost is
    exactly the base protocol's.
    """
    if base.players != 2:
        raise ValueError("re-randomization applies to two-player protocols")

    def run(channel, inputs, tape):
        h = family.indices[tape.below(family.size)]
        g1, g2 = family.apply(h, inputs[0], inputs[1])
        base.run(channel, (g1, g2), tape)

    return Protocol(f"rerandomized[{base.name}]", 2, run,
                    tape_words=1 + base.tape_words, message_limit=base.message_limit)
