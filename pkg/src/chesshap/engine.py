"""Evaluator abstraction: built-in material scoring and external UCI engines.

Every evaluator judges positions from White's perspective. UCI engines report
scores relative to the side to move, so the client negates replies when Black
is on move; that negation is the single most bug-prone spot of the protocol
and is covered by byte-exact transcript fixtures.
"""

from __future__ import annotations

import os
import queue
import shutil
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from chesshap.position import BLACK, Position, to_fen

DEFAULT_PIECE_VALUES = {"P": 100, "N": 300, "B": 300, "R": 500, "Q": 900, "K": 0}

DEFAULT_ROOT_LIMIT_MS = 5000
DEFAULT_PERTURB_LIMIT_MS = 100

# Extra wall-clock allowance beyond `go movetime` before a search is declared
# stalled; engines need a moment to wrap up and print bestmove.
STALL_GRACE_SECONDS = 2.0


class EngineError(Exception):
    """Base for engine lifecycle and protocol failures."""


class SpawnFailed(EngineError):
    pass


class HandshakeTimeout(EngineError):
    pass


class ProtocolError(EngineError):
    pass


class EngineCrashed(EngineError):
    pass


class UnknownEvaluator(KeyError):
    """Requested evaluator id is not in the registry."""


@dataclass(frozen=True)
class EngineScore:
    """Raw engine verdict, normalised to White's perspective.

    Exactly one of ``cp`` (centipawns) or ``mate`` (signed moves to mate,
    positive when White mates) is set.
    """

    cp: Optional[int] = None
    mate: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.cp is None) == (self.mate is None):
            raise ValueError("score must be centipawns or mate, not both or neither")
        if self.mate == 0:
            raise ValueError("mate distance cannot be zero")

    @classmethod
    def centipawns(cls, value: int) -> "EngineScore":
        return cls(cp=value)

    @classmethod
    def mate_in(cls, moves: int) -> "EngineScore":
        return cls(mate=moves)

    def flipped(self) -> "EngineScore":
        if self.cp is not None:
            return EngineScore(cp=-self.cp)
        return EngineScore(mate=-self.mate)


@dataclass(frozen=True)
class EvalLimit:
    """Search budget for a single evaluation."""

    kind: str  # "movetime" | "depth" | "nodes"
    value: int

    def __post_init__(self) -> None:
        if self.kind not in ("movetime", "depth", "nodes"):
            raise ValueError(f"unknown limit kind {self.kind!r}")
        if self.value <= 0:
            raise ValueError("limit value must be positive")

    @classmethod
    def movetime(cls, millis: int) -> "EvalLimit":
        return cls("movetime", millis)

    @classmethod
    def depth(cls, plies: int) -> "EvalLimit":
        return cls("depth", plies)

    @classmethod
    def nodes(cls, count: int) -> "EvalLimit":
        return cls("nodes", count)

    def go_command(self) -> str:
        return f"go {self.kind} {self.value}"

    def wall_seconds(self) -> float:
        """Nominal wall-clock cost; depth/node searches have no natural bound."""
        if self.kind == "movetime":
            return self.value / 1000.0
        return 60.0

    def to_json(self) -> dict:
        return {self.kind: self.value}

    @classmethod
    def from_json(cls, data: Mapping) -> "EvalLimit":
        if len(data) != 1:
            raise ValueError(f"limit must have exactly one key, got {dict(data)!r}")
        kind, value = next(iter(data.items()))
        return cls(kind, int(value))


@dataclass(frozen=True)
class EvaluationOutcome:
    """Either a White-perspective score or a rejection reason."""

    score: Optional[EngineScore] = None
    rejection: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.score is not None

    @classmethod
    def scored(cls, score: EngineScore) -> "EvaluationOutcome":
        return cls(score=score)

    @classmethod
    def rejected(cls, reason: str) -> "EvaluationOutcome":
        return cls(rejection=reason)


def material_values() -> dict[str, int]:
    """Classical piece value table in centipawns; kings are priceless, so 0."""
    return dict(DEFAULT_PIECE_VALUES)


class MaterialEvaluator:
    """Deterministic built-in evaluator: signed material sum.

    Side-to-move independent and reentrant, which makes it the reference
    oracle for every attribution property test.
    """

    def __init__(self, values: Optional[Mapping[str, int]] = None, id: str = "material"):
        self.id = id
        self.values = material_values()
        if values:
            self.values.update(values)

    def evaluate(self, position: Position, limit: Optional[EvalLimit] = None) -> EvaluationOutcome:
        total = 0
        for piece in position.pieces:
            value = self.values[piece.kind]
            total += value if piece.color == "w" else -value
        return EvaluationOutcome.scored(EngineScore.centipawns(total))

    def close(self) -> None:
        pass


# ---------------------------------------------------------------------------
# UCI protocol
# ---------------------------------------------------------------------------


def parse_info_score(line: str) -> Optional[EngineScore]:
    """Score from one ``info`` line, relative to the side to move.

    Returns None for lines without a score payload. Raises ProtocolError when
    a score payload is present but malformed; a silently dropped score could
    flip the sign of an evaluation downstream.
    """
    tokens = line.split()
    if not tokens or tokens[0] != "info":
        return None
    try:
        at = tokens.index("score")
    except ValueError:
        return None
    try:
        unit = tokens[at + 1]
        value = int(tokens[at + 2])
    except (IndexError, ValueError):
        raise ProtocolError(f"malformed score in line: {line!r}") from None
    if unit == "cp":
        return EngineScore.centipawns(value)
    if unit == "mate":
        if value == 0:
            raise ProtocolError(f"mate 0 in line: {line!r}")
        return EngineScore.mate_in(value)
    raise ProtocolError(f"unknown score unit {unit!r} in line: {line!r}")


def score_from_transcript(lines: Iterable[str], side_to_move: str) -> EngineScore:
    """Final pre-bestmove score of a ``go`` reply, from White's perspective.

    UCI scores are relative to the mover, so replies are negated when Black
    is on move. Raises ProtocolError when the transcript ends, or reaches
    ``bestmove``, without any parseable score.
    """
    last: Optional[EngineScore] = None
    for line in lines:
        line = line.strip()
        score = parse_info_score(line)
        if score is not None:
            last = score
        if line.startswith("bestmove"):
            break
    if last is None:
        raise ProtocolError("engine produced bestmove without any score")
    return last.flipped() if side_to_move == BLACK else last


class UciEngine:
    """One external engine process speaking UCI over stdin/stdout.

    A single query may be in flight per process; the instance lock enforces
    that, so one UciEngine can be shared between threads (they serialise).
    """

    def __init__(
        self,
        command: Sequence[str] | str,
        options: Optional[Mapping[str, object]] = None,
        id: Optional[str] = None,
        handshake_timeout: float = 10.0,
        grace: float = STALL_GRACE_SECONDS,
    ):
        if isinstance(command, str):
            command = [command]
        self.command = list(command)
        self.options = dict(options or {})
        self.id = id or os.path.basename(self.command[0])
        self.handshake_timeout = handshake_timeout
        self.grace = grace
        self._lock = threading.Lock()
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._start()

    # -- process plumbing --------------------------------------------------

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SpawnFailed(f"cannot start {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self._proc,), daemon=True).start()
        self._handshake()

    def _pump(self, proc: subprocess.Popen) -> None:
        for line in proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)  # EOF marker

    def _send(self, text: str) -> None:
        try:
            self._proc.stdin.write(text + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EngineCrashed(f"{self.id}: write failed: {exc}") from exc

    def _read(self, timeout: float) -> Optional[str]:
        """Next line, or None on timeout. Raises EngineCrashed at EOF."""
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            return None
        if line is None:
            raise EngineCrashed(f"{self.id}: process closed its output")
        return line

    def _wait_for(self, token: str, timeout: float, error: type[EngineError]) -> None:
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise error(f"{self.id}: no {token!r} within {timeout:.1f}s")
            try:
                line = self._read(remaining)
            except EngineCrashed:
                raise error(f"{self.id}: process died before {token!r}") from None
            if line is not None and line.strip() == token:
                return

    def _handshake(self) -> None:
        self._send("uci")
        self._wait_for("uciok", self.handshake_timeout, HandshakeTimeout)
        for name, value in self.options.items():
            self._send(f"setoption name {name} value {value}")
        self._send("isready")
        self._wait_for("readyok", self.handshake_timeout, HandshakeTimeout)

    def _kill(self) -> None:
        if self._proc is None:
            return
        if self._proc.poll() is None:
            self._proc.kill()
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass

    def _recycle(self) -> None:
        self._kill()
        self._start()

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, position: Position, limit: EvalLimit) -> EvaluationOutcome:
        """Score one position; Rejected when the engine stalls on it.

        A stalled process is killed and respawned so the next query starts
        clean. A dead process raises EngineCrashed (the pool retries once).
        """
        with self._lock:
            if self._proc.poll() is not None:
                raise EngineCrashed(f"{self.id}: process exited with {self._proc.returncode}")
            fen = to_fen(position)
            self._send(f"position fen {fen}")
            self._send(limit.go_command())
            deadline = time.monotonic() + limit.wall_seconds() + self.grace
            last: Optional[EngineScore] = None
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    self._recycle()
                    return EvaluationOutcome.rejected(f"no reply within limit for {fen!r}")
                line = self._read(remaining)
                if line is None:
                    continue
                score = parse_info_score(line)
                if score is not None:
                    last = score
                if line.startswith("bestmove"):
                    break
            if last is None:
                raise ProtocolError(f"{self.id}: bestmove without any score for {fen!r}")
            return EvaluationOutcome.scored(
                last.flipped() if position.side_to_move == BLACK else last
            )

    def close(self) -> None:
        if self._proc is None or self._proc.poll() is not None:
            return
        try:
            self._send("quit")
            self._proc.wait(timeout=2)
        except (EngineCrashed, subprocess.TimeoutExpired):
            self._kill()


class EnginePool:
    """Fixed-size pool of evaluators with one query in flight per worker.

    ``evaluate`` borrows an idle worker; on EngineCrashed the worker is
    replaced and the query retried once before the error propagates.
    """

    def __init__(self, factory: Callable[[], object], size: Optional[int] = None):
        self.size = size or os.cpu_count() or 1
        self._factory = factory
        self._idle: "queue.Queue[object]" = queue.Queue()
        self._workers = [factory() for _ in range(self.size)]
        for worker in self._workers:
            self._idle.put(worker)
        self.id = getattr(self._workers[0], "id", "pool")

    def evaluate(self, position: Position, limit: EvalLimit) -> EvaluationOutcome:
        worker = self._idle.get()
        try:
            try:
                return worker.evaluate(position, limit)
            except EngineCrashed:
                replacement = self._replace(worker)
                worker = replacement
                return worker.evaluate(position, limit)
        finally:
            self._idle.put(worker)

    def evaluate_many(
        self, positions: Sequence[Position], limit: EvalLimit
    ) -> list[EvaluationOutcome]:
        """All positions in input order, fanned out across the workers."""
        if len(positions) <= 1 or self.size == 1:
            return [self.evaluate(p, limit) for p in positions]
        with ThreadPoolExecutor(max_workers=self.size) as pool:
            return list(pool.map(lambda p: self.evaluate(p, limit), positions))

    def _replace(self, dead: object) -> object:
        try:
            dead.close()
        except Exception:
            pass
        fresh = self._factory()
        self._workers[self._workers.index(dead)] = fresh
        return fresh

    def close(self) -> None:
        for worker in self._workers:
            try:
                worker.close()
            except Exception:
                pass


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluatorDescriptor:
    """How to obtain an evaluator plus its default search limits."""

    id: str
    kind: str = "uci"  # "uci" | "material"
    command: tuple[str, ...] = ()
    options: tuple[tuple[str, object], ...] = ()
    values: Optional[tuple[tuple[str, int], ...]] = None  # material table override
    root_limit: EvalLimit = field(default_factory=lambda: EvalLimit.movetime(DEFAULT_ROOT_LIMIT_MS))
    perturb_limit: EvalLimit = field(
        default_factory=lambda: EvalLimit.movetime(DEFAULT_PERTURB_LIMIT_MS)
    )

    def create(self) -> object:
        if self.kind == "material":
            return MaterialEvaluator(values=dict(self.values) if self.values else None, id=self.id)
        if self.kind == "uci":
            if not self.command:
                raise SpawnFailed(f"{self.id}: no command configured")
            return UciEngine(self.command, options=dict(self.options), id=self.id)
        raise ValueError(f"unknown evaluator kind {self.kind!r}")

    def create_pool(self, size: Optional[int] = None) -> object:
        if self.kind == "material":
            return self.create()  # reentrant, pooling is pointless
        return EnginePool(self.create, size=size)

    def to_json(self) -> dict:
        doc: dict = {
            "id": self.id,
            "kind": self.kind,
            "root_limit": self.root_limit.to_json(),
            "perturb_limit": self.perturb_limit.to_json(),
        }
        if self.command:
            doc["command"] = list(self.command)
        if self.options:
            doc["options"] = dict(self.options)
        if self.values is not None:
            doc["values"] = dict(self.values)
        return doc


def _descriptor_from_json(id: str, data: Mapping) -> EvaluatorDescriptor:
    command = data.get("command", ())
    if isinstance(command, str):
        command = [command]
    return EvaluatorDescriptor(
        id=id,
        kind=data.get("kind", "uci" if command else "material"),
        command=tuple(command),
        options=tuple(sorted(dict(data.get("options", {})).items())),
        values=tuple(sorted(dict(data["values"]).items())) if "values" in data else None,
        root_limit=EvalLimit.from_json(data["root_limit"])
        if "root_limit" in data
        else EvalLimit.movetime(DEFAULT_ROOT_LIMIT_MS),
        perturb_limit=EvalLimit.from_json(data["perturb_limit"])
        if "perturb_limit" in data
        else EvalLimit.movetime(DEFAULT_PERTURB_LIMIT_MS),
    )


class EngineRegistry:
    """Maps evaluator ids to descriptors; 'material' is always present."""

    def __init__(self, descriptors: Iterable[EvaluatorDescriptor] = ()):
        self._by_id: dict[str, EvaluatorDescriptor] = {}
        self.register(EvaluatorDescriptor(id="material", kind="material"))
        for descriptor in descriptors:
            self.register(descriptor)

    def register(self, descriptor: EvaluatorDescriptor) -> None:
        self._by_id[descriptor.id] = descriptor

    def descriptor(self, id: str) -> EvaluatorDescriptor:
        try:
            return self._by_id[id]
        except KeyError:
            raise UnknownEvaluator(id) from None

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def __contains__(self, id: str) -> bool:
        return id in self._by_id

    @classmethod
    def from_file(cls, path: str) -> "EngineRegistry":
        import json

        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        engines = doc.get("engines", doc)
        return cls(_descriptor_from_json(id, entry) for id, entry in engines.items())

    def resolve(self, engine: str) -> EvaluatorDescriptor:
        """Registry id, or a path to a UCI executable for ad-hoc use."""
        if engine in self:
            return self.descriptor(engine)
        if os.path.sep in engine or shutil.which(engine):
            resolved = shutil.which(engine) or engine
            return EvaluatorDescriptor(id=os.path.basename(engine), command=(resolved,))
        raise UnknownEvaluator(engine)
