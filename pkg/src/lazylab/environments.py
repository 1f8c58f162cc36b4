"""Environment frames with parent links, identified by handles.

A registry owns every frame created during one interpreter run.  Frames are
never destroyed, only marked DISCARDED: their bindings stay inspectable for
traces, but evaluation-time lookups refuse to touch them.  The root (global)
frame is created with the registry and cannot be discarded.
"""

from dataclasses import dataclass

from .errors import CannotDiscardGlobalError, DiscardedEnvError, UnboundNameError
from .trace import EventKind, TraceSink

LIVE = "LIVE"
DISCARDED = "DISCARDED"


@dataclass(frozen=True)
class Val:
    """A name bound directly to a value."""
    value: object


@dataclass(frozen=True)
class Prom:
    """A name bound to an unevaluated promise, by id."""
    promise: int


Binding = Val | Prom


class _Frame:
    __slots__ = ("id", "parent", "bindings", "status")

    def __init__(self, fid: int, parent: int | None):
        self.id = fid
        self.parent = parent
        self.bindings: dict[str, Binding] = {}
        self.status = LIVE


class EnvRegistry:
    """All environment frames belonging to a single run.

    The registry hands out integer ids; the global frame is id 0.  Child
    creation and discarding of non-global frames are traced.
    """

    def __init__(self, trace: TraceSink | None = None):
        self._trace = trace
        self._frames: list[_Frame] = [_Frame(0, None)]

    @property
    def global_id(self) -> int:
        return 0

    def _frame(self, env: int) -> _Frame:
        try:
            return self._frames[env]
        except IndexError:
            raise DiscardedEnvError(f"no such environment: {env}") from None

    def _require_live(self, env: int) -> _Frame:
        frame = self._frame(env)
        if frame.status is not LIVE:
            raise DiscardedEnvError(f"environment env{env} was discarded")
        return frame

    def is_live(self, env: int) -> bool:
        return self._frame(env).status is LIVE

    def child(self, parent: int) -> int:
        """Create an empty LIVE frame under `parent`."""
        self._require_live(parent)
        fid = len(self._frames)
        self._frames.append(_Frame(fid, parent))
        if self._trace is not None:
            self._trace.emit(EventKind.ENV_CREATED, f"env{fid}", f"parent=env{parent}")
        return fid

    def lookup(self, env: int, name: str) -> Binding:
        """Find `name` in the nearest frame of the parent chain."""
        frame = self._require_live(env)
        while True:
            if frame.status is not LIVE:
                raise DiscardedEnvError(
                    f"lookup of '{name}' crossed discarded frame env{frame.id}"
                )
            if name in frame.bindings:
                return frame.bindings[name]
            if frame.parent is None:
                raise UnboundNameError(name)
            frame = self._frame(frame.parent)

    def define(self, env: int, name: str, binding: Binding) -> None:
        """Create or overwrite `name` in exactly this frame, never a parent."""
        self._require_live(env).bindings[name] = binding

    def discard(self, env: int) -> None:
        if env == self.global_id:
            raise CannotDiscardGlobalError("the global environment cannot be discarded")
        frame = self._require_live(env)
        frame.status = DISCARDED
        if self._trace is not None:
            self._trace.emit(EventKind.ENV_DISCARDED, f"env{env}")

    # inspection helpers (work on discarded frames too)

    def status(self, env: int) -> str:
        return self._frame(env).status

    def parent_of(self, env: int) -> int | None:
        return self._frame(env).parent

    def bindings_of(self, env: int) -> dict[str, Binding]:
        return dict(self._frame(env).bindings)
