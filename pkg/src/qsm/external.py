"""Line-oriented protocol for classifiers running in a child process.

Session, newline-delimited UTF-8 over the child's stdin/stdout::

    -> HELLO qsm-model-protocol/1
    <- CLASSES c1 c2 ... cK
    -> PREDICT m
    -> m lines of comma-separated feature values (dataset column order)
    <- m lines, one class identifier each
    -> BYE

Metric values are written in shortest round-trip form, categorical values as
their category identifiers.
"""
from __future__ import annotations

import atexit
import shlex
import subprocess
import sys
import tempfile
import threading
from typing import IO, Sequence

import numpy as np

from .data import ClassSet, Dataset
from .model import Classifier

PROTOCOL = "qsm-model-protocol/1"


class ExternalModelError(RuntimeError):
    """Protocol violation or failure of an external model process."""


class ExternalModel(Classifier):
    """Classifier backed by a child process speaking the line protocol.

    The process is started lazily on first use and reused for every call
    until :meth:`close`. Calls are serialised with a lock.
    """

    def __init__(self, cmd: str | Sequence[str], timeout: float = 60.0):
        self.cmd = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        if not self.cmd:
            raise ExternalModelError("empty model command")
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._stderr: IO | None = None
        self._class_set: ClassSet | None = None
        self._lock = threading.Lock()

    @property
    def concurrent_safe(self) -> bool:
        return False

    @property
    def class_set(self) -> ClassSet:
        with self._lock:
            self._ensure_started()
            return self._class_set

    def _diagnostics(self) -> str:
        if self._stderr is None:
            return ""
        try:
            self._stderr.seek(0)
            text = self._stderr.read().decode("utf-8", "replace").strip()
        except (OSError, ValueError):
            return ""
        return f"\n--- model stderr ---\n{text}" if text else ""

    def _fail(self, message: str):
        if self._proc is not None and self._proc.poll() is not None:
            message += f" (model exited with code {self._proc.returncode})"
        raise ExternalModelError(message + self._diagnostics())

    def _send(self, text: str) -> None:
        try:
            self._proc.stdin.write(text.encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._proc.wait(timeout=self.timeout)
            self._fail("model process closed its input")

    def _readline(self, what: str) -> str:
        raw = self._proc.stdout.readline()
        if not raw:
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                pass
            self._fail(f"model process ended before sending {what}")
        return raw.decode("utf-8").rstrip("\r\n")

    def _ensure_started(self) -> None:
        if self._proc is not None:
            return
        self._stderr = tempfile.TemporaryFile()
        try:
            self._proc = subprocess.Popen(
                self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=self._stderr
            )
        except OSError as err:
            raise ExternalModelError(f"cannot start model {self.cmd!r}: {err}") from None
        _OPEN.add(self)
        self._send(f"HELLO {PROTOCOL}\n")
        line = self._readline("its class list")
        head, *classes = line.split()
        if head != "CLASSES" or not classes:
            self._fail(f"expected 'CLASSES c1 ... cK', got {line!r}")
        self._class_set = ClassSet(tuple(classes))

    def predict(self, ds: Dataset) -> np.ndarray:
        return np.asarray(self.predict_rows(ds.row_texts()), dtype=object)

    def predict_rows(self, rows: Sequence[Sequence[str]]) -> list[str]:
        with self._lock:
            self._ensure_started()
            payload = [f"PREDICT {len(rows)}\n"]
            payload += [",".join(str(v) for v in row) + "\n" for row in rows]
            self._send("".join(payload))
            labels = []
            for i in range(len(rows)):
                label = self._readline(f"the label for row {i}").strip()
                if label not in self._class_set:
                    self._fail(
                        f"row {i}: label {label!r} is not a declared class {list(self._class_set)}"
                    )
                labels.append(label)
            return labels

    def close(self) -> None:
        with self._lock:
            proc, self._proc = self._proc, None
            if proc is None:
                return
            _OPEN.discard(self)
            try:
                proc.stdin.write(b"BYE\n")
                proc.stdin.close()
            except (BrokenPipeError, OSError, ValueError):
                pass
            try:
                proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
            proc.stdout.close()
            if self._stderr is not None:
                self._stderr.close()
                self._stderr = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


_OPEN: set[ExternalModel] = set()
_BY_COMMAND: dict[tuple[str, ...], ExternalModel] = {}


@atexit.register
def _close_all() -> None:
    for model in list(_OPEN):
        model.close()


def external_predict(cmd: str | Sequence[str], rows: Dataset | Sequence[Sequence[str]]) -> list[str]:
    """Labels for ``rows`` from the model process started by ``cmd``.

    One process per distinct command is kept alive for the rest of the run.
    """
    key = tuple(shlex.split(cmd) if isinstance(cmd, str) else cmd)
    model = _BY_COMMAND.get(key)
    if model is None or model._proc is None:
        model = _BY_COMMAND[key] = ExternalModel(list(key))
    if isinstance(rows, Dataset):
        rows = rows.row_texts()
    return model.predict_rows(rows)


def serve(model: Classifier, template: Dataset, stdin=None, stdout=None) -> None:
    """Answer protocol requests for ``model`` until ``BYE`` or end of input.

    Incoming rows are parsed against ``template``'s feature names and kinds.
    """
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout

    def reply(text):
        stdout.write(text + "\n")
        stdout.flush()

    hello = stdin.readline().strip()
    if hello != f"HELLO {PROTOCOL}":
        raise ExternalModelError(f"unexpected greeting {hello!r}")
    reply("CLASSES " + " ".join(model.class_set))
    while True:
        line = stdin.readline()
        if not line or line.strip() == "BYE":
            return
        cmd, _, count = line.strip().partition(" ")
        if cmd != "PREDICT":
            raise ExternalModelError(f"unexpected request {line.strip()!r}")
        m = int(count)
        cells = [stdin.readline().rstrip("\r\n").split(",") for _ in range(m)]
        if m == 0:
            continue
        cols = []
        for j, kind in enumerate(template.kinds):
            values = [row[j] for row in cells]
            if kind.is_metric:
                cols.append(np.array(values, dtype=float))
            else:
                cols.append(np.array([kind.index_of(v) for v in values]))
        batch = Dataset(template.feature_names, template.kinds, tuple(cols))
        reply("\n".join(str(label) for label in model.predict(batch)))
