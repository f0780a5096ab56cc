"""Plain-text file formats for systems, plants, designs, candidates and reports.

Every file is a sequence of lines.  Blank lines and text after '#' are
ignored.  A line is one of

    key value...                  scalar or string entry
    vector NAME n                 followed by n numbers (any line breaks)
    matrix NAME rows cols         followed by rows*cols numbers, row-major

The first entry must be `format KIND VERSION`.  docs/formats/ describes the
keys each kind requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .cls import ConewiseSystem
from .errors import FormatError
from .qclp import FoodChannel, Plant, QclpDesign
from .stability import PwqCandidate

VERSION = 1
SYSTEM_KINDS = ("cls-system", "cls-design")


@dataclass
class Document:
    kind: str
    version: int
    scalars: dict = field(default_factory=dict)
    arrays: dict = field(default_factory=dict)
    path: Optional[str] = None

    def need(self, key):
        if key in self.arrays:
            return self.arrays[key]
        if key in self.scalars:
            return self.scalars[key]
        raise FormatError(f"missing entry {key!r}", self.path)

    def number(self, key, default=None) -> float:
        if key not in self.scalars:
            if default is not None:
                return default
            raise FormatError(f"missing entry {key!r}", self.path)
        try:
            return float(self.scalars[key])
        except ValueError:
            raise FormatError(f"entry {key!r} is not a number: {self.scalars[key]!r}", self.path) from None

    def array(self, key, optional=False):
        if key not in self.arrays:
            if optional:
                return None
            raise FormatError(f"missing block {key!r}", self.path)
        return self.arrays[key]


def fmt(x: float) -> str:
    """Shortest round-tripping decimal form."""
    return repr(float(x))


def parse(text: str, path: Optional[str] = None) -> Document:
    tokens = []  # (line number, words)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append((lineno, line.split()))
    if not tokens or tokens[0][1][0] != "format" or len(tokens[0][1]) != 3:
        raise FormatError("first entry must be 'format KIND VERSION'", path, tokens[0][0] if tokens else 1)
    _, (_, kind, ver) = tokens[0]
    try:
        version = int(ver)
    except ValueError:
        raise FormatError(f"bad version {ver!r}", path, tokens[0][0]) from None
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path, tokens[0][0])
    doc = Document(kind, version, path=path)
    i = 1
    while i < len(tokens):
        lineno, words = tokens[i]
        head = words[0]
        if head in ("vector", "matrix"):
            if (head == "vector" and len(words) != 3) or (head == "matrix" and len(words) != 4):
                raise FormatError(f"malformed {head} header", path, lineno)
            name = words[1]
            try:
                shape = tuple(int(w) for w in words[2:])
            except ValueError:
                raise FormatError(f"bad {head} size", path, lineno) from None
            if any(s < 0 for s in shape):
                raise FormatError(f"negative {head} size", path, lineno)
            count = math.prod(shape)
            vals = []
            i += 1
            while len(vals) < count:
                if i >= len(tokens):
                    raise FormatError(f"{head} {name}: expected {count} numbers, got {len(vals)}", path, lineno)
                ln, ws = tokens[i]
                try:
                    vals.extend(float(w) for w in ws)
                except ValueError:
                    raise FormatError(f"{head} {name}: non-numeric entry", path, ln) from None
                i += 1
            if len(vals) != count:
                raise FormatError(f"{head} {name}: expected {count} numbers, got {len(vals)}", path, lineno)
            if not all(math.isfinite(v) for v in vals):
                raise FormatError(f"{head} {name}: non-finite entry", path, lineno)
            if name in doc.arrays or name in doc.scalars:
                raise FormatError(f"duplicate entry {name!r}", path, lineno)
            doc.arrays[name] = np.array(vals).reshape(shape)
            continue
        if head in doc.arrays or head in doc.scalars:
            raise FormatError(f"duplicate entry {head!r}", path, lineno)
        doc.scalars[head] = " ".join(words[1:])
        i += 1
    return doc


def read(path) -> Document:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read: {exc.strerror}", str(p)) from None
    return parse(text, str(p))


class Writer:
    """Builds a document; `digits` rounds numbers for display copies."""

    def __init__(self, kind: str, digits: Optional[int] = None):
        self.lines = [f"format {kind} {VERSION}"]
        self.digits = digits

    def num(self, x) -> str:
        return fmt(x) if self.digits is None else f"{float(x):.{self.digits}g}"

    def comment(self, text: str):
        for line in text.splitlines():
            self.lines.append(f"# {line}")

    def scalar(self, key: str, value):
        if isinstance(value, float):
            value = self.num(value)
        self.lines.append(f"{key} {value}")

    def vector(self, name: str, v):
        v = np.ravel(np.asarray(v, float))
        self.lines.append(f"vector {name} {v.size}")
        self.lines.append(" ".join(self.num(x) for x in v))

    def matrix(self, name: str, a):
        a = np.atleast_2d(np.asarray(a, float))
        self.lines.append(f"matrix {name} {a.shape[0]} {a.shape[1]}")
        for row in a:
            self.lines.append(" ".join(self.num(x) for x in row))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.text())


# ---------------------------------------------------------------------------
# systems


def system_from(doc: Document) -> ConewiseSystem:
    if doc.kind not in SYSTEM_KINDS:
        raise FormatError(f"expected a system file, found {doc.kind!r}", doc.path)
    m = int(doc.number("m"))
    n = int(doc.number("n"))
    modes = []
    for i in range(1, m + 1):
        a = doc.array(f"A{i}")
        if a.ndim != 2 or a.shape != (n, n):
            raise FormatError(f"A{i} must be {n} x {n}", doc.path)
        modes.append(a)
    tol = doc.number("continuity_tol", 1e-9)
    name = doc.scalars.get("name", "")
    k = doc.array("K", optional=True)
    if k is not None:
        if m != 2 or k.size != n:
            raise FormatError("K needs m = 2 and n entries", doc.path)
        return ConewiseSystem(tuple(modes), K=k.ravel(), continuity_tol=tol, name=name)
    cones = []
    for i in range(1, m + 1):
        g = doc.array(f"G{i}")
        if g.ndim != 2 or g.shape[1] != n:
            raise FormatError(f"G{i} must have {n} columns", doc.path)
        cones.append(g)
    return ConewiseSystem(tuple(modes), cones=tuple(cones), continuity_tol=tol, name=name)


def write_system_blocks(w: Writer, sys: ConewiseSystem):
    if sys.name:
        w.scalar("name", sys.name.replace("#", "").replace("\n", " "))
    w.scalar("n", sys.n)
    w.scalar("m", sys.m)
    w.scalar("continuity_tol", float(sys.continuity_tol))
    for i, a in enumerate(sys.modes, start=1):
        w.matrix(f"A{i}", a)
    if sys.K is not None:
        w.vector("K", sys.K)
    else:
        for i, g in enumerate(sys.cones, start=1):
            w.matrix(f"G{i}", g)


def system_text(sys: ConewiseSystem) -> str:
    w = Writer("cls-system")
    write_system_blocks(w, sys)
    return w.text()


def load_system(path) -> ConewiseSystem:
    return system_from(read(path))


# ---------------------------------------------------------------------------
# plants and designs


def plant_from(doc: Document) -> Plant:
    if doc.kind not in ("cls-plant", "cls-design"):
        raise FormatError(f"expected a plant file, found {doc.kind!r}", doc.path)
    ac = doc.array("Ac")
    n = ac.shape[0]
    if ac.ndim != 2 or ac.shape != (n, n):
        raise FormatError("Ac must be square", doc.path)
    bc = doc.array("Bc").ravel()
    qc = doc.array("Qc")
    if bc.size != n or qc.shape != (n, n):
        raise FormatError(f"Bc needs {n} entries and Qc must be {n} x {n}", doc.path)
    cc = doc.array("Cc", optional=True)
    food = None
    if "Af" in doc.arrays:
        food = FoodChannel(doc.array("Af"), doc.array("Bf").ravel(), doc.array("Cf").ravel(),
                           doc.array("food_entry").ravel())
    elif "food_gain" in doc.scalars:
        lags = doc.array("food_lags").ravel()
        food = FoodChannel.from_gain_and_lags(doc.number("food_gain"), lags, doc.array("food_entry").ravel())
    model = doc.scalars.get("input_model", "impulse")
    if model not in ("impulse", "zoh"):
        raise FormatError(f"input_model must be impulse or zoh, not {model!r}", doc.path)
    return Plant(ac, bc, qc, doc.number("Rc"), doc.number("T"), None if cc is None else cc.ravel(),
                 food, model, doc.scalars.get("name", ""))


def write_plant_blocks(w: Writer, plant: Plant):
    w.scalar("T", float(plant.T))
    w.scalar("Rc", float(plant.Rc))
    w.scalar("input_model", plant.input_model)
    w.matrix("Ac", plant.Ac)
    w.vector("Bc", plant.Bc)
    w.matrix("Qc", plant.Qc)
    if plant.Cc is not None:
        w.vector("Cc", plant.Cc)
    if plant.food is not None:
        w.comment("food channel: an impulse of g grams sets the channel state to g * Bf")
        w.matrix("Af", plant.food.Af)
        w.vector("Bf", plant.food.Bf)
        w.vector("Cf", plant.food.Cf)
        w.vector("food_entry", plant.food.entry)


def plant_text(plant: Plant) -> str:
    w = Writer("cls-plant")
    if plant.name:
        w.scalar("name", plant.name.replace("#", ""))
    write_plant_blocks(w, plant)
    return w.text()


def design_text(d: QclpDesign) -> str:
    w = Writer("cls-design")
    w.comment("closed loop: A1 = A + B K on {Kx >= 0}, A2 = A on {Kx <= 0}, u = max(0, K x)")
    write_system_blocks(w, d.closed_loop)
    w.matrix("A", d.A)
    w.vector("B", d.B)
    w.matrix("Q", d.Q)
    w.vector("S", d.S)
    w.scalar("R", float(d.R))
    w.matrix("P", d.P)
    if d.plant is not None:
        write_plant_blocks(w, d.plant)
    return w.text()


def design_from(doc: Document) -> QclpDesign:
    if doc.kind != "cls-design":
        raise FormatError(f"expected a design file, found {doc.kind!r}", doc.path)
    sys = system_from(doc)
    plant = plant_from(doc) if "Ac" in doc.arrays else None
    return QclpDesign(doc.array("A"), doc.array("B").ravel(), doc.array("Q"), doc.array("S").ravel(),
                      doc.number("R"), doc.array("P"), sys.K.copy(), sys, plant)


# ---------------------------------------------------------------------------
# candidates


def candidate_from(doc: Document) -> PwqCandidate:
    if doc.kind != "cls-pwq":
        raise FormatError(f"expected a candidate file, found {doc.kind!r}", doc.path)
    ys = []
    for i in range(1, 5):
        key = f"Y{i}"
        if key in doc.arrays:
            ys.append(doc.arrays[key])
        else:
            ys.append(doc.number(key))
    return PwqCandidate.build(doc.array("P1"), doc.array("P2"), *ys)


def candidate_text(cand: PwqCandidate) -> str:
    w = Writer("cls-pwq")
    w.matrix("P1", cand.P1)
    w.matrix("P2", cand.P2)
    for i, y in enumerate(cand.Y, start=1):
        w.matrix(f"Y{i}", y)
    return w.text()


# ---------------------------------------------------------------------------
# switch-certificate summaries


@dataclass(frozen=True)
class SwitchSummary:
    verdict: str
    bound: Optional[int]
    i1: int
    caps: tuple
    frontier: str


def summary_from(doc: Document) -> SwitchSummary:
    if doc.kind != "cls-switch-report":
        raise FormatError(f"expected a switch report, found {doc.kind!r}", doc.path)
    verdict = doc.need("verdict")
    bound = doc.scalars.get("bound", "none")
    caps = tuple(int(c) for c in doc.scalars.get("caps", "").split())
    return SwitchSummary(verdict, None if bound == "none" else int(bound), int(doc.number("i1")),
                         caps, doc.scalars.get("frontier", ""))
