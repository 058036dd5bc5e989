"""Problem instances: data model, JSON I/O, validation and precedence queries.

Operations are numbered ``1..o`` and machines ``1..m``. Everything that
defines an instance is an integer except the overlap coefficient, which is
kept as an exact :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Mapping

from .calendar import Calendar, completion_time, is_valid_start, partial_completion

# Ancestor bitsets are memoized up to this many operations; beyond it
# reachability falls back to a DFS per query.
BITSET_LIMIT = 4096


class InstanceError(ValueError):
    """Base class for instance loading problems."""


class InstanceFormatError(InstanceError):
    """The text is not valid JSON or does not follow the instance schema."""


class InstanceValidationError(InstanceError):
    """The instance parsed but violates one or more invariants."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


@dataclass(frozen=True)
class OperationSpec:
    job: int
    machines: Mapping[int, int]  # eligible machine -> processing time
    release: int = 0
    theta: Fraction = Fraction(1)

    @property
    def eligible(self) -> tuple[int, ...]:
        return tuple(sorted(self.machines))

    def partial_time(self, k: int) -> int:
        """``ceil(theta * p_ik)`` computed exactly."""
        p = self.machines[k]
        return -((-self.theta.numerator * p) // self.theta.denominator)


@dataclass(frozen=True)
class FixedAssignment:
    op: int
    machine: int
    start: int


@dataclass(frozen=True)
class UnavailabilityPeriod:
    start: int
    end: int


class SetupTable:
    """Sequence-dependent setup times, one dense matrix per machine.

    For machine ``k`` the matrix has a row per eligible predecessor plus a
    leading row for "first on the machine" and a column per eligible
    operation. Entries for pairs that are not both eligible cannot be stored.
    """

    def __init__(self, eligible_ops: Mapping[int, Iterable[int]]):
        self.ops: dict[int, tuple[int, ...]] = {k: tuple(sorted(v)) for k, v in eligible_ops.items()}
        self._col: dict[int, dict[int, int]] = {
            k: {op: idx for idx, op in enumerate(ops)} for k, ops in self.ops.items()
        }
        self._rows: dict[int, list[list[int]]] = {
            k: [[0] * len(ops) for _ in range(len(ops) + 1)] for k, ops in self.ops.items()
        }

    @classmethod
    def for_operations(cls, m: int, operations: Iterable[OperationSpec]) -> "SetupTable":
        eligible: dict[int, list[int]] = {k: [] for k in range(1, m + 1)}
        for i, op in enumerate(operations, start=1):
            for k in op.machines:
                eligible.setdefault(k, []).append(i)
        return cls(eligible)

    def gamma(self, k: int, i: int, j: int) -> int:
        """Setup of ``j`` on ``k`` when preceded by ``i`` (``i == 0``: first)."""
        col = self._col[k]
        row = 0 if i == 0 else col[i] + 1
        return self._rows[k][row][col[j]]

    def set(self, k: int, i: int, j: int, value: int) -> None:
        col = self._col.get(k)
        if col is None or j not in col or (i != 0 and i not in col):
            raise KeyError((k, i, j))
        row = 0 if i == 0 else col[i] + 1
        self._rows[k][row][col[j]] = value

    def set_matrix(self, k: int, rows: list[list[int]]) -> None:
        n_k = len(self.ops[k])
        if len(rows) != n_k + 1 or any(len(r) != n_k for r in rows):
            raise ValueError(f"setup matrix for machine {k} has the wrong shape")
        self._rows[k] = rows

    def entries(self) -> Iterable[tuple[int, int, int, int]]:
        """Yield ``(k, i, j, value)`` for every non-zero entry, ``i == 0`` for initial setups."""
        for k in sorted(self.ops):
            ops = self.ops[k]
            rows = self._rows[k]
            for r, row in enumerate(rows):
                i = 0 if r == 0 else ops[r - 1]
                for c, v in enumerate(row):
                    if v:
                        yield k, i, ops[c], v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SetupTable):
            return NotImplemented
        mine = {k: v for k, v in self.ops.items() if v}
        theirs = {k: v for k, v in other.ops.items() if v}
        return mine == theirs and all(self._rows[k] == other._rows[k] for k in mine)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SetupTable(machines={len(self.ops)}, nonzero={sum(1 for _ in self.entries())})"


class PrecedenceDag:
    """Arc set over operations ``1..o`` with successor/predecessor lists."""

    def __init__(self, o: int, arcs: Iterable[tuple[int, int]]):
        self.o = o
        self.succ: list[list[int]] = [[] for _ in range(o + 1)]
        self.pred: list[list[int]] = [[] for _ in range(o + 1)]
        for a, b in arcs:
            if 1 <= a <= o and 1 <= b <= o:
                self.succ[a].append(b)
                self.pred[b].append(a)
        for lst in self.succ:
            lst.sort()
        for lst in self.pred:
            lst.sort()

    @cached_property
    def topological_order(self) -> list[int] | None:
        """Kahn order (smallest id first among ready nodes); ``None`` if cyclic."""
        import heapq

        indeg = [len(p) for p in self.pred]
        ready = [i for i in range(1, self.o + 1) if indeg[i] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for j in self.succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        return order if len(order) == self.o else None

    @property
    def is_acyclic(self) -> bool:
        return self.topological_order is not None

    @cached_property
    def _descendants(self) -> list[int]:
        desc = [0] * (self.o + 1)
        for i in reversed(self.topological_order or []):
            bits = 0
            for j in self.succ[i]:
                bits |= desc[j] | (1 << j)
            desc[i] = bits
        return desc

    def has_path(self, a: int, b: int) -> bool:
        """True iff ``b`` is reachable from ``a`` through one or more arcs."""
        for x in (a, b):
            if not 1 <= x <= self.o:
                raise IndexError(f"operation {x} out of range 1..{self.o}")
        if self.o <= BITSET_LIMIT and self.is_acyclic:
            return bool(self._descendants[a] >> b & 1)
        seen = set()
        stack = list(self.succ[a])
        while stack:
            x = stack.pop()
            if x == b:
                return True
            if x not in seen:
                seen.add(x)
                stack.extend(self.succ[x])
        return False

    def find_cycle(self) -> list[int] | None:
        color = [0] * (self.o + 1)
        parent = [0] * (self.o + 1)
        for root in range(1, self.o + 1):
            if color[root]:
                continue
            stack = [(root, iter(self.succ[root]))]
            color[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = 2
                    stack.pop()
                elif color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(self.succ[nxt])))
                elif color[nxt] == 1:
                    cycle = [nxt]
                    x = node
                    while x != nxt:
                        cycle.append(x)
                        x = parent[x]
                    cycle.append(nxt)
                    return cycle[::-1]
        return None


@dataclass(frozen=True, eq=True)
class Instance:
    n: int
    m: int
    operations: tuple[OperationSpec, ...]
    arcs: tuple[tuple[int, int], ...] = ()
    calendars: tuple[Calendar, ...] = ()
    setup: SetupTable | None = None
    fixed: tuple[FixedAssignment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(sorted(tuple(a) for a in self.arcs)))
        cals = tuple(tuple(sorted(c)) for c in self.calendars)
        if len(cals) < self.m:
            cals = cals + ((),) * (self.m - len(cals))
        object.__setattr__(self, "calendars", cals)
        if self.setup is None:
            object.__setattr__(self, "setup", SetupTable.for_operations(self.m, self.operations))
        object.__setattr__(self, "fixed", tuple(sorted(self.fixed, key=lambda f: f.op)))

    __hash__ = None  # type: ignore[assignment]

    @property
    def o(self) -> int:
        return len(self.operations)

    def op(self, i: int) -> OperationSpec:
        return self.operations[i - 1]

    def calendar(self, k: int) -> Calendar:
        return self.calendars[k - 1]

    @cached_property
    def dag(self) -> PrecedenceDag:
        return PrecedenceDag(self.o, self.arcs)

    @cached_property
    def fixed_by_op(self) -> dict[int, FixedAssignment]:
        return {f.op: f for f in self.fixed}

    @cached_property
    def nonfixed(self) -> tuple[int, ...]:
        """Non-fixed operations in increasing id order (the genotype's index set)."""
        fx = self.fixed_by_op
        return tuple(i for i in range(1, self.o + 1) if i not in fx)

    @cached_property
    def eligible(self) -> tuple[tuple[int, ...], ...]:
        """Sorted eligible machines per op; index 0 is unused."""
        return ((),) + tuple(op.eligible for op in self.operations)

    @cached_property
    def fixed_timing(self) -> dict[int, tuple[int, int, int, int, int]]:
        """``op -> (s, c, c_bar, u, p)`` for fixed operations, from the calendar."""
        out = {}
        for f in self.fixed:
            spec = self.op(f.op)
            if f.machine not in spec.machines:
                continue
            p = spec.machines[f.machine]
            cal = self.calendar(f.machine) if 1 <= f.machine <= self.m else ()
            c, u = completion_time(cal, f.start, p)
            cbar = partial_completion(cal, f.start, spec.partial_time(f.machine))
            out[f.op] = (f.start, c, cbar, u, p)
        return out


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    invariant: str
    detail: str

    def __str__(self) -> str:
        return f"{self.invariant} violated: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def __contains__(self, invariant: str) -> bool:
        return any(v.invariant == invariant for v in self.violations)

    def add(self, invariant: str, detail: str) -> None:
        self.violations.append(Violation(invariant, detail))


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate_instance(inst: Instance) -> ValidationReport:
    """List every violated invariant of ``inst``; an empty report means valid."""
    rep = ValidationReport()
    if not (_is_int(inst.n) and inst.n >= 1):
        rep.add("job count", f"n={inst.n!r} must be a positive integer")
    if not (_is_int(inst.m) and inst.m >= 1):
        rep.add("machine count", f"m={inst.m!r} must be a positive integer")
    o = inst.o
    for i, op in enumerate(inst.operations, start=1):
        if not (_is_int(op.job) and 1 <= op.job <= inst.n):
            rep.add("job ids", f"operation {i} has job {op.job!r} outside 1..{inst.n}")
        if not op.machines:
            rep.add("eligible machines", f"operation {i} has no eligible machine")
        for k, p in op.machines.items():
            if not (_is_int(k) and 1 <= k <= inst.m):
                rep.add("eligible machines", f"operation {i} lists machine {k!r} outside 1..{inst.m}")
            if not (_is_int(p) and p >= 1):
                rep.add("processing time", f"p[{i},{k}]={p!r} must be an integer >= 1")
        if not (_is_int(op.release) and op.release >= 0):
            rep.add("release time", f"r[{i}]={op.release!r} must be a non-negative integer")
        if not (isinstance(op.theta, Fraction) and 0 < op.theta <= 1):
            rep.add("overlap coefficient", f"theta[{i}]={op.theta!r} must lie in (0, 1]")

    for a, b in inst.arcs:
        if not (_is_int(a) and _is_int(b) and 1 <= a <= o and 1 <= b <= o):
            rep.add("arc endpoints", f"arc ({a}, {b}) references an unknown operation")
        elif a == b:
            rep.add("arc endpoints", f"self-loop on operation {a}")
    if len(set(inst.arcs)) != len(inst.arcs):
        rep.add("arc endpoints", "duplicate arcs")
    cycle = inst.dag.find_cycle()
    if cycle:
        rep.add("dag acyclicity", "cycle " + " -> ".join(map(str, cycle)))

    if len(inst.calendars) != inst.m:
        rep.add("calendar machines", f"{len(inst.calendars)} calendars for {inst.m} machines")
    for k, cal in enumerate(inst.calendars, start=1):
        for a, b in cal:
            if not (_is_int(a) and _is_int(b) and 0 <= a < b):
                rep.add("calendar period", f"machine {k} has period [{a}, {b}]")
        for (a1, b1), (a2, b2) in zip(cal, cal[1:]):
            if a2 <= b1:
                rep.add("calendar disjointness", f"machine {k}: [{a1}, {b1}] and [{a2}, {b2}] intersect")

    for k, i, j, v in inst.setup.entries():
        if not (_is_int(v) and v >= 0):
            rep.add("setup values", f"setup (machine {k}, {i} -> {j}) = {v!r}")
    for k, ops in inst.setup.ops.items():
        for j in ops:
            if j > o or k not in inst.op(j).machines:
                rep.add("setup eligibility", f"machine {k} holds setups for ineligible operation {j}")

    _validate_fixed(inst, rep)
    return rep


def _validate_fixed(inst: Instance, rep: ValidationReport) -> None:
    o = inst.o
    seen = set()
    for f in inst.fixed:
        if not (1 <= f.op <= o):
            rep.add("fixed operation", f"fixed operation {f.op} does not exist")
            continue
        if f.op in seen:
            rep.add("fixed operation", f"operation {f.op} fixed twice")
        seen.add(f.op)
        spec = inst.op(f.op)
        if tuple(spec.machines) != (f.machine,):
            rep.add("fixed machine", f"operation {f.op}: F(i)={sorted(spec.machines)} must be {{{f.machine}}}")
        if not (_is_int(f.start) and f.start >= 0):
            rep.add("fixed start", f"operation {f.op} has start {f.start!r}")
        elif 1 <= f.machine <= inst.m and not is_valid_start(inst.calendar(f.machine), f.start):
            rep.add("fixed start", f"operation {f.op} starts at {f.start} inside a downtime of machine {f.machine}")
        if _is_int(f.start) and _is_int(spec.release) and f.start < spec.release:
            rep.add("fixed release", f"operation {f.op} starts at {f.start} before its release {spec.release}")
    if inst.dag.is_acyclic:
        fx = inst.fixed_by_op
        for i in fx:
            if 1 <= i <= o:
                for j in inst.dag.pred[i]:
                    if j not in fx:
                        rep.add("fixed-predecessor closure", f"fixed operation {i} has non-fixed predecessor {j}")
    if "fixed machine" in rep or "fixed start" in rep or "fixed operation" in rep:
        return
    timing = inst.fixed_timing
    by_machine: dict[int, list[int]] = {}
    for f in inst.fixed:
        by_machine.setdefault(f.machine, []).append(f.op)
    for k, ops in by_machine.items():
        ops.sort(key=lambda i: timing[i][0])
        for a, b in zip(ops, ops[1:]):
            if timing[b][0] < timing[a][1] or timing[b][0] == timing[a][0]:
                rep.add("fixed overlap", f"fixed operations {a} and {b} overlap on machine {k}")
    for a, b in inst.arcs:
        if a in timing and b in timing:
            if timing[b][0] < timing[a][2] or timing[b][1] < timing[a][1]:
                rep.add("fixed precedence", f"fixed operations {a} -> {b} violate the precedence timing")


def has_path(dag: PrecedenceDag, a: int, b: int) -> bool:
    return dag.has_path(a, b)


# --------------------------------------------------------------------------
# JSON


def _require(obj: Mapping, key: str, path: str, kind=int, default=...):
    if key not in obj:
        if default is not ...:
            return default
        raise InstanceFormatError(f"{path}.{key}: missing field")
    val = obj[key]
    if kind is int and not _is_int(val):
        raise InstanceFormatError(f"{path}.{key}: expected integer, got {val!r}")
    if kind is list and not isinstance(val, list):
        raise InstanceFormatError(f"{path}.{key}: expected array")
    if kind is dict and not isinstance(val, dict):
        raise InstanceFormatError(f"{path}.{key}: expected object")
    return val


def _pair(val: Any, path: str) -> tuple[int, int]:
    if not (isinstance(val, list) and len(val) == 2 and all(_is_int(v) for v in val)):
        raise InstanceFormatError(f"{path}: expected [int, int], got {val!r}")
    return val[0], val[1]


def instance_from_dict(doc: Mapping) -> Instance:
    """Build an :class:`Instance` from the decoded JSON document (no validation)."""
    if not isinstance(doc, dict):
        raise InstanceFormatError("$: expected an object")
    n = _require(doc, "n", "$")
    m = _require(doc, "m", "$")
    raw_ops = _require(doc, "operations", "$", list)
    ops_by_id: dict[int, OperationSpec] = {}
    for idx, rop in enumerate(raw_ops):
        path = f"$.operations[{idx}]"
        if not isinstance(rop, dict):
            raise InstanceFormatError(f"{path}: expected object")
        oid = _require(rop, "id", path)
        job = _require(rop, "job", path)
        machines = {}
        for midx, rm in enumerate(_require(rop, "machines", path, list)):
            mpath = f"{path}.machines[{midx}]"
            if not isinstance(rm, dict):
                raise InstanceFormatError(f"{mpath}: expected object")
            k = _require(rm, "k", mpath)
            if k in machines:
                raise InstanceFormatError(f"{mpath}.k: machine {k} listed twice")
            machines[k] = _require(rm, "p", mpath)
        release = _require(rop, "release", path, default=0)
        if not _is_int(release):
            raise InstanceFormatError(f"{path}.release: expected integer")
        rth = _require(rop, "theta", path, dict, default={"num": 1, "den": 1})
        num = _require(rth, "num", f"{path}.theta")
        den = _require(rth, "den", f"{path}.theta")
        if den == 0:
            raise InstanceFormatError(f"{path}.theta.den: zero denominator")
        if oid in ops_by_id:
            raise InstanceFormatError(f"{path}.id: duplicate operation id {oid}")
        ops_by_id[oid] = OperationSpec(job, dict(sorted(machines.items())), release, Fraction(num, den))
    o = len(ops_by_id)
    if sorted(ops_by_id) != list(range(1, o + 1)):
        rep = ValidationReport()
        rep.add("operation ids", "ids must be consecutive integers 1..o")
        raise InstanceValidationError(rep)
    operations = tuple(ops_by_id[i] for i in range(1, o + 1))

    arcs = [_pair(a, f"$.arcs[{idx}]") for idx, a in enumerate(_require(doc, "arcs", "$", list, default=[]))]

    periods: dict[int, list[tuple[int, int]]] = {}
    for idx, rc in enumerate(_require(doc, "calendars", "$", list, default=[])):
        path = f"$.calendars[{idx}]"
        if not isinstance(rc, dict):
            raise InstanceFormatError(f"{path}: expected object")
        k = _require(rc, "machine", path)
        if not (_is_int(m) and 1 <= k <= m):
            raise InstanceFormatError(f"{path}.machine: machine {k} outside 1..{m}")
        periods.setdefault(k, []).extend(
            _pair(p, f"{path}.periods[{j}]") for j, p in enumerate(_require(rc, "periods", path, list))
        )
    calendars = tuple(tuple(sorted(periods.get(k, ()))) for k in range(1, m + 1))

    setup = SetupTable.for_operations(m, operations)
    for key, entries in (("setup_initial", "initial"), ("setup", "between")):
        for idx, rs in enumerate(_require(doc, key, "$", list, default=[])):
            path = f"$.{key}[{idx}]"
            if not isinstance(rs, dict):
                raise InstanceFormatError(f"{path}: expected object")
            k = _require(rs, "machine", path)
            i = 0 if entries == "initial" else _require(rs, "from", path)
            j = _require(rs, "op" if entries == "initial" else "to", path)
            v = _require(rs, "value", path)
            try:
                setup.set(k, i, j, v)
            except KeyError:
                rep = ValidationReport()
                rep.add("setup eligibility", f"{path}: machine {k} is not eligible for the listed operations")
                raise InstanceValidationError(rep) from None

    fixed = []
    for idx, rf in enumerate(_require(doc, "fixed", "$", list, default=[])):
        path = f"$.fixed[{idx}]"
        if not isinstance(rf, dict):
            raise InstanceFormatError(f"{path}: expected object")
        fixed.append(FixedAssignment(_require(rf, "op", path), _require(rf, "machine", path), _require(rf, "start", path)))

    return Instance(n, m, operations, tuple(arcs), calendars, setup, tuple(fixed))


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance file in the JSON format.

    Raises :class:`InstanceFormatError` for syntax or schema errors and
    :class:`InstanceValidationError` when an invariant is violated.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    inst = instance_from_dict(doc)
    report = validate_instance(inst)
    if report:
        raise InstanceValidationError(report)
    return inst


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {"n": inst.n, "m": inst.m}
    doc["operations"] = [
        {
            "id": i,
            "job": op.job,
            "machines": [{"k": k, "p": p} for k, p in sorted(op.machines.items())],
            "release": op.release,
            "theta": {"num": op.theta.numerator, "den": op.theta.denominator},
        }
        for i, op in enumerate(inst.operations, start=1)
    ]
    doc["arcs"] = [[a, b] for a, b in inst.arcs]
    doc["calendars"] = [
        {"machine": k, "periods": [[a, b] for a, b in cal]}
        for k, cal in enumerate(inst.calendars, start=1)
        if cal
    ]
    initial, between = [], []
    for k, i, j, v in inst.setup.entries():
        if i == 0:
            initial.append({"machine": k, "op": j, "value": v})
        else:
            between.append({"machine": k, "from": i, "to": j, "value": v})
    doc["setup_initial"] = initial
    doc["setup"] = between
    doc["fixed"] = [{"op": f.op, "machine": f.machine, "start": f.start} for f in inst.fixed]
    return doc


def serialize_instance(inst: Instance) -> str:
    """Canonical JSON text: sorted entities, zero setups omitted."""
    return json.dumps(instance_to_dict(inst), separators=(",", ":")) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def convert_native(text: str) -> Instance:
    """Placeholder for the published benchmark files' native format.

    That format is not documented alongside the model; a faithful converter has
    to be written against the actual files.
    """
    raise NotImplementedError(
        "native benchmark format is undocumented; convert the files to the JSON schema first"
    )
