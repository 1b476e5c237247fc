"""Text formats: grid maps, multi-goal scenarios and solutions.

Map::

    type octile
    height H
    width W
    map
    <H rows of W glyphs: '.' free, '@' or 'T' blocked>

Scenario (0-based coordinates)::

    agents m
    agent <i> <row> <col>                      (m lines)
    task <j> <K> <r1> <c1> ... <rK> <cK>       (m lines)

Solution::

    assignment <agent> <task>                  (one line per agent)
    path <agent> <T> (r,c)(r,c)...             (T + 1 coordinates)
    flowtime <F>
"""
from __future__ import annotations

import re

import numpy as np

from .model import GridMap, Instance, Path, Plan, Task


class FormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_BLOCKED = {"@", "T"}
_FREE = {"."}


def _lines(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for n, line in enumerate(lines, 1):
        if line != line.rstrip():
            raise FormatError("trailing whitespace", n)
    return lines


def parse_map(text: str) -> GridMap:
    lines = _lines(text)
    if len(lines) < 4:
        raise FormatError("truncated header", len(lines) + 1)
    if lines[0] != "type octile":
        raise FormatError("expected 'type octile'", 1)
    dims = {}
    for n, key in ((2, "height"), (3, "width")):
        parts = lines[n - 1].split(" ")
        if len(parts) != 2 or parts[0] != key or not parts[1].isdigit() or int(parts[1]) < 1:
            raise FormatError(f"expected '{key} <positive integer>'", n)
        dims[key] = int(parts[1])
    if lines[3] != "map":
        raise FormatError("expected 'map'", 4)
    h, w = dims["height"], dims["width"]
    rows = lines[4:]
    if len(rows) != h:
        raise FormatError(f"expected {h} map rows, found {len(rows)}", 5 + min(len(rows), h))
    blocked = np.zeros((h, w), dtype=bool)
    for r, row in enumerate(rows):
        n = 5 + r
        if len(row) != w:
            raise FormatError(f"row has {len(row)} cells, expected {w}", n)
        for c, ch in enumerate(row):
            if ch in _BLOCKED:
                blocked[r, c] = True
            elif ch not in _FREE:
                raise FormatError(f"unknown glyph {ch!r}", n)
    return GridMap(blocked)


def write_map(grid: GridMap) -> str:
    out = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    for row in grid.blocked:
        out.append("".join("@" if b else "." for b in row))
    return "\n".join(out) + "\n"


def _ints(parts, n):
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise FormatError("expected integers", n) from None


def parse_scenario(text: str, grid: GridMap) -> Instance:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty scenario", 1)
    head = lines[0].split(" ")
    if len(head) != 2 or head[0] != "agents":
        raise FormatError("expected 'agents <m>'", 1)
    (m,) = _ints(head[1:], 1)
    if m < 1:
        raise FormatError("m >= 1 required", 1)
    if len(lines) != 1 + 2 * m:
        raise FormatError(f"expected {2 * m} agent/task lines, found {len(lines) - 1}", len(lines))
    starts = []
    for i in range(m):
        n = 2 + i
        parts = lines[n - 1].split(" ")
        if len(parts) != 4 or parts[0] != "agent":
            raise FormatError("expected 'agent <i> <row> <col>'", n)
        idx, r, c = _ints(parts[1:], n)
        if idx != i:
            raise FormatError(f"agent index {idx}, expected {i}", n)
        loc = (r, c)
        if not grid.in_bounds(loc):
            raise FormatError(f"start {loc} outside the map", n)
        if grid.blocked[r, c]:
            raise FormatError(f"blocked start {loc}", n)
        if loc in starts:
            raise FormatError(f"duplicate start {loc}", n)
        starts.append(loc)
    tasks = []
    for j in range(m):
        n = 2 + m + j
        parts = lines[n - 1].split(" ")
        if len(parts) < 5 or parts[0] != "task":
            raise FormatError("expected 'task <j> <K> <r1> <c1> ...'", n)
        vals = _ints(parts[1:], n)
        idx, k, coords = vals[0], vals[1], vals[2:]
        if idx != j:
            raise FormatError(f"task index {idx}, expected {j}", n)
        if k < 1 or len(coords) != 2 * k:
            raise FormatError(f"task declares {k} goals but lists {len(coords) // 2}", n)
        goals = list(zip(coords[::2], coords[1::2]))
        for g in goals:
            if not grid.is_free(g):
                raise FormatError(f"goal {g} blocked or outside the map", n)
        tasks.append(Task(goals))
    return Instance(grid, starts, tasks)


def write_scenario(instance: Instance) -> str:
    out = [f"agents {instance.num_agents}"]
    for i, (r, c) in enumerate(instance.starts):
        out.append(f"agent {i} {r} {c}")
    for j, task in enumerate(instance.tasks):
        coords = " ".join(f"{r} {c}" for r, c in task.goals)
        out.append(f"task {j} {len(task)} {coords}")
    return "\n".join(out) + "\n"


def format_solution(plan: Plan) -> str:
    out = [f"assignment {a} {t}" for a, t in enumerate(plan.assignment)]
    for a, path in enumerate(plan.paths):
        coords = "".join(f"({r},{c})" for r, c in path.locations)
        out.append(f"path {a} {path.finish_time} {coords}")
    out.append(f"flowtime {plan.flowtime}")
    return "\n".join(out) + "\n"


def write_solution(plan: Plan, stream) -> None:
    stream.write(format_solution(plan))


_COORD = re.compile(r"\((-?\d+),(-?\d+)\)")


def parse_solution(text: str) -> Plan:
    lines = _lines(text)
    assignment, paths = {}, {}
    flowtime = None
    for n, line in enumerate(lines, 1):
        parts = line.split(" ")
        if parts[0] == "assignment" and len(parts) == 3:
            a, t = _ints(parts[1:], n)
            if a in assignment:
                raise FormatError(f"second assignment for agent {a}", n)
            assignment[a] = t
        elif parts[0] == "path" and len(parts) == 4:
            a, T = _ints(parts[1:3], n)
            coords = parts[3]
            locs = [(int(r), int(c)) for r, c in _COORD.findall(coords)]
            if "".join(f"({r},{c})" for r, c in locs) != coords:
                raise FormatError("malformed coordinate list", n)
            if len(locs) != T + 1:
                raise FormatError(f"finish time {T} needs {T + 1} coordinates, found {len(locs)}", n)
            if a in paths:
                raise FormatError(f"second path for agent {a}", n)
            paths[a] = Path(locs)
        elif parts[0] == "flowtime" and len(parts) == 2:
            if n != len(lines):
                raise FormatError("flowtime must be the last line", n)
            (flowtime,) = _ints(parts[1:], n)
        else:
            raise FormatError(f"unrecognised line {line!r}", n)
    if flowtime is None:
        raise FormatError("missing flowtime line", len(lines) + 1)
    m = len(assignment)
    if sorted(assignment) != list(range(m)) or sorted(paths) != list(range(m)):
        raise FormatError("agents must be numbered 0..m-1 with one assignment and one path each")
    return Plan(tuple(assignment[a] for a in range(m)), tuple(paths[a] for a in range(m)), flowtime)
