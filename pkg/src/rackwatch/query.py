"""Query language subset: parser and evaluator over the time-series store.

Supported shape:

    SELECT <expr>[, <expr>...] FROM (<measurement> | (<subquery>))
        [WHERE time >= <t> AND time <= <t>]
        [GROUP BY <tagkey>[, ...][, time(<dur>)]]

Functions: MEAN(field), TOP(field, n), ROUND(expr),
NON_NEGATIVE_DERIVATIVE(expr, dur). Durations are <int>(s|m|h); time
literals are now(), now() - <dur>, RFC3339, or raw nanoseconds. Subqueries
nest at most one level. A GROUP BY written after a subquery's closing
paren applies to the subquery when the subquery has none, and stray
closing parens at the very end of the input are tolerated; both quirks
let diagnostic queries written against the wider ecosystem run unchanged.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Union

from .store import TimeSeriesStore

NS_PER_SEC = 1_000_000_000
_DUR_NS = {"s": NS_PER_SEC, "m": 60 * NS_PER_SEC, "h": 3600 * NS_PER_SEC}

KNOWN_FUNCTIONS = {"MEAN": 1, "TOP": 2, "ROUND": 1, "NON_NEGATIVE_DERIVATIVE": 2}


class QueryParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"syntax error at position {pos}: {message}")
        self.pos = pos


class QueryEvalError(ValueError):
    pass


# -- AST ----------------------------------------------------------------


@dataclass(slots=True)
class FieldRef:
    name: str


@dataclass(slots=True)
class Call:
    func: str
    args: list  # FieldRef | Call | int | duration-ns depending on func


@dataclass(slots=True)
class Projection:
    expr: Union[FieldRef, Call]
    alias: Optional[str] = None


TimeExpr = tuple[str, int]  # ("now", offset_ns) | ("abs", ns)


@dataclass(slots=True)
class Query:
    projections: list[Projection]
    source: Union[str, "Query"]
    time_start: Optional[TimeExpr] = None
    time_end: Optional[TimeExpr] = None
    group_tags: list[str] = field(default_factory=list)
    bucket_ns: Optional[int] = None

    def source_measurement(self) -> str:
        src = self.source
        return src if isinstance(src, str) else src.source_measurement()

    def function_node_count(self) -> int:
        """Call nodes in all projections plus one per time() bucket clause."""
        count = 0

        def walk(expr):
            nonlocal count
            if isinstance(expr, Call):
                count += 1
                for a in expr.args:
                    walk(a)

        q: Optional[Query] = self
        while q is not None:
            for p in q.projections:
                walk(p.expr)
            if q.bucket_ns is not None:
                count += 1
            q = q.source if isinstance(q.source, Query) else None
        return count


@dataclass(slots=True)
class ResultRow:
    time_ns: int
    tags: dict[str, str]
    values: dict[str, Union[float, int, str]]


# -- lexer ---------------------------------------------------------------

_RFC3339 = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})")
_DURATION = re.compile(r"(\d+)([smh])(?![\w])")
_NUMBER = re.compile(r"\d+(\.\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "GROUP", "BY", "AS"}


@dataclass(slots=True)
class _Tok:
    kind: str  # KW IDENT QIDENT NUMBER DURATION TIMELIT SYM EOF
    text: str
    pos: int
    value: object = None


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise QueryParseError("unterminated quoted identifier", i)
            toks.append(_Tok("QIDENT", text[i + 1 : j], i))
            i = j + 1
            continue
        if ch == ">" or ch == "<":
            if i + 1 < n and text[i + 1] == "=":
                toks.append(_Tok("SYM", ch + "=", i))
                i += 2
                continue
            raise QueryParseError(f"unsupported operator {ch!r}", i)
        if ch in "(),-*":
            toks.append(_Tok("SYM", ch, i))
            i += 1
            continue
        m = _RFC3339.match(text, i)
        if m:
            toks.append(_Tok("TIMELIT", m.group(0), i, value=_rfc3339_ns(m.group(0))))
            i = m.end()
            continue
        m = _DURATION.match(text, i)
        if m:
            ns = int(m.group(1)) * _DUR_NS[m.group(2)]
            toks.append(_Tok("DURATION", m.group(0), i, value=ns))
            i = m.end()
            continue
        m = _NUMBER.match(text, i)
        if m:
            t = m.group(0)
            toks.append(_Tok("NUMBER", t, i, value=float(t) if "." in t else int(t)))
            i = m.end()
            continue
        m = _WORD.match(text, i)
        if m:
            word = m.group(0)
            kind = "KW" if word.upper() in _KEYWORDS else "IDENT"
            toks.append(_Tok(kind, word, i))
            i = m.end()
            continue
        raise QueryParseError(f"unexpected character {ch!r}", i)
    toks.append(_Tok("EOF", "", n))
    return toks


def _rfc3339_ns(text: str) -> int:
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    dt = datetime.fromisoformat(iso)
    return int(dt.timestamp() * NS_PER_SEC)


def format_rfc3339(ts_ns: int) -> str:
    dt = datetime.fromtimestamp(ts_ns / NS_PER_SEC, tz=timezone.utc)
    frac = ts_ns % NS_PER_SEC
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if frac:
        base += f".{frac:09d}".rstrip("0")
    return base + "Z"


# -- parser --------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        tok = self.cur
        where = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise QueryParseError(f"{message}, found {where}", tok.pos)

    def expect_kw(self, word: str):
        if self.cur.kind == "KW" and self.cur.text.upper() == word:
            return self.advance()
        self.fail(f"expected {word}")

    def at_kw(self, word: str) -> bool:
        return self.cur.kind == "KW" and self.cur.text.upper() == word

    def expect_sym(self, sym: str):
        if self.cur.kind == "SYM" and self.cur.text == sym:
            return self.advance()
        self.fail(f"expected {sym!r}")

    def at_sym(self, sym: str) -> bool:
        return self.cur.kind == "SYM" and self.cur.text == sym

    def parse(self) -> Query:
        q = self.query(depth=0)
        while self.at_sym(")"):  # tolerate stray trailing parens
            self.advance()
        if self.cur.kind != "EOF":
            self.fail("expected end of query")
        return q

    def query(self, depth: int) -> Query:
        self.expect_kw("SELECT")
        projections = [self.projection(depth)]
        while self.at_sym(","):
            self.advance()
            projections.append(self.projection(depth))
        self.expect_kw("FROM")
        source = self.source(depth)
        time_start = time_end = None
        if self.at_kw("WHERE"):
            self.advance()
            time_start, time_end = self.time_condition()
        group_tags: list[str] = []
        bucket_ns = None
        if self.at_kw("GROUP"):
            self.advance()
            self.expect_kw("BY")
            group_tags, bucket_ns = self.group_items()
        q = Query(projections, source, time_start, time_end, group_tags, bucket_ns)
        if isinstance(source, Query) and not source.group_tags and source.bucket_ns is None:
            # grouping written after the subquery's closing paren
            source.group_tags = group_tags
            source.bucket_ns = bucket_ns
            q.group_tags, q.bucket_ns = [], None
        return q

    def projection(self, depth: int) -> Projection:
        expr = self.expr(depth, top=True)
        alias = None
        if self.at_kw("AS"):
            self.advance()
            alias = self.ident("alias")
        return Projection(expr, alias)

    def expr(self, depth: int, top: bool = False):
        tok = self.cur
        if tok.kind == "IDENT" and self.toks[self.i + 1].kind == "SYM" and self.toks[self.i + 1].text == "(":
            return self.call(depth, top)
        if tok.kind in ("IDENT", "QIDENT"):
            self.advance()
            return FieldRef(tok.text)
        self.fail("expected field or function")

    def call(self, depth: int, top: bool):
        name_tok = self.advance()
        func = name_tok.text.upper()
        if func not in KNOWN_FUNCTIONS:
            raise QueryParseError(f"unknown function {name_tok.text!r}", name_tok.pos)
        self.expect_sym("(")
        args: list = []
        if func == "TOP":
            if depth > 0 or not top:
                raise QueryParseError("TOP is only allowed in the top-level projection", name_tok.pos)
            args.append(self.field_arg())
            self.expect_sym(",")
            ntok = self.cur
            if ntok.kind != "NUMBER" or not isinstance(ntok.value, int) or ntok.value < 1:
                self.fail("TOP needs a positive integer count")
            self.advance()
            args.append(ntok.value)
        elif func == "MEAN":
            args.append(self.field_arg())
        elif func == "ROUND":
            args.append(self.expr(depth, top=top))
        elif func == "NON_NEGATIVE_DERIVATIVE":
            args.append(self.expr(depth))
            self.expect_sym(",")
            dtok = self.cur
            if dtok.kind != "DURATION":
                self.fail("NON_NEGATIVE_DERIVATIVE needs a duration")
            self.advance()
            args.append(dtok.value)
        self.expect_sym(")")
        return Call(func, args)

    def field_arg(self) -> FieldRef:
        tok = self.cur
        if tok.kind in ("IDENT", "QIDENT"):
            self.advance()
            return FieldRef(tok.text)
        self.fail("expected field name")

    def ident(self, what: str) -> str:
        tok = self.cur
        if tok.kind in ("IDENT", "QIDENT"):
            self.advance()
            return tok.text
        self.fail(f"expected {what}")

    def source(self, depth: int):
        if self.at_sym("("):
            if depth >= 1:
                raise QueryParseError("subqueries may only nest one level", self.cur.pos)
            self.advance()
            inner = self.query(depth + 1)
            if self.at_sym(")"):
                self.advance()
            return inner
        tok = self.cur
        if tok.kind in ("IDENT", "QIDENT"):
            self.advance()
            return tok.text
        self.fail("expected measurement name or subquery")

    def time_condition(self) -> tuple[TimeExpr, TimeExpr]:
        start = self.time_bound(">=")
        self.expect_kw("AND")
        end = self.time_bound("<=")
        return start, end

    def time_bound(self, op: str) -> TimeExpr:
        tok = self.cur
        if tok.kind != "IDENT" or tok.text != "time":
            self.fail("expected time")
        self.advance()
        self.expect_sym(op)
        return self.time_expr()

    def time_expr(self) -> TimeExpr:
        tok = self.cur
        if tok.kind == "IDENT" and tok.text == "now":
            self.advance()
            self.expect_sym("(")
            self.expect_sym(")")
            offset = 0
            if self.at_sym("-"):
                self.advance()
                dtok = self.cur
                if dtok.kind != "DURATION":
                    self.fail("expected duration after now() -")
                self.advance()
                offset = -dtok.value
            return ("now", offset)
        if tok.kind == "TIMELIT":
            self.advance()
            return ("abs", tok.value)
        if tok.kind == "NUMBER" and isinstance(tok.value, int):
            self.advance()
            return ("abs", tok.value)
        self.fail("expected time literal")

    def group_items(self) -> tuple[list[str], Optional[int]]:
        tags: list[str] = []
        bucket_ns = None
        while True:
            tok = self.cur
            if tok.kind == "IDENT" and tok.text == "time" and self.toks[self.i + 1].text == "(":
                self.advance()
                self.expect_sym("(")
                dtok = self.cur
                if dtok.kind != "DURATION" or dtok.value <= 0:
                    self.fail("time() needs a positive duration")
                self.advance()
                self.expect_sym(")")
                bucket_ns = dtok.value
            elif tok.kind in ("IDENT", "QIDENT"):
                self.advance()
                tags.append(tok.text)
            else:
                self.fail("expected tag key or time(<dur>)")
            if self.at_sym(","):
                self.advance()
                continue
            return tags, bucket_ns


def parse_query(text: str) -> Query:
    return _Parser(_lex(text)).parse()


# -- evaluation ----------------------------------------------------------


def round_half_away(v: float) -> int:
    return math.floor(v + 0.5) if v >= 0 else math.ceil(v - 0.5)


def _resolve_time(expr: Optional[TimeExpr], now_ns: int) -> Optional[int]:
    if expr is None:
        return None
    kind, value = expr
    return now_ns + value if kind == "now" else value


def _group_key(tags: dict[str, str], group_tags: list[str]) -> tuple[str, ...]:
    return tuple(tags.get(t, "") for t in group_tags)


def _collect_groups(
    store: TimeSeriesStore,
    measurement: str,
    fieldname: str,
    t0: Optional[int],
    t1: Optional[int],
    group_tags: list[str],
) -> dict[tuple[str, ...], list[tuple[int, float]]]:
    groups: dict[tuple[str, ...], list[tuple[int, float]]] = {}
    for tags, ts_list, vals in store.range_points(measurement, fieldname, t0, t1):
        key = _group_key(tags, group_tags)
        bucket = groups.setdefault(key, [])
        bucket.extend(zip(ts_list, vals))
    for pts in groups.values():
        pts.sort(key=lambda p: p[0])
    return groups


def _bucket_means(
    points: list[tuple[int, float]], bucket_ns: Optional[int], t0: Optional[int]
) -> list[tuple[int, float]]:
    """Mean per epoch-aligned bucket; without a bucket width, one mean over
    the whole range stamped at the range start (or 0 when unbounded)."""
    if not points:
        return []
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    if bucket_ns:
        for ts, v in points:
            b = ts - ts % bucket_ns
            sums[b] = sums.get(b, 0.0) + v
            counts[b] = counts.get(b, 0) + 1
    else:
        b = t0 if t0 is not None else 0
        sums[b] = sum(v for _, v in points)
        counts[b] = len(points)
    return [(b, sums[b] / counts[b]) for b in sorted(sums)]


def mean_windows(
    store: TimeSeriesStore,
    measurement: str,
    fieldname: str,
    t0: Optional[int],
    t1: Optional[int],
    bucket_ns: Optional[int],
    group_tags: list[str],
    out_name: str = "mean",
) -> list[ResultRow]:
    """Arithmetic mean per (group, epoch-aligned bucket); empty buckets omitted."""
    rows: list[ResultRow] = []
    with store.lock:
        groups = _collect_groups(store, measurement, fieldname, t0, t1, group_tags)
    for key in sorted(groups):
        tags = dict(zip(group_tags, key))
        for b, mean in _bucket_means(groups[key], bucket_ns, t0):
            rows.append(ResultRow(b, tags, {out_name: mean}))
    return rows


def nonneg_derivative(
    rows: list[ResultRow], unit_ns: int, value_name: str, out_name: str = "non_negative_derivative"
) -> list[ResultRow]:
    """Per-group rate between consecutive rows, scaled to unit_ns, emitted at
    the later row's time; strictly negative rates are dropped, zero kept."""
    out: list[ResultRow] = []
    last: dict[tuple[tuple[str, str], ...], tuple[int, float]] = {}
    for row in rows:
        if value_name not in row.values:
            continue
        key = tuple(sorted(row.tags.items()))
        v = row.values[value_name]
        prev = last.get(key)
        last[key] = (row.time_ns, v)
        if prev is None:
            continue
        t1, v1 = prev
        dt = row.time_ns - t1
        if dt <= 0:
            continue
        rate = (v - v1) * unit_ns / dt
        if rate >= 0:
            out.append(ResultRow(row.time_ns, dict(row.tags), {out_name: rate}))
    return out


def top_n(rows: list[ResultRow], value_name: str, n: int) -> list[ResultRow]:
    """The n greatest values across all groups, descending; ties broken by
    earlier timestamp then lexicographic group tags."""
    if n < 1:
        raise QueryEvalError("top_n needs n >= 1")
    candidates = [r for r in rows if value_name in r.values]
    candidates.sort(key=lambda r: (-r.values[value_name], r.time_ns, tuple(sorted(r.tags.items()))))
    return candidates[:n]


def eval_query(store: TimeSeriesStore, q: Query, now_ns: int) -> list[ResultRow]:
    """Evaluate a parsed query; deterministic given (store contents, q, now)."""
    with store.lock:
        return _eval(store, q, now_ns)


def _eval(store: TimeSeriesStore, q: Query, now_ns: int) -> list[ResultRow]:
    if isinstance(q.source, Query):
        inner = _eval(store, q.source, now_ns)
        return _eval_over_rows(q, inner, now_ns)
    return _eval_measurement(store, q, now_ns)


def _proj_name(p: Projection, default: str) -> str:
    return p.alias if p.alias else default


def _eval_measurement(store: TimeSeriesStore, q: Query, now_ns: int) -> list[ResultRow]:
    t0 = _resolve_time(q.time_start, now_ns)
    t1 = _resolve_time(q.time_end, now_ns)
    measurement = q.source

    top_proj = _find_top(q.projections)
    if top_proj is not None:
        if len(q.projections) != 1:
            raise QueryEvalError("TOP over a measurement must be the only projection")
        return _eval_top_points(store, q, measurement, t0, t1, now_ns)

    merged: dict[tuple[tuple[str, ...], int], dict[str, object]] = {}
    order: list[tuple[tuple[str, ...], int]] = []
    for p in q.projections:
        name, series = _eval_proj_measurement(store, q, p, measurement, t0, t1)
        for key, value in series:
            cell = merged.get(key)
            if cell is None:
                merged[key] = cell = {}
                order.append(key)
            cell[name] = value
    order.sort(key=lambda k: (k[0], k[1]))
    rows = []
    for key, ts in order:
        tags = dict(zip(q.group_tags, key))
        rows.append(ResultRow(ts, tags, merged[(key, ts)]))
    return rows


def _eval_proj_measurement(store, q: Query, p: Projection, measurement, t0, t1):
    """Returns (output name, [((group_key, ts), value)])."""
    expr = p.expr
    rounders = 0
    while isinstance(expr, Call) and expr.func == "ROUND":
        rounders += 1
        expr = expr.args[0]

    if isinstance(expr, FieldRef):
        groups = _collect_groups(store, measurement, expr.name, t0, t1, q.group_tags)
        if q.bucket_ns is not None:
            raise QueryEvalError("raw field selection cannot be grouped by time()")
        out = []
        for key in sorted(groups):
            for ts, v in groups[key]:
                out.append(((key, ts), _round_times(v, rounders)))
        return _proj_name(p, expr.name), out

    if isinstance(expr, Call) and expr.func == "MEAN":
        fieldname = expr.args[0].name
        groups = _collect_groups(store, measurement, fieldname, t0, t1, q.group_tags)
        out = []
        for key in sorted(groups):
            for b, mean in _bucket_means(groups[key], q.bucket_ns, t0):
                out.append(((key, b), _round_times(mean, rounders)))
        return _proj_name(p, "round" if rounders else "mean"), out

    if isinstance(expr, Call) and expr.func == "NON_NEGATIVE_DERIVATIVE":
        inner, unit_ns = expr.args
        if isinstance(inner, Call) and inner.func == "MEAN":
            fieldname = inner.args[0].name
            groups = _collect_groups(store, measurement, fieldname, t0, t1, q.group_tags)
            source = {key: _bucket_means(groups[key], q.bucket_ns, t0) for key in groups}
        elif isinstance(inner, FieldRef):
            source = _collect_groups(store, measurement, inner.name, t0, t1, q.group_tags)
        else:
            raise QueryEvalError("NON_NEGATIVE_DERIVATIVE needs a field or MEAN argument")
        out = []
        for key in sorted(source):
            pts = source[key]
            for i in range(1, len(pts)):
                (ta, va), (tb, vb) = pts[i - 1], pts[i]
                if tb <= ta:
                    continue
                rate = (vb - va) * unit_ns / (tb - ta)
                if rate >= 0:
                    out.append(((key, tb), _round_times(rate, rounders)))
        return _proj_name(p, "round" if rounders else "non_negative_derivative"), out

    raise QueryEvalError(f"unsupported projection {expr!r} over a measurement")


def _round_times(v: float, times: int):
    return round_half_away(v) if times else v


def _find_top(projections: list[Projection]) -> Optional[Projection]:
    for p in projections:
        expr = p.expr
        while isinstance(expr, Call) and expr.func == "ROUND":
            expr = expr.args[0]
        if isinstance(expr, Call) and expr.func == "TOP":
            return p
    return None


def _eval_top_points(store, q: Query, measurement, t0, t1, now_ns) -> list[ResultRow]:
    p = q.projections[0]
    expr = p.expr
    rounders = 0
    while isinstance(expr, Call) and expr.func == "ROUND":
        rounders += 1
        expr = expr.args[0]
    fieldname = expr.args[0].name
    n = expr.args[1]
    groups = _collect_groups(store, measurement, fieldname, t0, t1, q.group_tags)
    rows = []
    for key in sorted(groups):
        tags = dict(zip(q.group_tags, key))
        for ts, v in groups[key]:
            rows.append(ResultRow(ts, tags, {fieldname: v}))
    selected = top_n(rows, fieldname, n)
    name = _proj_name(p, "round" if rounders else "top")
    return [
        ResultRow(r.time_ns, r.tags, {name: _round_times(r.values[fieldname], rounders)})
        for r in selected
    ]


def _eval_over_rows(q: Query, rows: list[ResultRow], now_ns: int) -> list[ResultRow]:
    t0 = _resolve_time(q.time_start, now_ns)
    t1 = _resolve_time(q.time_end, now_ns)
    if t0 is not None or t1 is not None:
        rows = [
            r
            for r in rows
            if (t0 is None or r.time_ns >= t0) and (t1 is None or r.time_ns <= t1)
        ]

    top_proj = _find_top(q.projections)
    if top_proj is not None:
        expr = top_proj.expr
        rounders = 0
        while isinstance(expr, Call) and expr.func == "ROUND":
            rounders += 1
            expr = expr.args[0]
        value_name, n = expr.args[0].name, expr.args[1]
        selected = top_n(rows, value_name, n)
        out_name = _proj_name(top_proj, "round" if rounders else "top")
        out_rows = []
        for r in selected:
            values: dict[str, object] = {}
            for p in q.projections:
                if p is top_proj:
                    values[out_name] = _round_times(r.values[value_name], rounders)
                else:
                    name, v = _ref_over_row(p, r)
                    values[name] = v
            out_rows.append(ResultRow(r.time_ns, dict(r.tags), values))
        return out_rows

    out_rows = []
    for r in rows:
        values = {}
        for p in q.projections:
            name, v = _ref_over_row(p, r)
            values[name] = v
        out_rows.append(ResultRow(r.time_ns, dict(r.tags), values))
    return out_rows


def _ref_over_row(p: Projection, row: ResultRow):
    expr = p.expr
    rounders = 0
    while isinstance(expr, Call) and expr.func == "ROUND":
        rounders += 1
        expr = expr.args[0]
    if not isinstance(expr, FieldRef):
        raise QueryEvalError("only field references and ROUND apply row-wise over a subquery")
    name = expr.name
    if name in row.values:
        v = row.values[name]
        return _proj_name(p, name), _round_times(v, rounders) if isinstance(v, (int, float)) else v
    return _proj_name(p, name), row.tags.get(name, "")


# -- output --------------------------------------------------------------


def rows_to_json(rows: list[ResultRow]) -> list[dict]:
    return [{"time": r.time_ns, "tags": r.tags, "values": r.values} for r in rows]


def format_table(rows: list[ResultRow], name: str) -> str:
    """Aligned text table: `name:` header, time column, then value columns."""
    columns: list[str] = []
    for r in rows:
        for c in r.values:
            if c not in columns:
                columns.append(c)
    header = ["time"] + columns
    body = []
    for r in rows:
        cells = [format_rfc3339(r.time_ns)]
        for c in columns:
            v = r.values.get(c, "")
            if isinstance(v, float) and v.is_integer():
                v = int(v)
            cells.append(str(v))
        body.append(cells)
    widths = [len(h) for h in header]
    for cells in body:
        for i, cell in enumerate(cells):
            widths[i] = max(widths[i], len(cell))
    lines = [f"name: {name}"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for cells in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines)
