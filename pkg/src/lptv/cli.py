"""Command-line front end.

System files are plain text with bracketed sections::

    [header]
    name = 4-4:H
    kind = trig
    n = 2
    L = 2
    N = 1

    [params]
    a0 = 3/2

    [coefficients]
    # omega-power harmonic parity : row-major entries
    0 0 cos : 3/2 1 1/2 -1/3
    1 2 sin : 0 -1 1 0

kind = piecewise files carry a [segments] section of "fraction : entries"
lines; kind = reference names a catalog entry whose coefficients have
infinitely many harmonics and therefore cannot be listed.  Solution files
(kind = solution) hold [P] coefficient lines and [R] lines "power : entries".

Exit codes: 0 ok, 1 parse error, 2 no solution, 3 verification failed,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import catalog as cat
from . import floquet, harmonic, monodromy, stability
from . import _linalg as la
from .trigmat import COS, SIN, OmegaPolyMatrix, TrigMatrix

EXIT_OK, EXIT_PARSE, EXIT_NO_SOLUTION, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3, 4

SECTIONS = {
    "trig": ("header", "params", "coefficients"),
    "piecewise": ("header", "params", "segments"),
    "reference": ("header", "params"),
    "solution": ("header", "P", "R"),
}
HEADER_KEYS = {
    "trig": ("name", "kind", "n", "L", "N"),
    "piecewise": ("name", "kind", "n", "segments"),
    "reference": ("name", "kind", "n"),
    "solution": ("name", "kind", "n", "p", "trace_shift"),
}
PARITY_NAMES = {COS: "cos", SIN: "sin"}
PARITY_CODES = {"cos": COS, "sin": SIN}


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<input>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line, self.column = line, column


@dataclass
class SystemDefinition:
    name: str
    kind: str
    n: int
    system: object  # TrigMatrix, PiecewiseSystem or CatalogEntry
    params: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# number formatting
# --------------------------------------------------------------------------


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def parse_number(text: str, line: int = 0, column: int = 0, source: str = "<input>"):
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        if any(ch in text for ch in ".eE") or text.lower() in ("nan", "inf", "-inf"):
            return float(text)
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad number {text!r}", line, column, source) from None


def _row_major(M) -> str:
    return " ".join(format_number(v) for v in np.asarray(M, dtype=object).ravel())


# --------------------------------------------------------------------------
# emit
# --------------------------------------------------------------------------


def _header_lines(pairs) -> list[str]:
    return ["[header]"] + [f"{k} = {v}" for k, v in pairs]


def _param_lines(params: dict) -> list[str]:
    return ["", "[params]"] + [f"{k} = {format_number(v) if not isinstance(v, str) else v}"
                               for k, v in params.items()]


def _term_lines(M: TrigMatrix) -> list[str]:
    return [f"{r} {l} {PARITY_NAMES[p]} : {_row_major(c)}" for r, l, p, c in M.terms()]


def emit_system(name: str, A, params: dict | None = None) -> str:
    params = params or {}
    if isinstance(A, cat.CatalogEntry):
        params = params or A.params
        A = A.A if (isinstance(A.A, (TrigMatrix, cat.PiecewiseSystem))) else A
    if isinstance(A, TrigMatrix):
        lines = _header_lines([("name", name), ("kind", "trig"), ("n", A.n), ("L", A.L), ("N", A.N)])
        lines += _param_lines(params)
        lines += ["", "[coefficients]"] + _term_lines(A)
    elif isinstance(A, cat.PiecewiseSystem):
        mats = [(np.asarray(m(1.0), dtype=float), frac) for m, frac in A.segments]
        lines = _header_lines([("name", name), ("kind", "piecewise"), ("n", mats[0][0].shape[0]),
                               ("segments", len(mats))])
        lines += _param_lines(params)
        lines += ["", "[segments]"] + [f"{format_number(Fraction(frac).limit_denominator(10 ** 9))} : {_row_major(m)}"
                                       for m, frac in mats]
    else:
        n = np.asarray(A.A_eval(1.0, 1.0)).shape[0]
        lines = _header_lines([("name", name), ("kind", "reference"), ("n", n)])
        lines += _param_lines(params)
    return "\n".join(lines) + "\n"


def emit_solution(name: str, sol: floquet.FloquetSolution) -> str:
    shift = "periodic" if sol.shift is not None else "none"
    lines = _header_lines([("name", name), ("kind", "solution"), ("n", sol.P.n), ("p", sol.p),
                           ("trace_shift", shift)])
    lines += ["", "[P]"] + _term_lines(sol.P)
    lines += ["", "[R]"] + [f"{r} : {_row_major(s)}" for r, s in enumerate(sol.R.slices)]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parse
# --------------------------------------------------------------------------


def _sections(text: str, source: str):
    sections, order = {}, []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError("unterminated section header", lineno, len(raw), source)
            current = stripped[1:-1].strip()
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno, 1, source)
            sections[current] = []
            order.append(current)
            continue
        if current is None:
            raise ParseError("content before the first section", lineno, 1, source)
        indent = len(raw) - len(raw.lstrip())
        sections[current].append((lineno, indent, stripped))
    return sections, order


def _key_values(lines, allowed, source):
    out = {}
    for lineno, indent, text in lines:
        if "=" not in text:
            raise ParseError("expected key = value", lineno, indent + 1, source)
        key, value = (part.strip() for part in text.split("=", 1))
        if allowed is not None and key not in allowed:
            raise ParseError(f"unknown key {key!r}", lineno, indent + 1, source)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno, indent + 1, source)
        out[key] = (value, lineno, indent + 1)
    return out


def _int_field(header, key, source):
    if key not in header:
        raise ParseError(f"missing header key {key!r}", 0, 0, source)
    value, lineno, col = header[key]
    try:
        v = int(value)
    except ValueError:
        raise ParseError(f"{key} must be an integer", lineno, col, source) from None
    if v < 0:
        raise ParseError(f"{key} must be non-negative", lineno, col, source)
    return v


def _entries(text, n_entries, lineno, col, source):
    tokens = text.split()
    if len(tokens) != n_entries:
        raise ParseError(f"expected {n_entries} entries, found {len(tokens)}", lineno, col, source)
    vals = []
    offset = col
    for tok in tokens:
        vals.append(parse_number(tok, lineno, offset, source))
        offset += len(tok) + 1
    return vals


def _matrix(vals, rows, cols):
    exact = all(isinstance(v, Fraction) for v in vals)
    if exact:
        M = np.empty((rows, cols), dtype=object)
        for i, v in enumerate(vals):
            M[i // cols, i % cols] = v
        return M
    return np.array([float(v) for v in vals]).reshape(rows, cols)


def _coefficient_terms(lines, n, source):
    terms = []
    seen = set()
    for lineno, indent, text in lines:
        if ":" not in text:
            raise ParseError("expected 'power harmonic parity : entries'", lineno, indent + 1, source)
        key, data = text.split(":", 1)
        parts = key.split()
        if len(parts) != 3:
            raise ParseError("expected three key fields", lineno, indent + 1, source)
        try:
            r, l = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("power and harmonic must be integers", lineno, indent + 1, source) from None
        if r < 0 or l < 0:
            raise ParseError("power and harmonic must be non-negative", lineno, indent + 1, source)
        if parts[2] not in PARITY_CODES:
            raise ParseError(f"parity must be cos or sin, not {parts[2]!r}", lineno, indent + 1, source)
        parity = PARITY_CODES[parts[2]]
        if (r, l, parity) in seen:
            raise ParseError("duplicate coefficient", lineno, indent + 1, source)
        seen.add((r, l, parity))
        vals = _entries(data, n * n, lineno, indent + len(key) + 2, source)
        terms.append((r, l, parity, _matrix(vals, n, n)))
    if not terms:
        return TrigMatrix.zeros(n)
    exact = all(la.is_exact_array(c) for *_, c in terms)
    if not exact:
        terms = [(r, l, p, la.to_float(c)) for r, l, p, c in terms]
    return TrigMatrix.from_terms(terms, n=n)


def _kind_of(sections, source):
    if "header" not in sections:
        raise ParseError("missing [header] section", 1, 1, source)
    header = _key_values(sections["header"], None, source)
    if "kind" in header:
        kind, lineno, col = header["kind"]
        if kind not in SECTIONS:
            raise ParseError(f"unknown kind {kind!r}", lineno, col, source)
    else:
        kind = "trig"
    return kind


def _check_sections(order, kind, source, sections):
    for name in order:
        if name not in SECTIONS[kind]:
            lineno = sections[name][0][0] - 1 if sections[name] else 0
            raise ParseError(f"unknown section [{name}]", lineno, 1, source)


def parse_system(text: str, source: str = "<input>") -> SystemDefinition:
    sections, order = _sections(text, source)
    kind = _kind_of(sections, source)
    if kind == "solution":
        raise ParseError("expected a system file, found a solution file", 1, 1, source)
    _check_sections(order, kind, source, sections)
    header = _key_values(sections["header"], HEADER_KEYS[kind], source)
    name = header.get("name", ("", 0, 0))[0]
    n = _int_field(header, "n", source)
    if n < 1:
        raise ParseError("n must be positive", header["n"][1], header["n"][2], source)
    params = {k: v for k, (v, _, _) in _key_values(sections.get("params", []), None, source).items()}
    if kind == "trig":
        L = _int_field(header, "L", source)
        N = _int_field(header, "N", source)
        A = _coefficient_terms(sections.get("coefficients", []), n, source)
        if (A.L, A.N) != (L, N):
            raise ParseError(f"header declares L={L}, N={N} but the data has L={A.L}, N={A.N}",
                             header["L"][1], header["L"][2], source)
        return SystemDefinition(name, kind, n, A, params)
    if kind == "piecewise":
        count = _int_field(header, "segments", source)
        segs = []
        for lineno, indent, text in sections.get("segments", []):
            if ":" not in text:
                raise ParseError("expected 'fraction : entries'", lineno, indent + 1, source)
            frac_text, data = text.split(":", 1)
            frac = parse_number(frac_text.strip(), lineno, indent + 1, source)
            vals = _entries(data, n * n, lineno, indent + len(frac_text) + 2, source)
            M = la.to_float(_matrix(vals, n, n))
            segs.append((lambda w, M=M: M, frac))
        if len(segs) != count:
            raise ParseError(f"header declares {count} segments, found {len(segs)}",
                             header["segments"][1], header["segments"][2], source)
        if sum(Fraction(f) for _, f in segs) != 1:
            raise ParseError("segment fractions must sum to 1", 0, 0, source)
        return SystemDefinition(name, kind, n, cat.PiecewiseSystem(tuple(segs)), params)
    try:
        entry = cat.get(name)
    except cat.UnknownEntry:
        raise ParseError(f"unknown catalog reference {name!r}", header["name"][1], header["name"][2],
                         source) from None
    return SystemDefinition(name, kind, n, entry, params)


def parse_solution(text: str, A: TrigMatrix | None = None, source: str = "<input>") -> floquet.FloquetSolution:
    sections, order = _sections(text, source)
    kind = _kind_of(sections, source)
    if kind != "solution":
        raise ParseError("expected kind = solution", 1, 1, source)
    _check_sections(order, kind, source, sections)
    header = _key_values(sections["header"], HEADER_KEYS[kind], source)
    n = _int_field(header, "n", source)
    p = _int_field(header, "p", source)
    P = _coefficient_terms(sections.get("P", []), n, source)
    slices = {}
    for lineno, indent, text in sections.get("R", []):
        if ":" not in text:
            raise ParseError("expected 'power : entries'", lineno, indent + 1, source)
        key, data = text.split(":", 1)
        try:
            r = int(key)
        except ValueError:
            raise ParseError("power must be an integer", lineno, indent + 1, source) from None
        slices[r] = _matrix(_entries(data, n * n, lineno, indent + len(key) + 2, source), n, n)
    if not slices:
        raise ParseError("missing [R] lines", 0, 0, source)
    exact = all(la.is_exact_array(s) for s in slices.values())
    R = OmegaPolyMatrix([slices.get(r, la.zeros((n, n), exact)) if exact else la.to_float(slices.get(r, np.zeros((n, n))))
                         for r in range(max(slices) + 1)])
    shift = None
    flag = header.get("trace_shift", ("none", 0, 0))[0]
    if flag == "periodic":
        if A is None:
            raise ParseError("trace_shift = periodic needs the system", 0, 0, source)
        shift = floquet.shift_trace(A)[1]
    elif flag != "none":
        raise ParseError("trace_shift must be none or periodic", header["trace_shift"][1],
                         header["trace_shift"][2], source)
    try:
        detP = floquet._det_poly(P)
    except Exception:
        detP = None
    return floquet.FloquetSolution(P, R, p, detP, {"route": "file"}, 0.0, shift)


# --------------------------------------------------------------------------
# deterministic JSON / CSV
# --------------------------------------------------------------------------


def to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, Fraction):
        return json.dumps(format_number(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return f'{{"re": {to_json(float(obj.real))}, "im": {to_json(float(obj.imag))}}}'
    return json.dumps(str(obj))


def _matrix_json(M):
    M = np.asarray(M, dtype=object)
    return [[v if isinstance(v, Fraction) else float(v) for v in row] for row in M]


def _csv(rows) -> str:
    buf = io.StringIO()
    for row in rows:
        buf.write(",".join(format_number(v) if not isinstance(v, str) else v for v in row) + "\n")
    return buf.getvalue()


def omega_poly_text(R: OmegaPolyMatrix) -> str:
    parts = []
    for r, s in enumerate(R.slices):
        if la.all_zero(s, 0.0):
            continue
        body = "[" + ", ".join("[" + ", ".join(format_number(v) for v in row) + "]" for row in s) + "]"
        parts.append(body if r == 0 else (f"omega*{body}" if r == 1 else f"omega^{r}*{body}"))
    return " + ".join(parts) if parts else "0"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _load(args) -> SystemDefinition:
    if getattr(args, "system", None):
        try:
            entry = cat.get(args.system)
        except cat.UnknownEntry:
            raise ParseError(f"unknown catalog id {args.system!r}", 0, 0, "--system") from None
        inner = entry.A if isinstance(entry.A, (TrigMatrix, cat.PiecewiseSystem)) else entry
        kind = "trig" if isinstance(inner, TrigMatrix) else ("piecewise" if isinstance(inner, cat.PiecewiseSystem)
                                                              else "reference")
        n = np.asarray(entry.A_eval(1.0, 1.0)).shape[0]
        return SystemDefinition(entry.id, kind, n, inner, dict(entry.params))
    if not args.input:
        raise ParseError("no input file and no --system", 0, 0, "<args>")
    source = args.input
    text = sys.stdin.read() if source == "-" else _read(source)
    return parse_system(text, source)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(str(exc), 0, 0, path) from None


def _trig(defn: SystemDefinition) -> TrigMatrix:
    if not isinstance(defn.system, TrigMatrix):
        raise ParseError(f"{defn.name or 'system'} is not a finite-harmonic system", 0, 0, "<input>")
    return defn.system


def _solution_report(defn, A, sol, omegas) -> dict:
    report = {
        "name": defn.name,
        "p": sol.p,
        "route": sol.transforms.get("route"),
        "residual_norm": float(sol.residual_norm),
        "det_P": [c for c in sol.detP.coeffs] if sol.detP is not None else None,
        "trace_shift": sol.shift is not None,
        "R_text": omega_poly_text(sol.R),
        "R": {str(r): _matrix_json(s) for r, s in enumerate(sol.R.slices)},
        "P": [{"power": r, "harmonic": l, "parity": PARITY_NAMES[p], "matrix": _matrix_json(c)}
              for r, l, p, c in sol.P.terms()],
        "transforms": {k: (v if isinstance(v, (bool, int, str)) else str(v))
                       for k, v in sol.transforms.items() if k not in ("U", "J")},
    }
    if "U" in sol.transforms:
        report["transforms"]["U"] = _matrix_json(sol.transforms["U"])
        report["transforms"]["J"] = _matrix_json(sol.transforms["J"])
    report["evaluations"] = [{"omega": float(w), "R": sol.R_eval(w).tolist(),
                              "eigenvalues": [complex(v) for v in np.linalg.eigvals(sol.R_eval(w))]}
                             for w in omegas]
    return report


def _omega_list(text) -> list[float]:
    if not text:
        return []
    return [float(Fraction(x)) if "/" in x else float(x) for x in text.split(",")]


def cmd_solve(args) -> int:
    defn = _load(args)
    A = _trig(defn)
    if args.float:
        A = A.to_float()
    try:
        sol = floquet.solve(A, p_hint=args.p_hint, p_max=args.p_max)
    except floquet.NoSolutionWithinPMax as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    if args.similarity:
        sol = floquet.similarity_R(sol, _exact_matrix_arg(args.similarity))
    if args.solution_out:
        with open(args.solution_out, "w", encoding="utf-8") as fh:
            fh.write(emit_solution(defn.name, sol))
    if args.emit_solution:
        sys.stdout.write(emit_solution(defn.name, sol))
        return EXIT_OK
    report = _solution_report(defn, A, sol, _omega_list(args.omega))
    if args.csv:
        rows = [("kind", "power", "harmonic", "parity", "i", "j", "value")]
        for r, s in enumerate(sol.R.slices):
            for i in range(sol.R.n):
                for j in range(sol.R.n):
                    rows.append(("R", r, 0, "-", i, j, s[i, j]))
        for r, l, p, c in sol.P.terms():
            for i in range(sol.P.n):
                for j in range(sol.P.n):
                    rows.append(("P", r, l, PARITY_NAMES[p], i, j, c[i, j]))
        sys.stdout.write(_csv(rows))
    else:
        sys.stdout.write(to_json(report) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    defn = _load(args)
    A = _trig(defn)
    sol = parse_solution(_read(args.solution), A, args.solution)
    omega = args.omega_value
    tol = floquet.default_tolerance()
    res = floquet.residual_norm_full(A, sol)
    checks = {"residual": {"pass": res <= tol, "value": res}}
    lemmas = floquet.lemma_checks(A, sol, omega=omega)
    for key in ("trace_identity", "det_constancy_equivalence", "period_shift_invariance"):
        checks[key] = lemmas[key]
    T = 2 * math.pi / omega
    phi_ref = monodromy.integrate_transition(A, omega, 0.0, T, args.steps).value
    phi_rec = monodromy.reconstruct_phi(sol, omega, T, 0.0)
    err = float(np.max(np.abs(phi_rec - phi_ref)))
    scale = max(1.0, float(np.max(np.abs(phi_ref))))
    checks["phi_cross_check"] = {"pass": err <= 1e-6 * scale, "max_error": err, "scale": scale}
    failed = [k for k, v in checks.items() if not v["pass"]]
    report = {"name": defn.name, "omega": omega, "checks": checks, "failed": failed, "all_pass": not failed}
    sys.stdout.write(to_json(report) + "\n")
    if failed:
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(args) -> int:
    defn = _load(args)
    A = _trig(defn) if args.R is None else None
    if args.R is not None:
        R = parse_solution(_read(args.R), None if defn.kind != "trig" else defn.system, args.R).R
    else:
        try:
            R = floquet.solve(A).R
        except floquet.NoSolutionWithinPMax as exc:
            print(f"no solution: {exc}", file=sys.stderr)
            return EXIT_NO_SOLUTION
    if args.omegas:
        grid = _omega_list(args.omegas)
    elif args.steps <= 1:
        grid = [args.omega_min]
    else:
        grid = list(np.linspace(args.omega_min, args.omega_max, args.steps))
    rows = stability.sweep(R, grid)
    n = R.n
    header = ["omega"] + [f"re_lambda_{i + 1}" for i in range(n)] + [f"im_lambda_{i + 1}" for i in range(n)] + ["class"]
    if n == 2:
        header.insert(-1, "discriminant")
    out = [tuple(header)]
    for row in rows:
        vals = sorted(row.eigenvalues, key=lambda z: (-z.real, -z.imag))
        line = [row.omega] + [float(v.real) for v in vals] + [float(v.imag) for v in vals]
        if n == 2:
            line.append(row.discriminant)
        line.append(row.cls.value)
        out.append(tuple(line))
    text = _csv(out)
    if args.critical:
        text += "\n" + _csv([("critical_omega", "event")] + [(w, e) for w, e in
                                                              stability.critical_frequencies(R, grid)])
    sys.stdout.write(text)
    return EXIT_OK


def cmd_monodromy(args) -> int:
    defn = _load(args)
    system = defn.system
    omega = args.omega_value
    M = monodromy.monodromy_matrix(system, omega, args.steps)
    spec = monodromy.characteristic_spectrum(M, system, omega)
    report = {
        "name": defn.name,
        "omega": omega,
        "method": M.method,
        "monodromy": M.value.tolist(),
        "power_law_defect": M.checks.get("power_law"),
        "multipliers": [complex(v) for v in spec.multipliers],
        "exponents": [complex(v) for v in spec.exponents],
        "exponent_note": spec.note,
        "multiplier_product": spec.product,
        "expected_product": spec.expected_product,
        "product_check": spec.product_check,
    }
    if args.factorize:
        fac = monodromy.log_factorize(system, omega, args.steps, monodromy=M.value)
        report["factorization"] = {
            "R": fac.R.tolist(),
            "period_multiplier": fac.period_multiplier,
            "Y": fac.Y.tolist(),
            "branch_ambiguous": fac.branch_ambiguous,
            "checks": fac.checks,
        }
    sys.stdout.write(to_json(report) + "\n")
    return EXIT_OK


def _exact_matrix_arg(text: str):
    if os.path.exists(text):
        text = _read(text)
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    vals = [[parse_number(tok) for tok in row.replace(",", " ").split()] for row in rows]
    if len({len(r) for r in vals}) != 1:
        raise ParseError("ragged matrix", 0, 0, "<matrix>")
    flat = [v for row in vals for v in row]
    return _matrix(flat, len(vals), len(vals[0]))


def _matrix_arg(text: str):
    return la.to_float(_exact_matrix_arg(text))


def cmd_htf(args) -> int:
    defn = _load(args)
    A = _trig(defn)
    n = A.n
    B = _matrix_arg(args.B) if args.B else np.eye(n)[:, :1]
    C = _matrix_arg(args.C) if args.C else np.eye(n)[:1, :]
    D = _matrix_arg(args.D) if args.D else np.zeros((C.shape[0], B.shape[1]))
    omega = args.omega_value
    hss = harmonic.build_hss(A, B, C, D, omega, args.trunc)
    if args.s_grid:
        grid = [complex(s.replace("i", "j")) for s in args.s_grid.split(",")]
    else:
        grid = [1j * omega * k / 20 for k in range(11)]
    rows = [("s_re", "s_im", "k", "l", "i", "j", "abs", "re", "im")]
    K = args.harmonics
    for s in grid:
        G = harmonic.htf(hss, s)
        for k in range(-K, K + 1):
            for l in range(-K, K + 1):
                blk = harmonic.central_block(hss, G, k, l)
                for i in range(blk.shape[0]):
                    for j in range(blk.shape[1]):
                        z = complex(blk[i, j])
                        rows.append((s.real, s.imag, k, l, i, j, abs(z), z.real, z.imag))
    sys.stdout.write(_csv(rows))
    return EXIT_OK


def cmd_catalog(args) -> int:
    if args.action == "list":
        rows = [("id", "case", "kind", "known_pair", "description")]
        for e in cat.list_entries():
            rows.append((e["id"], "" if e["case"] is None else str(e["case"]), e["kind"],
                         "yes" if e["known_pair"] else "no", e["description"].replace(",", ";")))
        sys.stdout.write(_csv(rows))
        return EXIT_OK
    if not args.id:
        raise ParseError("catalog emit needs an id", 0, 0, "<args>")
    try:
        entry = cat.get(args.id)
    except cat.UnknownEntry:
        raise ParseError(f"unknown catalog id {args.id!r}", 0, 0, "<args>") from None
    sys.stdout.write(emit_system(entry.id, entry, dict(entry.params)))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _input_args(p):
    p.add_argument("input", nargs="?", help="system file ('-' for stdin)")
    p.add_argument("--system", help="catalog id instead of a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lptv", description="Floquet analysis of periodic linear systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Floquet factorization of a finite-harmonic system")
    _input_args(p)
    p.add_argument("--p-hint", type=int)
    p.add_argument("--p-max", type=int)
    p.add_argument("--omega", help="comma-separated frequencies at which to evaluate R")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--rational", action="store_true", help="exact arithmetic (default)")
    mode.add_argument("--float", action="store_true", help="floating-point arithmetic")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--csv", action="store_true")
    fmt.add_argument("--emit-solution", action="store_true", help="print a solution file")
    p.add_argument("--solution-out", help="also write a solution file here")
    p.add_argument("--similarity", help="constant V; report (P V, V^-1 R V), rows separated by ';'")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution file against its system")
    _input_args(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--omega", dest="omega_value", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=monodromy.DEFAULT_STEPS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="stability of R(omega) over a frequency grid (CSV)")
    _input_args(p)
    p.add_argument("--R", help="solution file supplying R (skips solving)")
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--omegas", help="explicit comma-separated grid")
    p.add_argument("--critical", action="store_true", help="append critical frequencies")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("monodromy", help="monodromy matrix, multipliers, real log factorization")
    _input_args(p)
    p.add_argument("--omega", dest="omega_value", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=monodromy.DEFAULT_STEPS)
    p.add_argument("--factorize", action="store_true")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("htf", help="harmonic transfer function entries (CSV)")
    _input_args(p)
    p.add_argument("--B", help="input matrix, rows separated by ';' (or a file)")
    p.add_argument("--C", help="output matrix")
    p.add_argument("--D", help="feedthrough matrix")
    p.add_argument("--omega", dest="omega_value", type=float, default=1.0)
    p.add_argument("--trunc", type=int, default=harmonic.DEFAULT_TRUNC)
    p.add_argument("--s-grid", help="comma-separated complex values, e.g. 0.1+0.2j")
    p.add_argument("--harmonics", type=int, default=0, help="emit blocks |k|, |l| <= this")
    p.set_defaults(func=cmd_htf)

    p = sub.add_parser("catalog", help="list or emit catalog systems")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("id", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return parser


NUMERIC_ERRORS = (monodromy.SingularMonodromy, monodromy.RealLogNonexistent, monodromy.SingularP,
                  floquet.SingularP, floquet.CanonicalFormUnreliable, harmonic.ResolventSingular,
                  harmonic.DegeneratePencil, np.linalg.LinAlgError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except harmonic.DimensionMismatch as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
