"""Propositional formulas, Tseitin clausification and a small DPLL solver.

Propositional formulas are nested tuples::

    ("var", key) | ("const", bool) | ("not", f) | ("and", (f, ...)) | ("or", (f, ...))

Use the ``p_*`` constructors; they fold constants so trivial structure never
reaches the solver.
"""

from __future__ import annotations

TRUE = ("const", True)
FALSE = ("const", False)


def p_var(key):
    return ("var", key)


def p_not(f):
    if f[0] == "const":
        return FALSE if f[1] else TRUE
    if f[0] == "not":
        return f[1]
    return ("not", f)


def p_and(*items):
    out = []
    for f in items:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        if f[0] == "and":
            out.extend(f[1])
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def p_or(*items):
    out = []
    for f in items:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        if f[0] == "or":
            out.extend(f[1])
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def p_implies(a, b):
    return p_or(p_not(a), b)


def p_iff(a, b):
    return p_and(p_or(p_not(a), b), p_or(p_not(b), a))


def p_eval(f, assignment) -> bool:
    tag = f[0]
    if tag == "var":
        return assignment[f[1]]
    if tag == "const":
        return f[1]
    if tag == "not":
        return not p_eval(f[1], assignment)
    if tag == "and":
        return all(p_eval(g, assignment) for g in f[1])
    return any(p_eval(g, assignment) for g in f[1])


class CNF:
    """Clause database with named input variables and anonymous Tseitin gates."""

    def __init__(self):
        self.clauses = []
        self.index = {}   # input key -> var id
        self.keys = []    # var id - 1 -> key (None for gates)
        self._gates = {}

    @property
    def num_vars(self):
        return len(self.keys)

    def var(self, key) -> int:
        v = self.index.get(key)
        if v is None:
            self.keys.append(key)
            v = len(self.keys)
            self.index[key] = v
        return v

    def _fresh(self):
        self.keys.append(None)
        return len(self.keys)

    def literal(self, f) -> int:
        """Literal equivalent to *f*; constants must be folded away beforehand."""
        tag = f[0]
        if tag == "var":
            return self.var(f[1])
        if tag == "not":
            return -self.literal(f[1])
        if tag == "const":
            raise ValueError("constants must be handled by add_formula")
        g = self._gates.get(f)
        if g is not None:
            return g
        lits = [self.literal(x) for x in f[1]]
        g = self._fresh()
        if tag == "and":
            for lit in lits:
                self.clauses.append([-g, lit])
            self.clauses.append([g] + [-lit for lit in lits])
        else:
            for lit in lits:
                self.clauses.append([g, -lit])
            self.clauses.append([-g] + lits)
        self._gates[f] = g
        return g

    def add_formula(self, f):
        if f == TRUE:
            return
        if f == FALSE:
            self.clauses.append([])
            return
        # top-level conjunctions and disjunctions of literals become clauses directly
        if f[0] == "and":
            for g in f[1]:
                self.add_formula(g)
            return
        if f[0] == "or":
            self.clauses.append([self.literal(g) for g in f[1]])
            return
        self.clauses.append([self.literal(f)])

    def add_clause(self, lits):
        self.clauses.append(list(lits))

    def input_keys(self):
        return [k for k in self.keys if k is not None]


def solve(cnf: CNF, order=None):
    """DPLL with unit propagation and chronological backtracking.

    Branches on input variables in *order* (default: sorted by ``str`` of the
    key), trying ``False`` first.  Returns a dict key -> bool for the input
    variables, or ``None`` if the clauses are unsatisfiable.
    """
    n = cnf.num_vars
    clauses = []
    for c in cnf.clauses:
        c = list(dict.fromkeys(c))
        if any(-lit in c for lit in c):
            continue
        if not c:
            return None
        clauses.append(c)

    if order is None:
        order = sorted(cnf.input_keys(), key=str)
    branch_vars = [cnf.index[k] for k in order if k in cnf.index]
    seen = set(branch_vars)
    branch_vars += [v for v in range(1, n + 1) if v not in seen]

    value = [0] * (n + 1)  # 0 unassigned, 1 true, -1 false
    watches = {}
    units = []
    for ci, c in enumerate(clauses):
        if len(c) == 1:
            units.append(c[0])
        else:
            watches.setdefault(c[0], []).append(ci)
            watches.setdefault(c[1], []).append(ci)

    trail = []

    def val(lit):
        v = value[abs(lit)]
        return v if lit > 0 else -v

    def assign(lit):
        value[abs(lit)] = 1 if lit > 0 else -1
        trail.append(lit)

    def propagate(start):
        qi = start
        while qi < len(trail):
            false_lit = -trail[qi]
            qi += 1
            wl = watches.get(false_lit)
            if not wl:
                continue
            keep = []
            i = 0
            while i < len(wl):
                ci = wl[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if val(c[0]) == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if val(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if val(c[0]) == -1:
                        keep.extend(wl[i:])
                        watches[false_lit] = keep
                        return False
                    if val(c[0]) == 0:
                        assign(c[0])
            watches[false_lit] = keep
        return True

    for lit in units:
        if val(lit) == -1:
            return None
        if val(lit) == 0:
            assign(lit)
    if not propagate(0):
        return None

    # stack of (trail length before decision, var, tried_both)
    stack = []
    pos = 0
    while True:
        while pos < len(branch_vars) and value[branch_vars[pos]] != 0:
            pos += 1
        if pos == len(branch_vars):
            return {k: value[v] == 1 for k, v in cnf.index.items()}
        v = branch_vars[pos]
        stack.append((len(trail), pos, False))
        assign(-v)
        ok = propagate(len(trail) - 1)
        while not ok:
            # backtrack to the most recent decision with an untried branch
            while stack and stack[-1][2]:
                mark, _, _ = stack.pop()
                _undo(trail, value, mark)
            if not stack:
                return None
            mark, p, _ = stack.pop()
            _undo(trail, value, mark)
            stack.append((mark, p, True))
            pos = p
            assign(branch_vars[p])
            ok = propagate(len(trail) - 1)


def _undo(trail, value, mark):
    while len(trail) > mark:
        value[abs(trail.pop())] = 0
