"""Systems of Boolean NAND equations: parsing, evaluation, brute-force solving.

Problem file format (UTF-8, line oriented):

    # anything after '#' is a comment
    free a b            # declares variables that appear in no equation
    out = NAND(in1, in2)

Identifiers match ``[A-Za-z_][A-Za-z0-9_]*`` and whitespace around tokens is
ignored. Variables are shared across equations purely by name. The brute-force
enumerator here is the ground-truth oracle the machine module is checked
against.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

Assignment = dict[str, int]

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_EQUATION_RE = re.compile(rf"^({_IDENT})\s*=\s*NAND\s*\(\s*({_IDENT})\s*,\s*({_IDENT})\s*\)$")
_FREE_RE = re.compile(rf"^free\s+({_IDENT}(?:\s+{_IDENT})*)$")

ENUMERATION_CAP = 20


class ParseError(ValueError):
    """Problem file syntax error, carrying a 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SystemTooLargeError(ValueError):
    """Raised when exhaustive enumeration would exceed the variable cap."""


def eval_nand(a: int, b: int) -> int:
    return 1 - (a & b)


@dataclass(frozen=True)
class NandEquation:
    """One equation ``c = NAND(a, b)``; ``a`` and ``b`` may be the same name."""

    a: str
    b: str
    c: str

    def variables(self) -> tuple[str, ...]:
        """Distinct variable names in a, b, c order."""
        names = []
        for name in (self.a, self.b, self.c):
            if name not in names:
                names.append(name)
        return tuple(names)

    def satisfied_by(self, asg: Assignment) -> bool:
        return asg[self.c] == eval_nand(asg[self.a], asg[self.b])

    def render(self) -> str:
        return f"{self.c} = NAND({self.a}, {self.b})"


@dataclass(frozen=True)
class BooleanSystem:
    """An ordered set of variables constrained by NAND equations.

    A system with zero equations is legal and models unconstrained (free)
    variables only; it is how the single-free-variable problem is expressed.
    """

    variables: tuple[str, ...]
    equations: tuple[NandEquation, ...]

    def __post_init__(self):
        if not self.variables:
            raise ValueError("a system needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be unique")
        known = set(self.variables)
        for eq in self.equations:
            for name in (eq.a, eq.b, eq.c):
                if name not in known:
                    raise ValueError(f"equation references unknown variable {name!r}")

    def free_variables(self) -> tuple[str, ...]:
        """Variables that appear in no equation, in system order."""
        used = {name for eq in self.equations for name in eq.variables()}
        return tuple(v for v in self.variables if v not in used)


def parse_system(text: str, allow_free_only: bool = False) -> BooleanSystem:
    """Parse problem-file contents into a BooleanSystem.

    Variables are ordered by first appearance, scanning each equation as
    (a, b, c). Exact duplicate equations are accepted and collapsed. A file
    with free variables but no equations is accepted only when
    ``allow_free_only`` is set.
    """
    variables: list[str] = []
    equations: list[NandEquation] = []
    seen_equations: set[tuple[str, str, str]] = set()

    def register(name: str) -> None:
        if name not in variables:
            variables.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        free_match = _FREE_RE.match(line)
        if free_match:
            for name in free_match.group(1).split():
                register(name)
            continue
        eq_match = _EQUATION_RE.match(line)
        if eq_match:
            out, in1, in2 = eq_match.groups()
            register(in1)
            register(in2)
            register(out)
            key = (in1, in2, out)
            if key not in seen_equations:
                seen_equations.add(key)
                equations.append(NandEquation(a=in1, b=in2, c=out))
            continue
        raise ParseError(f"cannot parse {line!r}", lineno)

    if not variables:
        raise ParseError("empty problem: no equations and no free variables", 1)
    if not equations and not allow_free_only:
        raise ParseError(
            "problem has no equations (pass allow_free_only to accept a free-variable-only system)",
            1,
        )
    return BooleanSystem(variables=tuple(variables), equations=tuple(equations))


def render_system(sys: BooleanSystem) -> str:
    """Render back to the problem-file format (free header first)."""
    lines = []
    free = sys.free_variables()
    if free:
        lines.append("free " + " ".join(free))
    lines.extend(eq.render() for eq in sys.equations)
    return "\n".join(lines) + "\n"


def validate_assignment(sys: BooleanSystem, asg: Assignment) -> bool:
    """True iff ``asg`` satisfies every equation. ``asg`` must cover all variables."""
    missing = [v for v in sys.variables if v not in asg]
    if missing:
        raise KeyError(f"assignment missing variables: {missing}")
    return all(eq.satisfied_by(asg) for eq in sys.equations)


def enumerate_solutions(sys: BooleanSystem, cap: int = ENUMERATION_CAP) -> list[Assignment]:
    """All satisfying assignments, lexicographic in system variable order.

    Exhaustive sweep over 2**n assignments; refuses systems with more than
    ``cap`` variables (this is a verification oracle, not a solver).
    """
    n = len(sys.variables)
    if n > cap:
        raise SystemTooLargeError(f"{n} variables exceeds enumeration cap {cap}")
    index = {name: i for i, name in enumerate(sys.variables)}
    compiled = [(index[eq.a], index[eq.b], index[eq.c]) for eq in sys.equations]
    solutions = []
    for bits in itertools.product((0, 1), repeat=n):
        if all(bits[c] == 1 - (bits[a] & bits[b]) for a, b, c in compiled):
            solutions.append(dict(zip(sys.variables, bits)))
    return solutions
