"""Nonlocal-game tables: representation, text format, built-ins and party swap.

A game is stored as a single coefficient array ``coeff[x, a, y, b]`` (the
product of the winning-set indicator and the pay-off) together with one
setting distribution per party.  The joint setting distribution is always
the product of the two marginals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import GameFormatError, RangeError, ShapeError, ValidationError

PROB_TOL = 1e-12


@dataclass(frozen=True)
class GameMetadata:
    name: str = "unnamed"
    description: str = ""
    source: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValidationError("game name must be non-empty")


@dataclass(frozen=True, eq=False)
class GameTable:
    """Coefficient table ``coeff[x, a, y, b]`` plus per-party setting marginals.

    Instances are immutable: the arrays are copied and flagged read-only on
    construction, so a table can be shared freely between workers.
    """

    coeff: np.ndarray
    marginal_a: np.ndarray = None
    marginal_b: np.ndarray = None
    meta: GameMetadata = field(default_factory=GameMetadata)

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=float)
        if coeff.ndim != 4:
            raise ShapeError(f"coeff must be 4-dimensional [x,a,y,b], got shape {coeff.shape}")
        if min(coeff.shape) < 1:
            raise ShapeError(f"every dimension must be >= 1, got shape {coeff.shape}")
        if not np.all(np.isfinite(coeff)):
            raise ValidationError("coeff contains NaN or infinite entries")
        n_a, _, n_b, _ = coeff.shape
        ma = _check_distribution(self.marginal_a, n_a, "marginal A")
        mb = _check_distribution(self.marginal_b, n_b, "marginal B")
        for arr in (coeff, ma, mb):
            arr.setflags(write=False)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "marginal_a", ma)
        object.__setattr__(self, "marginal_b", mb)

    @property
    def n_settings_a(self) -> int:
        return self.coeff.shape[0]

    @property
    def n_outcomes_a(self) -> int:
        return self.coeff.shape[1]

    @property
    def n_settings_b(self) -> int:
        return self.coeff.shape[2]

    @property
    def n_outcomes_b(self) -> int:
        return self.coeff.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.coeff.shape

    @property
    def name(self) -> str:
        return self.meta.name

    def setting_weights(self) -> np.ndarray:
        """Joint referee distribution ``p(x) p(y)`` as an ``(N_A, N_B)`` array."""
        return np.outer(self.marginal_a, self.marginal_b)

    def has_uniform_marginals(self) -> bool:
        return bool(
            np.allclose(self.marginal_a, 1.0 / self.n_settings_a, rtol=0, atol=PROB_TOL)
            and np.allclose(self.marginal_b, 1.0 / self.n_settings_b, rtol=0, atol=PROB_TOL)
        )

    def scaled(self, factor: float) -> "GameTable":
        return GameTable(self.coeff * factor, self.marginal_a, self.marginal_b, self.meta)

    def equals(self, other: "GameTable") -> bool:
        """Exact entry-wise equality of shape, coefficients and marginals."""
        return (
            self.shape == other.shape
            and np.array_equal(self.coeff, other.coeff)
            and np.array_equal(self.marginal_a, other.marginal_a)
            and np.array_equal(self.marginal_b, other.marginal_b)
        )


def _check_distribution(p, n: int, what: str) -> np.ndarray:
    if p is None:
        return np.full(n, 1.0 / n)
    p = np.array(p, dtype=float).reshape(-1)
    if p.shape != (n,):
        raise ShapeError(f"{what} has {p.size} entries, expected {n}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError(f"{what} must be finite and nonnegative")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{what} sums to {p.sum()!r}, expected 1")
    return p


# --------------------------------------------------------------------------
# text format


def parse_game(text: str, source: str = "") -> GameTable:
    """Parse the line-oriented game format.

    ``settings`` and ``outcomes`` must be the first two non-comment lines;
    ``marginal`` and ``coeff`` lines may follow in any order.
    """
    dims: dict[str, tuple[int, int]] = {}
    marginals: dict[str, list[float]] = {}
    entries: dict[tuple[int, int, int, int], float] = {}
    name = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            # "# name: foo" is kept as metadata, everything else ignored
            body = line.lstrip("#").strip()
            if body.lower().startswith("name:") and name is None:
                name = body.split(":", 1)[1].strip() or None
            continue
        tok = line.split()
        kw = tok[0]
        if kw in ("settings", "outcomes"):
            if kw in dims:
                raise GameFormatError(f"duplicate '{kw}' line", lineno)
            if kw == "outcomes" and "settings" not in dims:
                raise GameFormatError("'settings' must precede 'outcomes'", lineno)
            dims[kw] = _parse_pair(tok, lineno)
            continue
        if len(dims) < 2:
            raise GameFormatError("file must start with 'settings' and 'outcomes' lines", lineno)
        n_a, n_b = dims["settings"]
        m_a, m_b = dims["outcomes"]
        if kw == "marginal":
            if len(tok) < 2 or tok[1] not in ("A", "B"):
                raise GameFormatError("expected 'marginal A|B p0 p1 ...'", lineno)
            party = tok[1]
            if party in marginals:
                raise GameFormatError(f"duplicate marginal for party {party}", lineno)
            n = n_a if party == "A" else n_b
            vals = [_parse_float(t, lineno) for t in tok[2:]]
            if len(vals) != n:
                raise RangeError(f"marginal {party} needs {n} values, got {len(vals)}", lineno)
            marginals[party] = vals
        elif kw == "coeff":
            if len(tok) != 6:
                raise GameFormatError("expected 'coeff x a y b value'", lineno)
            idx = tuple(_parse_int(t, lineno) for t in tok[1:5])
            for i, lim, label in zip(idx, (n_a, m_a, n_b, m_b), "xayb"):
                if not 0 <= i < lim:
                    raise RangeError(f"index {label}={i} outside 0..{lim - 1}", lineno)
            if idx in entries:
                raise GameFormatError(f"duplicate coefficient {idx}", lineno)
            entries[idx] = _parse_float(tok[5], lineno)
        else:
            raise GameFormatError(f"unknown keyword '{kw}'", lineno)

    if len(dims) < 2:
        raise GameFormatError("missing 'settings'/'outcomes' header")
    n_a, n_b = dims["settings"]
    m_a, m_b = dims["outcomes"]
    coeff = np.zeros((n_a, m_a, n_b, m_b))
    for idx, v in entries.items():
        coeff[idx] = v
    meta = GameMetadata(name=name or "unnamed", source=source)
    try:
        return GameTable(coeff, marginals.get("A"), marginals.get("B"), meta)
    except ValidationError as exc:
        raise ValidationError(f"invalid game: {exc}") from exc


def _parse_pair(tok: list[str], lineno: int) -> tuple[int, int]:
    if len(tok) != 3 or not tok[1].startswith("A=") or not tok[2].startswith("B="):
        raise GameFormatError(f"expected '{tok[0]} A=<n> B=<n>'", lineno)
    a = _parse_int(tok[1][2:], lineno)
    b = _parse_int(tok[2][2:], lineno)
    if a < 1 or b < 1:
        raise RangeError(f"{tok[0]} counts must be >= 1", lineno)
    return a, b


def _parse_int(s: str, lineno: int) -> int:
    try:
        return int(s)
    except ValueError:
        raise GameFormatError(f"expected an integer, got {s!r}", lineno) from None


def _parse_float(s: str, lineno: int) -> float:
    try:
        v = float(s)
    except ValueError:
        raise GameFormatError(f"expected a number, got {s!r}", lineno) from None
    if not np.isfinite(v):
        raise GameFormatError(f"non-finite value {s!r}", lineno)
    return v


def serialize_game(g: GameTable, include_zeros: bool = False) -> str:
    """Write ``g`` in the game format, coefficients in lexicographic (x,a,y,b) order."""
    out = io.StringIO()
    if g.meta.name and g.meta.name != "unnamed":
        out.write(f"# name: {g.meta.name}\n")
    if g.meta.description:
        for line in g.meta.description.splitlines():
            out.write(f"# {line}\n")
    out.write(f"settings A={g.n_settings_a} B={g.n_settings_b}\n")
    out.write(f"outcomes A={g.n_outcomes_a} B={g.n_outcomes_b}\n")
    if not g.has_uniform_marginals():
        out.write("marginal A " + " ".join(repr(float(p)) for p in g.marginal_a) + "\n")
        out.write("marginal B " + " ".join(repr(float(p)) for p in g.marginal_b) + "\n")
    for idx in np.ndindex(g.shape):
        v = g.coeff[idx]
        if v != 0 or include_zeros:
            out.write("coeff {} {} {} {} {}\n".format(*idx, _fmt_coeff(v)))
    return out.getvalue()


def _fmt_coeff(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def load_game(path: str) -> GameTable:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read(), source=str(path))


# --------------------------------------------------------------------------
# built-ins
#
# Tables are written exactly as printed: one row per (y, b), one column per
# (x, a), both in lexicographic order.

_CHSH_ROWS = [
    [1, -1, 1, -1],
    [-1, 1, -1, 1],
    [1, -1, -1, 1],
    [-1, 1, 1, -1],
]

_I3322_ROWS = [
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 1, 0, 1, 0],
    [2, 2, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 1, 0, 0, 1],
    [1, 1, 0, 0, 0, 0, 1, 1],
    [0, 0, 1, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 0],
]

_BUILTINS = {
    "chsh": (_CHSH_ROWS, 2, 2, "CHSH game, +/-1 pay-off table (transpose invariant)"),
    "i3322": (
        _I3322_ROWS,
        4,
        2,
        "I3322 in a nonnegative representation with an extra marginal setting x=0, y=0",
    ),
}


def table_from_rows(rows: Iterable[Iterable[float]], n_settings: tuple[int, int],
                    n_outcomes: tuple[int, int]) -> np.ndarray:
    """Convert a printed (y,b)-rows by (x,a)-columns table to ``coeff[x, a, y, b]``."""
    n_a, n_b = n_settings
    m_a, m_b = n_outcomes
    t = np.asarray(list(rows), dtype=float)
    if t.shape != (n_b * m_b, n_a * m_a):
        raise ShapeError(f"table shape {t.shape} does not match settings/outcomes")
    return t.reshape(n_b, m_b, n_a, m_a).transpose(2, 3, 0, 1).copy()


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_game(name: str) -> GameTable:
    key = name.lower()
    if key not in _BUILTINS:
        raise KeyError(f"unknown built-in game {name!r}; available: {', '.join(builtin_names())}")
    rows, n, m, desc = _BUILTINS[key]
    coeff = table_from_rows(rows, (n, n), (m, m))
    return GameTable(coeff, meta=GameMetadata(name=key, description=desc, source="built-in"))


# --------------------------------------------------------------------------
# table utilities


def transpose_game(g: GameTable) -> GameTable:
    """Swap the roles of Alice and Bob."""
    name = g.meta.name[:-2] if g.meta.name.endswith("^T") else g.meta.name + "^T"
    meta = GameMetadata(name=name, description=g.meta.description, source=g.meta.source)
    return GameTable(g.coeff.transpose(2, 3, 0, 1), g.marginal_b, g.marginal_a, meta)


def algebraic_max(g: GameTable) -> float:
    """Value when every setting pair is won with its best outcome pair."""
    block_max = g.coeff.max(axis=(1, 3))
    return float(np.sum(g.setting_weights() * block_max))
