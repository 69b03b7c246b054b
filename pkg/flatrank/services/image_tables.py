"""
Pointwise image tables of the restricted difference flattening (S_q^1)_{A'}.

Each table entry names an input e_x (x) beta_J and the image the published
tables state for it. verify_table compares every entry against the computed
column after wedge canonicalization, then checks that the listed images are
independent and span the column space.
"""

import logging
from itertools import permutations

from flatrank.core.matrix import SparseMatrix, hstack
from flatrank.errors import ArgumentError
from flatrank.schemas import ImageTableEntry, ImageTerm, TableVerdict
from flatrank.services.koszul_service import restricted_flattening
from flatrank.services.rank_service import rank_mod_p
from flatrank.utils.wedge import canonicalize

logger = logging.getLogger(__name__)

SQUARE_MIN_Q = 3
CUBE_MIN_Q = 5


def _term(a: int, b: int, c_index: tuple[int, ...], coef: int = 1) -> ImageTerm:
    return ImageTerm(wedge=(a, b), c_index=c_index, coef=coef)


def _entry(family: str, block: str, x: int, b_index: tuple[int, ...], *terms: ImageTerm) -> ImageTableEntry:
    return ImageTableEntry(family=family, block=block, x=x, b_index=b_index, expected=list(terms))


# ==================== m = 2 ====================


def square_table(q: int) -> list[ImageTableEntry]:
    """Items (1)-(20): blocks of (q+1), q, (q+1), q and 4 inputs, 4q+6 in total."""
    if q < SQUARE_MIN_Q:
        raise ArgumentError(f"the m=2 table needs q >= {SQUARE_MIN_Q}, got {q}")
    e1_qi = [
        *(_entry("(1)", "e1.qi", 1, (q, i), _term(0, 1, (q, i))) for i in range(3, q + 1)),
        _entry("(2)", "e1.qi", 1, (q, 2), _term(0, 1, (q, 2)), _term(2, 1, (q, 0))),
        _entry("(3)", "e1.qi", 1, (q, 1), _term(0, 1, (q, 1))),
        _entry("(4)", "e1.qi", 1, (q, 0), _term(2, 1, (q, 2))),
    ]
    e1_iq = [
        *(_entry("(5)", "e1.iq", 1, (i, q), _term(0, 1, (i, q))) for i in range(3, q)),
        _entry("(6)", "e1.iq", 1, (2, q), _term(0, 1, (2, q)), _term(2, 1, (0, q))),
        _entry("(7)", "e1.iq", 1, (1, q), _term(0, 1, (1, q))),
        _entry("(8)", "e1.iq", 1, (0, q), _term(2, 1, (2, q))),
    ]
    e2_qi = [
        *(_entry("(9)", "e2.qi", 2, (q, i), _term(0, 2, (q, i))) for i in range(3, q + 1)),
        _entry("(10)", "e2.qi", 2, (q, 2), _term(0, 2, (q, 2))),
        _entry("(11)", "e2.qi", 2, (q, 1), _term(0, 2, (q, 1)), _term(1, 2, (q, 0))),
        _entry("(12)", "e2.qi", 2, (q, 0), _term(1, 2, (q, 1))),
    ]
    e2_iq = [
        *(_entry("(13)", "e2.iq", 2, (i, q), _term(0, 2, (i, q))) for i in range(3, q)),
        _entry("(14)", "e2.iq", 2, (2, q), _term(0, 2, (2, q))),
        _entry("(15)", "e2.iq", 2, (1, q), _term(0, 2, (1, q)), _term(1, 2, (0, q))),
        _entry("(16)", "e2.iq", 2, (0, q), _term(1, 2, (1, q))),
    ]
    e0 = [
        _entry("(17)", "e0", 0, (q, 2), _term(2, 0, (q, 0))),
        _entry("(18)", "e0", 0, (2, q), _term(2, 0, (0, q))),
        _entry("(19)", "e0", 0, (q, 1), _term(1, 0, (q, 0))),
        _entry("(20)", "e0", 0, (1, q), _term(1, 0, (0, q))),
    ]
    return [*e1_qi, *e1_iq, *e2_qi, *e2_iq, *e0]


def square_block_counts(q: int) -> dict[str, int]:
    return {"e1.qi": q + 1, "e1.iq": q, "e2.qi": q + 1, "e2.iq": q, "e0": 4}


# ==================== m = 3 ====================


def cube_table(q: int) -> list[ImageTableEntry]:
    """
    Families A1-A3 (x=1), B1-B3 (x=2) and C_t^(l) (x=0).

    A_l puts q in slot l; the slots before l range over [0, q-1] and the slots
    after it over [0, q]. With i the first free slot value, A gives
    e0^e1 c_J + [i=2] e2^e1 c_J[i->0] and B gives e0^e2 c_J + [i=1] e1^e2 c_J[i->0].
    C_t^(l) runs over every ordering (l, m, n) of the slots and t in {1, 2}:
    j_l = q, j_m = t, j_n = r in [0, q], image e_t^e0 c_J[m->0].

    The 12(q+1) count needs all six orderings, not only the cyclic ones, so
    families overlap: (q, 1, 2) is listed under both C1[123] and C2[132].
    """
    if q < CUBE_MIN_Q:
        raise ArgumentError(f"the m=3 table needs q >= {CUBE_MIN_Q}, got {q}")
    entries: list[ImageTableEntry] = []
    for x, name, partner in ((1, "A", 2), (2, "B", 1)):
        for q_slot in range(3):
            free = tuple(slot for slot in range(3) if slot != q_slot)
            ranges = [range(q) if slot < q_slot else range(q + 1) for slot in free]
            for i in ranges[0]:
                for j in ranges[1]:
                    placed = [q, q, q]
                    placed[free[0]], placed[free[1]] = i, j
                    index = tuple(placed)
                    terms = [_term(0, x, index)]
                    if i == partner:
                        dropped = list(index)
                        dropped[free[0]] = 0
                        terms.append(_term(partner, x, tuple(dropped)))
                    entries.append(_entry(f"{name}{q_slot + 1}", name, x, index, *terms))

    for l_slot, m_slot, n_slot in permutations(range(3)):
        for t in (1, 2):
            family = f"C{t}[{l_slot + 1}{m_slot + 1}{n_slot + 1}]"
            for r in range(q + 1):
                index = [0, 0, 0]
                index[l_slot], index[m_slot], index[n_slot] = q, t, r
                image = list(index)
                image[m_slot] = 0
                entries.append(_entry(family, "C", 0, tuple(index), _term(t, 0, tuple(image))))
    return entries


def cube_block_counts(q: int) -> dict[str, int]:
    per_letter = (q + 1) ** 2 + q * (q + 1) + q**2
    return {"A": per_letter, "B": per_letter, "C": 12 * (q + 1)}


def cube_family_counts(q: int) -> dict[str, int]:
    counts = {}
    for name in ("A", "B"):
        counts.update({f"{name}1": (q + 1) ** 2, f"{name}2": q * (q + 1), f"{name}3": q**2})
    return counts


# ==================== VERIFICATION ====================


def expected_vector(entry: ImageTableEntry, matrix: SparseMatrix) -> dict[int, int]:
    """The stated image as a column of the labeled flattening matrix, wedges canonicalized."""
    column: dict[int, int] = {}
    for term in entry.expected:
        wedge, sign = canonicalize(term.wedge)
        if sign == 0:
            continue
        row = matrix.row_index((wedge, term.c_index))
        column[row] = column.get(row, 0) + sign * term.coef
    return {row: value for row, value in column.items() if value}


def actual_vector(entry: ImageTableEntry, matrix: SparseMatrix) -> dict[int, int]:
    return matrix.column(matrix.col_index(((entry.x,), entry.b_index)))


def table_for(q: int, m: int) -> tuple[list[ImageTableEntry], dict[str, int]]:
    if m == 2:
        return square_table(q), square_block_counts(q)
    if m == 3:
        return cube_table(q), cube_block_counts(q)
    raise ArgumentError(f"image tables exist for m in (2, 3), got m={m}")


def verify_table(
    entries: list[ImageTableEntry],
    expected_blocks: dict[str, int],
    difference: SparseMatrix,
    q: int,
    m: int,
    prime: int | None = None,
) -> TableVerdict:
    columns = []
    mismatched = []
    block_counts: dict[str, int] = {}
    for entry in entries:
        block_counts[entry.block] = block_counts.get(entry.block, 0) + 1
        expected = expected_vector(entry, difference)
        columns.append(expected)
        if expected != actual_vector(entry, difference):
            mismatched.append(entry.label)

    listed = SparseMatrix.from_columns(difference.n_rows, columns)
    listed_rank = rank_mod_p(listed, prime).rank
    column_space_rank = rank_mod_p(difference, prime).rank
    combined_rank = rank_mod_p(hstack(listed, difference), prime).rank

    verdict = TableVerdict(
        q=q,
        m=m,
        count=len(entries),
        expected_count=sum(expected_blocks.values()),
        block_counts=block_counts,
        expected_block_counts=expected_blocks,
        matched=len(entries) - len(mismatched),
        mismatched=mismatched,
        listed_rank=listed_rank,
        column_space_rank=column_space_rank,
        combined_rank=combined_rank,
    )
    logger.info(
        f"Image table m={m} q={q}: {verdict.matched}/{verdict.count} matched, "
        f"listed rank {listed_rank}, column space rank {column_space_rank}"
    )
    return verdict


def pointwise_image_table(
    q: int, m: int, difference: SparseMatrix | None = None, prime: int | None = None
) -> tuple[list[ImageTableEntry], TableVerdict]:
    """Regenerate the stated image list for (q, m) and check it against the S_q flattening."""
    entries, expected_blocks = table_for(q, m)
    if difference is None:
        difference = restricted_flattening(q, m, "Sq")
    return entries, verify_table(entries, expected_blocks, difference, q, m, prime)
