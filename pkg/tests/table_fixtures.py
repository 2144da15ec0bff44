"""Cell counts behind the reference percentage grids.

Each table maps (reference-parameter count, required count) to a method
count. Column totals are taken verbatim from the totals rows; cells are the
integer counts that reproduce the printed per-column percentages.
"""

from molnull.reporting import CrossTab

COLUMN_TOTALS_STATIC = {1: 1969, 2: 920, 3: 397, 4: 168, 5: 44, 6: 16, 7: 4}

DEFINITE_CELLS = {
    (1, 1): 1969,
    (2, 1): 727, (2, 2): 193,
    (3, 1): 294, (3, 2): 95, (3, 3): 8,
    (4, 1): 123, (4, 2): 40, (4, 3): 5,
    (5, 1): 36, (5, 2): 7, (5, 3): 1,
    (6, 1): 13, (6, 2): 2, (6, 6): 1,
    (7, 1): 4,
}

POSSIBLE_CELLS = {
    (1, 1): 1969,
    (2, 1): 699, (2, 2): 221,
    (3, 1): 286, (3, 2): 95, (3, 3): 16,
    (4, 1): 121, (4, 2): 40, (4, 3): 6, (4, 4): 1,
    (5, 1): 34, (5, 2): 9, (5, 3): 1,
    (6, 1): 13, (6, 2): 2, (6, 6): 1,
    (7, 1): 4,
}

# Dynamic table: rows count never-null parameters.
DYNAMIC_CELLS = {
    (1, 1): 126,
    (2, 1): 18, (2, 2): 184,
    (3, 2): 4, (3, 3): 59,
    (4, 4): 24,
    (5, 3): 1, (5, 5): 9,
    (6, 4): 1, (6, 5): 1, (6, 6): 2,
    (7, 3): 1,
}
DYNAMIC_COLUMN_TOTALS = {1: 126, 2: 202, 3: 63, 4: 24, 5: 10, 6: 4, 7: 1}
DYNAMIC_ALL_REQUIRED = {1: 126, 2: 184, 3: 59, 4: 24, 5: 9, 6: 2, 7: 0}

# Percentages as printed in the reference grids, keyed like the cells.
DEFINITE_PRINTED = {
    (2, 1): 79, (2, 2): 21, (3, 1): 74, (3, 2): 24, (3, 3): 2,
    (4, 1): 73, (4, 2): 24, (4, 3): 3, (5, 1): 82, (5, 2): 16, (5, 3): 2,
    (6, 1): 81, (6, 2): 13, (6, 6): 6, (7, 1): 100,
}
POSSIBLE_PRINTED = {
    (2, 1): 76, (2, 2): 24, (3, 1): 72, (3, 2): 24, (3, 3): 4,
    (4, 1): 72, (4, 2): 24, (4, 3): 4, (4, 4): 1, (5, 1): 77, (5, 2): 20, (5, 3): 2,
    (6, 1): 81, (6, 2): 13, (6, 6): 6, (7, 1): 100,
}

PROJECT_PERCENTAGES = [
    ("999", 1, 100), ("201", 12, 60), ("209", 12, 100), ("200", 15, 67),
    ("202", 93, 98), ("228", 110, 89), ("213", 167, 89),
]


def tab(cells: dict, title: str = "") -> CrossTab:
    return CrossTab.from_counts(cells.items(), title)
