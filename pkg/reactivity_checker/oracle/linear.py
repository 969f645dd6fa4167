from __future__ import annotations

import logging
import time
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from reactivity_checker._common.reactivity_common import InternalError

Variable = Hashable


def solve_exact(
    variables: Sequence[Variable],
    coefficients: Mapping[Variable, Mapping[Variable, Fraction]],
    constants: Mapping[Variable, Fraction],
) -> dict[Variable, Fraction]:
    """Solve ``x_v = sum_u coefficients[v][u] * x_u + constants[v]`` exactly.

    Gauss-Jordan elimination over rationals on ``(I - C) x = b``.

    >>> solve_exact(["x"], {"x": {"x": Fraction(1, 2)}}, {"x": Fraction(1, 2)})
    {'x': Fraction(1, 1)}
    >>> solve_exact([], {}, {})
    {}
    """
    start = time.monotonic()
    index = {v: i for i, v in enumerate(variables)}
    size = len(variables)
    matrix: list[list[Fraction]] = []
    for v in variables:
        row = [Fraction(0)] * (size + 1)
        row[index[v]] = Fraction(1)
        for u, c in coefficients.get(v, {}).items():
            if u in index:
                row[index[u]] -= c
        row[size] = Fraction(constants.get(v, 0))
        matrix.append(row)

    for col in range(size):
        pivot = next((r for r in range(col, size) if matrix[r][col] != 0), None)
        if pivot is None:
            raise InternalError(f"singular system at variable {variables[col]!r}")
        matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
        lead = matrix[col][col]
        if lead != 1:
            matrix[col] = [x / lead for x in matrix[col]]
        pivot_row = matrix[col]
        for r in range(size):
            factor = matrix[r][col]
            if r != col and factor != 0:
                current = matrix[r]
                for j in range(col, size + 1):
                    if pivot_row[j] != 0:
                        current[j] -= factor * pivot_row[j]

    logging.debug(
        "solved %d exact equations, took %dms", size, (time.monotonic() - start) * 1000
    )
    return {v: matrix[index[v]][size] for v in variables}
