"""
Reference tables and correlations
=================================

The published accuracy matrices ship with the package. Recomputing their
summaries is a quick check of the aggregation code.
"""

import numpy as np

from entity_guard import correlate
from entity_guard.analytics import (
    BY_CATEGORY,
    BY_DIRECTION,
    cell_spread,
    key_spread,
    load_model_characteristics,
    load_reference_table,
)

for axis in (BY_CATEGORY, BY_DIRECTION):
    ref = load_reference_table(axis)
    for system in ref.table.systems:
        print(f"{axis:13s} {system:16s} {ref.table.macro_row[system]:7.3f}  published {ref.published_macro[system]:.2f}")

###############################################################################
# Spread over systems per direction. The published spreads follow the
# sample formula (n - 1 in the denominator).

by_direction = load_reference_table(BY_DIRECTION).table
for key, spread in key_spread(by_direction).items():
    print(f"{key}: {spread.mean:.2f} +- {spread.std:.2f}")

overall = cell_spread(by_direction)
print(f"all 96 cells: {overall.mean:.2f} +- {overall.std:.2f}")
print("population std:", round(float(np.std(list(by_direction.cells.values()))), 3))

###############################################################################
# Does tokenising entities into more pieces help? Seven open systems.

rows = load_model_characteristics()
acc = [r["avg_accuracy"] for r in rows]
tokens = [r["avg_entity_tokens"] for r in rows]
for method in ("pearson", "spearman"):
    res = correlate(acc, tokens, method)
    print(f"{method}: r = {res.coefficient:.4f}, p = {res.p_value:.3f}, n = {res.n}")
