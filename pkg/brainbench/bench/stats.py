"""Between-model significance of per-run test metrics."""
from __future__ import annotations

import numpy as np
from scipy import stats

TEST_NAME = 'welch_two_sided'


def significance_test(runs_a, runs_b):
    """Two-sided Welch t-test p-value.

    Two constant samples give p = 1 when their means agree and p = 0 when
    they differ.
    """
    a = np.asarray(runs_a, dtype=np.float64)
    b = np.asarray(runs_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError('significance test needs at least 2 runs per model, got %d and %d' % (a.size, b.size))
    if np.var(a) == 0 and np.var(b) == 0:
        return 1.0 if a[0] == b[0] else 0.0
    p = stats.ttest_ind(a, b, equal_var=False).pvalue
    return float(np.clip(p, 0.0, 1.0))
