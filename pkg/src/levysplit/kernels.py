"""Kernel backend selection.

The sequential path scans (argmin/argmax, the occupation-time pair scan)
go to the compiled extension when it built: a fused C pass beats the
multi-pass numpy versions several-fold on long grids.  The permutation
block sums always use the numpy implementation, which rides on BLAS and
outruns a scalar C scan by an order of magnitude at test-relevant sizes
(see benchmarks/bench_kernels.py for the numbers behind both choices).

``LEVYSPLIT_PURE_PYTHON=1`` forces the numpy fallback everywhere; both
backends implement identical contracts (see ``_kernels_py``).
"""

import os

from . import _kernels_py

if os.environ.get("LEVYSPLIT_PURE_PYTHON"):
    _scan = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _scan

        BACKEND = "c"
    except ImportError:
        _scan = _kernels_py
        BACKEND = "python"

argmin_last = _scan.argmin_last
argmax_last = _scan.argmax_last
argmax_norm_last = _scan.argmax_norm_last
conditioned_pair_scan = _scan.conditioned_pair_scan
perm_block_sums = _kernels_py.perm_block_sums
