"""Kernel backend selection.

The fixpoint sweep and the opaque-choice generator are the two inner loops.
A compiled Cython build (``molnull._kernels``) is used when it imports;
otherwise the pure-Python twin in ``molnull._kernels_py`` is used. Setting
``MOLNULL_PURE_PYTHON=1`` forces the fallback.

Flat transfer layout used by ``sweep`` and ``evaluate_entries``:

* ``kind[e]``: 0 for a path-set entry, 1 for a budget-fallback entry
* ``local[e]``: local class of a fallback entry (0..2)
* ``path_start``: entry ``e`` owns paths ``path_start[e]:path_start[e+1]``
* ``path_fail[p]``: 1 if path ``p`` fails locally
* ``ev_start``/``ev_slot``: callee-use slots of path ``p`` are
  ``ev_slot[ev_start[p]:ev_start[p+1]]`` (a fallback entry stores its
  dependencies as a single pseudo-path)
* ``entry_slot[e]``: environment slot (abstraction, position) of entry ``e``
* ``env``/``impl_cls``: int8 class codes, 0 not locally, 1 possibly,
  2 definitely required

Integer arrays are ``array('i')``, class arrays ``array('b')``.
"""

import os

from molnull import _kernels_py

if os.environ.get("MOLNULL_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from molnull import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

SplitMix64 = _impl.SplitMix64
sweep = _impl.sweep
evaluate_entries = _impl.evaluate_entries
