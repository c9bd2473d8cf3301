"""Kernel backend selection.

The hot sequential kernels (strip scan, two-particle stepping, block
samplers) have a compiled twin that mirrors the NumPy reference protocol
draw for draw.  Import falls back to the reference implementation when the
extension is missing; FVSPINE_BACKEND=purepy|compiled|auto overrides.

Kernels that are pure vector arithmetic end to end (skeleton walks, Bessel
batches, the log-time generator) have no twin: numpy is already the fast
path for them, and keeping their vector transcendentals out of compiled
code sidesteps last-ulp divergence between SIMD math and libm.
"""
from __future__ import annotations

import os

from . import _fvkern, _kernels, _stripkern, tables

try:
    from . import _core
except ImportError:  # pragma: no cover - build-dependent
    _core = None

_mode = os.environ.get("FVSPINE_BACKEND", "auto").strip().lower() or "auto"
if _mode == "auto":
    _compiled = _core is not None
elif _mode in ("compiled", "cython", "core"):
    if _core is None:
        raise ImportError(
            "FVSPINE_BACKEND asks for the compiled core, but it is not built")
    _compiled = True
elif _mode in ("purepy", "python", "numpy", "reference"):
    _compiled = False
else:
    raise ValueError(f"unrecognized FVSPINE_BACKEND value: {_mode!r}")


def backend_name() -> str:
    return "compiled" if _compiled else "purepy"


def have_compiled() -> bool:
    return _core is not None


def xi_block(rs, n: int):
    """n step factors off rs (n uniforms)."""
    n = int(n)
    if _compiled:
        out = _core.xi_block(rs.bitgen(), n,
                             *tables.table_arrays(tables.xi_table()))
    else:
        out = _kernels.xi_block(rs.generator(), n)
    rs.sync_draws(n)
    return out


def exit_block(rs, n: int):
    """n strip exits off rs (2n uniforms); returns (durations, top)."""
    n = int(n)
    if _compiled:
        dur, top = _core.exit_block(rs.bitgen(), n,
                                    *tables.table_arrays(tables.exit_table()))
    else:
        dur, top = _kernels.exit_block(rs.generator(), n)
    rs.sync_draws(2 * n)
    return dur, top


def strip_scan():
    """The segment scanner consumed by the strip driver."""
    if _compiled:
        def scan(gen, seg, z0, delta, band, cap):
            return _core.strip_scan(gen.bit_generator, seg, z0, delta, band, cap)
        return scan
    return _stripkern.strip_scan_py


def fv_first_branch(rs, n_sims: int, dt: float, y0: float = 1.0):
    """First branch (value, time) for n pairs; draws synced on rs."""
    if _compiled:
        y, t, draws = _core.fv_first_branch(rs.bitgen(), int(n_sims),
                                            float(dt), float(y0))
    else:
        y, t, draws = _fvkern.fv_first_branch_py(rs.generator(), int(n_sims),
                                                 float(dt), float(y0))
    rs.sync_draws(draws)
    return y, t


def fv_chain(rs, y0: float, dt: float, max_branches: int, **kw):
    """One recorded trajectory; draws synced on rs."""
    if _compiled:
        out = _core.fv_chain(rs.bitgen(), float(y0), float(dt),
                             int(max_branches), **kw)
    else:
        out = _fvkern.fv_chain_py(rs.generator(), float(y0), float(dt),
                                  int(max_branches), **kw)
    rs.sync_draws(out["draws"])
    return out
