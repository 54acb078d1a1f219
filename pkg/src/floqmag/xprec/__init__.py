"""Extended-precision linear algebra used by the high-order series code.

Public surface:
  BACKEND       -- "compiled" when the Cython kernels loaded, else "fallback"
  DDMatrix      -- complex matrix with ~32-digit entries
  QDMatrix      -- complex matrix with ~64-digit entries
  dd_matmul, qd_matmul -- raw limb-stack products (backend-dispatched)
"""
from ._backend import BACKEND, dd_matmul, qd_matmul
from .matrices import DDMatrix, QDMatrix, dd_recip_int, qd_recip_int

__all__ = [
    "BACKEND",
    "DDMatrix",
    "QDMatrix",
    "dd_matmul",
    "qd_matmul",
    "dd_recip_int",
    "qd_recip_int",
]
