"""Kernel backend selection.

The compiled extension (_kernel_c, built from _kernel_c.pyx) is preferred;
the pure-Python module (_kernel_py) is the fallback.  Set SETFORGE_KERNEL=py
or =c to force a backend; forcing the compiled one raises if it is missing.
"""

import os

_choice = os.environ.get("SETFORGE_KERNEL", "auto").lower()

if _choice in ("py", "python"):
    from . import _kernel_py as impl
elif _choice in ("c", "cython", "compiled"):
    from . import _kernel_c as impl  # ImportError here means no built extension
elif _choice == "auto":
    try:
        from . import _kernel_c as impl
    except ImportError:
        from . import _kernel_py as impl
else:
    raise RuntimeError(f"SETFORGE_KERNEL must be 'py', 'c' or 'auto', got {_choice!r}")

BACKEND_NAME = impl.BACKEND_NAME
canon = impl.canon
member = impl.member
union = impl.union
difference = impl.difference
intersection = impl.intersection
dom_elems = impl.dom_elems
ran_elems = impl.ran_elems
override_elems = impl.override_elems
dres_elems = impl.dres_elems
lookup = impl.lookup
is_pfun_elems = impl.is_pfun_elems
