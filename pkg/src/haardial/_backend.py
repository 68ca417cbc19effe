"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``HAARDIAL_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

NAME = "python"
kernels = _fallback

if os.environ.get("HAARDIAL_BACKEND", "").lower() != "python":
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        kernels = _kernels
        NAME = "cython"

stream_uniforms = kernels.stream_uniforms
apply_program = kernels.apply_program
householder_qr = kernels.householder_qr
