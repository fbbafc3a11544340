try:
    from ._core import *  # noqa: F401,F403
    from . import _core as _core  # noqa: F401
except ImportError:  # build-tree layout: _core sits next to the package dir
    from _core import *  # noqa: F401,F403
    import _core as _core  # noqa: F401

__all__ = [name for name in dir(_core) if not name.startswith("_")]
