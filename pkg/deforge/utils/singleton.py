"""
Singleton Metaclass.

Process-wide shared objects (the configuration and the catalog cache) are
created once per class and reused by every caller, from any thread.
"""

import threading
from typing import Any


class SingletonMeta(type):
    """Metaclass giving each class a single, lazily built instance.

    The first call constructs the instance under a lock; later calls return it
    and ignore their arguments.
    """

    _instances: dict[type, Any] = {}
    _lock: threading.Lock = threading.Lock()

    def __call__(cls, *args, **kwargs):
        try:
            return cls._instances[cls]
        except KeyError:
            pass
        with cls._lock:
            if cls not in cls._instances:
                cls._instances[cls] = super().__call__(*args, **kwargs)
        return cls._instances[cls]

    def reset_instance(cls) -> None:
        """Drop the cached instance so the next call rebuilds it."""
        with cls._lock:
            cls._instances.pop(cls, None)

    @classmethod
    def reset_all(mcs) -> None:
        """Drop every cached instance (test isolation)."""
        with mcs._lock:
            mcs._instances.clear()

    @property
    def instance(cls) -> Any:
        """The instance if it exists, without creating one."""
        return cls._instances.get(cls)

    def is_initialized(cls) -> bool:
        return cls in cls._instances
