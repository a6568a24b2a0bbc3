import math
import os
import tempfile
from pathlib import Path

from .errors import ConfigError

# Products like 0.29 * 100 land a hair below the intended integer.
FLOOR_EPS = 1e-9


def safe_floor(x: float) -> int:
    return int(math.floor(x + FLOOR_EPS))


def coreset_size(n: int, alpha: float) -> int:
    """Global coreset size floor((1 - alpha) * n)."""
    if not 0.0 <= alpha < 1.0:
        raise ConfigError(f"pruning rate must lie in [0, 1), got {alpha}")
    size = safe_floor((1.0 - alpha) * n)
    if size < 1:
        raise ConfigError(f"pruning rate {alpha} leaves an empty coreset for N={n}")
    return size


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def thread_count() -> int:
    """Worker cap from NUCS_THREADS (0 or unset = auto)."""
    raw = os.environ.get("NUCS_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"NUCS_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("NUCS_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)
