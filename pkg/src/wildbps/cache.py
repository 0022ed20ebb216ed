"""组合表的持久缓存：每行一条 `kind:key<TAB>value`，首行为带版本的文件头

缓存从不具有权威性：读不出的记录直接重新计算。
"""
import functools
import logging
import threading
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Optional

from .errors import CacheError
from .partitions import Partition
from .schemas import CacheRecord

SCHEMA_VERSION = 1
HEADER = f"# wildbps-cache v{SCHEMA_VERSION}"
KINDS = ("character", "lr", "macdonald_P", "macdonald_N", "htilde", "principal_spec")

logger = logging.getLogger(__name__)


class TableCache:
    """并发读、串行追加的表格缓存"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.path = self.directory / "tables.tsv"
        self._lock = threading.Lock()
        self._records: Dict[str, str] = {}
        self.hits = 0
        self.misses = 0
        self._load()

    def _load(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            self.path.write_text(HEADER + "\n", encoding="utf-8")
            return
        with open(self.path, "r", encoding="utf-8") as f:
            header = f.readline().rstrip("\n")
            if header != HEADER:
                raise CacheError(f"缓存文件头不符: {header!r}，期望 {HEADER!r}")
            for lineno, line in enumerate(f, start=2):
                if not line.endswith("\n"):
                    logger.warning(f"跳过被截断的缓存行 {self.path}:{lineno}")
                    continue
                parts = line.rstrip("\n").split("\t", 1)
                if len(parts) != 2:
                    logger.warning(f"跳过格式错误的缓存行 {self.path}:{lineno}")
                    continue
                self._records[parts[0]] = parts[1]
        logger.info(f"已加载 {len(self._records)} 条缓存记录: {self.path}")

    def get(self, kind: str, key: str) -> Optional[str]:
        value = self._records.get(f"{kind}:{key}")
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, kind: str, key: str, value: str):
        if kind not in KINDS:
            raise CacheError(f"未知的缓存种类: {kind}")
        if "\n" in value or "\t" in value:
            raise CacheError(f"缓存值不能含有换行或制表符: {kind}:{key}")
        full = f"{kind}:{key}"
        with self._lock:
            if full in self._records:
                return
            self._records[full] = value
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(f"{full}\t{value}\n")

    def records(self) -> Iterator[CacheRecord]:
        for full, value in sorted(self._records.items()):
            kind, key = full.split(":", 1)
            yield CacheRecord(version=SCHEMA_VERSION, kind=kind, key=key, value=value)

    def __len__(self):
        return len(self._records)


_active: Optional[TableCache] = None
_memos = []


def install(cache: Optional[TableCache]):
    """设置当前进程使用的持久缓存；None 表示只用内存"""
    global _active
    _active = cache


def active() -> Optional[TableCache]:
    return _active


def clear_memory():
    """清空所有进程内备忘表"""
    for memo in _memos:
        memo.clear()


def canonical_key(args) -> str:
    parts = []
    for a in args:
        if isinstance(a, Partition):
            parts.append(a.text())
        elif isinstance(a, tuple):
            parts.append("(" + canonical_key(a) + ")")
        else:
            parts.append(str(a))
    return ";".join(parts)


def persistent(kind: str, encode: Callable[[Any], str], decode: Callable[[str], Any]):
    """先查内存备忘，再查持久缓存，最后才计算"""

    def decorator(fn):
        memo: Dict[str, Any] = {}
        lock = threading.Lock()
        _memos.append(memo)

        @functools.wraps(fn)
        def wrapper(*args):
            key = canonical_key(args)
            if key in memo:
                return memo[key]
            store = _active
            value = None
            if store is not None:
                text = store.get(kind, key)
                if text is not None:
                    try:
                        value = decode(text)
                    except Exception:
                        logger.warning(f"缓存记录无法解码，重新计算: {kind}:{key}")
                        value = None
            if value is None:
                value = fn(*args)
                if store is not None:
                    store.put(kind, key, encode(value))
            with lock:
                memo[key] = value
            return value

        wrapper.cache_clear = memo.clear
        return wrapper

    return decorator
