import pytest
from pathlib import Path

from src.wildbps import cache
from src.wildbps.bps import BpsPolynomial
from src.wildbps.gw import WildCurveData
from src.wildbps.schemas import BpsDocument

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def memory_only_cache():
    """每个测试都只用内存缓存，结束后清空备忘表"""
    cache.install(None)
    yield
    cache.install(None)
    cache.clear_memory()


@pytest.fixture
def table_cache(tmp_path):
    """提供临时目录中的持久缓存并设为当前缓存"""
    store = cache.TableCache(tmp_path / "cache")
    cache.install(store)
    yield store
    cache.install(None)


@pytest.fixture
def golden():
    """按文件名读取 golden BPS 多项式"""
    def load(name: str) -> BpsPolynomial:
        text = (DATA_DIR / name).read_text(encoding="utf-8")
        return BpsPolynomial.from_document(BpsDocument.model_validate_json(text))
    return load


@pytest.fixture
def golden_path():
    """golden 文件路径"""
    return lambda name: DATA_DIR / name


@pytest.fixture
def equal_n_curve():
    """n_a 相等的小曲线数据，两条管线都能用"""
    return WildCurveData(g=1, n=(2, 2), l=(1, 2))


@pytest.fixture
def wild_curve():
    """n_a 不相等的曲线数据，只能走精细化管线"""
    return WildCurveData(g=1, n=(3, 4), l=(2, 2))
