import os
import logging
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field


class Settings(BaseModel):
    """从环境变量读取的运行配置"""
    cache_dir: Path = Field(
        Path.home() / ".cache" / "wildbps", description="表格缓存目录")
    threads: int = Field(1, ge=1, description="默认工作线程数")
    log_level: str = Field("INFO", description="根日志级别")
    htilde_swap: bool = Field(False, description="交换 H̃ 的 (q,t) 参数顺序")


def load_env(mode: str | None = None) -> None:
    """加载 .env 与 .env.<mode>"""
    load_dotenv()
    if mode is None:
        return
    env_file = f".env.{mode}"
    if os.path.exists(env_file):
        logging.info(f"加载环境变量文件: {env_file}")
        load_dotenv(env_file, override=True)
    else:
        logging.warning(f"未找到环境变量文件: {env_file}，将跳过加载")


def get_settings() -> Settings:
    env = os.environ
    values = {}
    if env.get("WILDBPS_CACHE_DIR"):
        values["cache_dir"] = Path(env["WILDBPS_CACHE_DIR"]).expanduser()
    if env.get("WILDBPS_THREADS"):
        values["threads"] = int(env["WILDBPS_THREADS"])
    if env.get("WILDBPS_LOG_LEVEL"):
        values["log_level"] = env["WILDBPS_LOG_LEVEL"]
    if env.get("WILDBPS_HTILDE_SWAP"):
        values["htilde_swap"] = env["WILDBPS_HTILDE_SWAP"].lower() in (
            "1", "true", "yes")
    return Settings(**values)
